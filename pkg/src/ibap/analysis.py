"""IBAP analysis of a system of subspaces.

:func:`check_conditions` evaluates ten equivalent characterizations of the
inverse best approximation property, each through its own numerical route:

1. the analysis map ``J x = (P_1 x, ..., P_n x)`` is onto;
2. the subspaces are linearly independent (finite sums are always closed);
3. ``c = inf ||x_1 + ... + x_n|| / sqrt(sum ||x_k||^2) > 0``;
4. the Gram operator is invertible;
5. the system is isomorphic to a system of orthogonal subspaces;
6. some equivalent inner product makes the subspaces orthogonal;
7. there are projections ``E_k`` onto ``H_k`` with ``E_i E_j = 0``;
8. each ``H_i`` has positive inclination to the sum of the others;
9. ``sum_i  intersection_{j != i} H_j^perp`` is the whole space;
10. ``H_i^perp + intersection_{j != i} H_j^perp`` is the whole space for each ``i``.

Conditions 5-7 are certified by building their witnesses.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import InputError, RefusalError
from .subspace import (
    DEFAULT_TOL,
    INF,
    InnerProduct,
    Subspace,
    Tolerance,
    complement,
    inclination,
    intersect,
    kernel,
    opening,
    subspace_sum,
    zero_subspace,
)

CONDITIONS = tuple(range(1, 11))


class SubspaceSystem:
    """An ordered list of ``n >= 1`` subspaces of one inner-product space."""

    __slots__ = ("space", "subspaces")

    def __init__(self, subspaces: Sequence[Subspace], space: InnerProduct | None = None):
        subspaces = tuple(subspaces)
        if not subspaces:
            raise InputError("a subspace system needs at least one subspace")
        space = subspaces[0].space if space is None else space
        for k, s in enumerate(subspaces):
            if s.space != space:
                raise InputError(f"subspace {k} does not share the system's inner product")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "subspaces", subspaces)

    def __setattr__(self, name, value):
        raise AttributeError("SubspaceSystem is immutable")

    def __len__(self):
        return len(self.subspaces)

    def __iter__(self):
        return iter(self.subspaces)

    def __getitem__(self, k):
        return self.subspaces[k]

    def __repr__(self):
        return f"SubspaceSystem(dim={self.dim}, ranks={self.ranks})"

    def __eq__(self, other):
        return (
            isinstance(other, SubspaceSystem)
            and other.space == self.space
            and other.subspaces == self.subspaces
        )

    __hash__ = None

    @property
    def n(self) -> int:
        return len(self.subspaces)

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def ranks(self) -> tuple[int, ...]:
        return tuple(s.rank for s in self.subspaces)

    @property
    def total_rank(self) -> int:
        return sum(self.ranks)

    def blocks(self) -> list[slice]:
        out, start = [], 0
        for r in self.ranks:
            out.append(slice(start, start + r))
            start += r
        return out

    def whitened_summation_map(self) -> np.ndarray:
        qs = [s.q for s in self.subspaces]
        dtype = np.result_type(*qs)
        return np.hstack(qs).astype(dtype, copy=False)

    def padded(self, extra: int) -> "SubspaceSystem":
        return SubspaceSystem([s.padded(extra) for s in self.subspaces])


@dataclass(frozen=True)
class GramOperator:
    """Block matrix with blocks ``B_i^H W B_j`` (the matrix of ``P_i`` on ``H_j``)."""

    matrix: np.ndarray
    ranks: tuple[int, ...]

    def block(self, i: int, j: int) -> np.ndarray:
        off = np.concatenate([[0], np.cumsum(self.ranks)])
        return self.matrix[off[i]:off[i + 1], off[j]:off[j + 1]]

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


@dataclass
class Witnesses:
    """Constructions certifying conditions 5-7 on an IBAP system.

    ``phi`` is the isomorphism from the orthogonal model
    ``H_1 (+) ... (+) H_n (+) N`` onto the space (columns ``[B_1 .. B_n B_N]``),
    ``metric`` the orthogonalizing inner product and ``lower``/``upper`` its
    equivalence constants: ``lower ||x|| <= ||x||_0 <= upper ||x||``.
    """

    oblique_projections: list
    metric: np.ndarray
    phi: np.ndarray
    block_ranks: tuple[int, ...]
    lower: float
    upper: float
    residuals: dict


@dataclass
class ConditionReport:
    dim: int
    n: int
    ranks: tuple[int, ...]
    c: object
    lambda_min_G: object
    li_dim_gap: int
    inclinations: tuple
    cond9_dim: int
    cond10_dims: tuple[int, ...]
    verdicts: tuple[bool, ...]
    margins: dict
    band: tuple[int, ...]
    notes: tuple[str, ...] = ()
    witnesses: Witnesses | None = field(default=None, compare=False, repr=False)

    @property
    def ibap(self) -> bool:
        """Verdict of condition 1 (the definition itself)."""
        return self.verdicts[0]

    @property
    def agree(self) -> bool:
        return len(set(self.verdicts)) == 1

    @property
    def flagged(self) -> bool:
        return bool(self.band)

    def verdict(self, k: int) -> bool:
        return self.verdicts[k - 1]


@dataclass(frozen=True)
class StabilityCertificate:
    c: float
    theta: tuple[float, ...]
    margin: float
    verdict: bool
    predicted_lower_bound: float


def build_summation_map(system: SubspaceSystem) -> np.ndarray:
    """Matrix ``[B_1 | ... | B_n]`` sending stacked coordinates to ``x_1 + ... + x_n``."""
    bs = [s.basis for s in system]
    return np.hstack(bs).astype(np.result_type(*bs), copy=False)


def build_analysis_map(system: SubspaceSystem) -> np.ndarray:
    """Matrix of ``J``: rows ``B_k^H W`` stacked, so ``J x`` are the coordinates of ``P_k x``."""
    return build_summation_map(system).conj().T * system.space.weights[None, :]


def build_gram(system: SubspaceSystem) -> GramOperator:
    st = system.whitened_summation_map()
    g = st.conj().T @ st
    g = (g + g.conj().T) / 2
    return GramOperator(g, system.ranks)


def _sigma_min(st: np.ndarray):
    d, r = st.shape
    if r == 0:
        return INF
    if r > d:
        return 0.0
    return float(np.linalg.svd(st, compute_uv=False)[-1])


def ibap_constant(system: SubspaceSystem):
    """IBAP constant ``c``: least singular value of the summation map.

    Equals ``sqrt(lambda_min(G))``.  For a system of zero subspaces the
    infimum is over an empty set and :data:`INF` is returned.
    """
    if system.total_rank == 0:
        warnings.warn("all subspaces are trivial; the IBAP constant is +inf", RuntimeWarning, stacklevel=2)
        return INF
    return _sigma_min(system.whitened_summation_map())


def _min_margin(records, tol: Tolerance) -> tuple[float, float] | None:
    """Closest call among recorded rank decisions, on a log scale."""
    best = None
    for s, t in records:
        gap = abs(math.log(max(s, 1e-300) / t))
        if best is None or gap < best[0]:
            best = (gap, s, t)
    return None if best is None else (best[1], best[2])


def _others(system, i):
    return [s for j, s in enumerate(system) if j != i]


def _complement_meet(system, i, tol, record=None) -> Subspace:
    """``intersection_{j != i} H_j^perp``, the whole space when ``n = 1``."""
    others = _others(system, i)
    if not others:
        return intersect([], space=system.space)
    return intersect([complement(s, tol) for s in others], tol, record)


def _orthogonal_model(system: SubspaceSystem, tol: Tolerance, record=None):
    """Whitened factor ``F = [Q_1 .. Q_n Q_N]`` and its inverse, or ``None``."""
    st = system.whitened_summation_map()
    total = subspace_sum(list(system), tol)
    n_space = complement(total, tol)
    f = np.hstack([st, n_space.q]).astype(np.result_type(st, n_space.q), copy=False)
    if f.shape[1] != system.dim:
        return None
    s = np.linalg.svd(f, compute_uv=False)
    if tol.rank(s, record) < system.dim:
        return None
    return f, np.linalg.inv(f), n_space.rank, s


def _witnesses(system, f, finv, n_rank, svals) -> Witnesses:
    sw = system.space.sqrt_w
    ranks = system.ranks + (n_rank,)
    bounds = np.concatenate([[0], np.cumsum(ranks)])
    e_white = [f[:, bounds[k]:bounds[k + 1]] @ finv[bounds[k]:bounds[k + 1], :] for k in range(system.n)]
    m0 = finv.conj().T @ finv
    m0 = (m0 + m0.conj().T) / 2
    res = {"idempotence": 0.0, "annihilation": 0.0, "range": 0.0, "orthogonality": 0.0}
    for k, e in enumerate(e_white):
        res["idempotence"] = max(res["idempotence"], float(np.linalg.norm(e @ e - e, 2)))
        qk = system[k].q
        if qk.shape[1]:
            res["range"] = max(res["range"], float(np.linalg.norm(e @ qk - qk, 2)))
        for j, ej in enumerate(e_white):
            if j != k:
                res["annihilation"] = max(res["annihilation"], float(np.linalg.norm(e @ ej, 2)))
                qj = system[j].q
                if qk.shape[1] and qj.shape[1]:
                    res["orthogonality"] = max(
                        res["orthogonality"], float(np.linalg.norm(qk.conj().T @ m0 @ qj, 2))
                    )
    to_orig = lambda a: a / sw[:, None] * sw[None, :]
    return Witnesses(
        oblique_projections=[to_orig(e) for e in e_white],
        metric=sw[:, None] * m0 * sw[None, :],
        phi=f / sw[:, None],
        block_ranks=ranks,
        lower=float(1.0 / svals[0]),
        upper=float(1.0 / svals[-1]),
        residuals=res,
    )


def check_conditions(system: SubspaceSystem, tol: Tolerance = DEFAULT_TOL, witnesses: bool = True) -> ConditionReport:
    """Evaluate all ten IBAP conditions and collect their evidence.

    Each verdict is decided from its own computation.  Decisions whose
    deciding quantity lies within ``tol.band`` of its threshold are listed in
    ``report.band``; only such borderline verdicts may disagree.
    """
    space, n, dim = system.space, system.n, system.dim
    ranks = system.ranks
    total = system.total_rank
    st = system.whitened_summation_map()
    cut = tol.rel * math.sqrt(n)
    margins, band = {}, set()

    # 3: least singular value of S
    c = _sigma_min(st)
    v3 = c is INF or c > cut
    margins[3] = (c, cut)
    if c is not INF and tol.in_band(c, cut):
        band.add(3)

    # 4: least eigenvalue of G = S^H S
    if total == 0:
        lam = INF
        v4 = True
    else:
        g = build_gram(system).matrix
        lam_raw = float(np.linalg.eigvalsh(g)[0]) if total <= dim else 0.0
        lam = max(lam_raw, 0.0)
        v4 = lam > cut * cut
        # forming G costs about eps ||G|| in its small eigenvalues; below that
        # floor the sign of lam_min - cut^2 is not resolved
        floor = 4 * np.finfo(float).eps * total * float(np.abs(g).sum(axis=0).max())
        if tol.in_band(math.sqrt(lam), cut) or (v4 and lam <= floor):
            band.add(4)
    margins[4] = (lam, cut * cut)

    # 1: rank of J
    rec = []
    if total == 0:
        v1 = True
    else:
        jw = build_analysis_map(system) / space.sqrt_w[None, :]
        s_j = np.linalg.svd(jw, compute_uv=False)
        v1 = tol.rank(s_j, rec) == total
    margins[1] = _min_margin(rec, tol)

    # 2: linear independence through the dimension of the sum
    rec = []
    dim_sum = subspace_sum(list(system), tol, rec).rank
    gap = total - dim_sum
    v2 = gap == 0
    margins[2] = _min_margin(rec, tol)

    # 5-7: orthogonal model, orthogonalizing metric, oblique projections
    rec = []
    model = _orthogonal_model(system, tol, rec)
    margins[5] = margins[6] = margins[7] = _min_margin(rec, tol)
    wit = None
    v5 = v6 = v7 = False
    if model is not None:
        f, finv, n_rank, svals = model
        v5 = True
        m0 = finv.conj().T @ finv
        try:
            np.linalg.cholesky((m0 + m0.conj().T) / 2)
            v6 = True
        except np.linalg.LinAlgError:
            v6 = False
        bounds = np.concatenate([[0], np.cumsum(ranks)])
        e_ok = True
        for k in range(n):
            blk = slice(bounds[k], bounds[k + 1])
            e = f[:, blk] @ finv[blk, :]
            if np.linalg.matrix_rank(e, tol=tol.threshold(np.linalg.norm(e, 2))) != ranks[k]:
                e_ok = False
        v7 = e_ok
        if witnesses:
            wit = _witnesses(system, f, finv, n_rank, svals)

    # 8: inclinations to the sum of the others
    rec = []
    deltas = []
    for i in range(n):
        others = _others(system, i)
        other_sum = subspace_sum(others, tol, rec) if others else zero_subspace(space)
        deltas.append(inclination(system[i], other_sum))
    finite = [d for d in deltas if d is not INF]
    v8 = all(d > cut for d in finite)
    dmin = min(finite) if finite else INF
    margins[8] = (dmin, cut)
    if dmin is not INF and tol.in_band(dmin, cut):
        band.add(8)
    m8 = _min_margin(rec, tol)
    if m8 and tol.in_band(*m8):
        band.add(8)

    # 9 and 10: sums of intersections of complements
    rec9, rec10 = [], []
    meets = [_complement_meet(system, i, tol, rec9) for i in range(n)]
    rec10.extend(rec9)
    cond9 = subspace_sum(meets, tol, rec9).rank
    v9 = cond9 == dim
    cond10 = tuple(
        subspace_sum([complement(system[i], tol), meets[i]], tol, rec10).rank for i in range(n)
    )
    v10 = all(d == dim for d in cond10)
    margins[9] = _min_margin(rec9, tol)
    margins[10] = _min_margin(rec10, tol)

    for k in (1, 2, 5, 6, 7, 9, 10):
        m = margins[k]
        if m is not None and tol.in_band(*m):
            band.add(k)

    verdicts = (v1, v2, v3, v4, v5, v6, v7, v8, v9, v10)
    notes = ("condition 2: sums of finite-dimensional subspaces are always closed; only independence is tested",)
    return ConditionReport(
        dim=dim,
        n=n,
        ranks=ranks,
        c=c,
        lambda_min_G=lam,
        li_dim_gap=gap,
        inclinations=tuple(deltas),
        cond9_dim=cond9,
        cond10_dims=cond10,
        verdicts=verdicts,
        margins=margins,
        band=tuple(sorted(band)),
        notes=notes,
        witnesses=wit if all(verdicts[:7]) else None,
    )


def _require_ibap(system, tol, what):
    c = ibap_constant(system) if system.total_rank else INF
    gap = system.total_rank - subspace_sum(list(system), tol).rank
    if gap or (c is not INF and c <= tol.rel * math.sqrt(system.n)):
        raise RefusalError(
            f"{what}: the system does not possess the IBAP (c={float(c):.3e}, li_dim_gap={gap})",
            c=c,
            li_dim_gap=gap,
        )
    return c


def orthogonal_model(system: SubspaceSystem, tol: Tolerance = DEFAULT_TOL) -> Witnesses:
    """Isomorphism onto an orthogonal model with the derived metric and projections."""
    _require_ibap(system, tol, "orthogonal model")
    model = _orthogonal_model(system, tol)
    if model is None:
        raise RefusalError("orthogonal model: assembled factor is singular")
    return _witnesses(system, *model)


def construct_oblique_projections(system: SubspaceSystem, tol: Tolerance = DEFAULT_TOL) -> list[np.ndarray]:
    """Projections ``E_k`` onto ``H_k`` with ``E_i E_j = 0`` for ``i != j``.

    Built by inverting the basis matrix of ``H_1 + ... + H_n + N`` where ``N``
    is the orthogonal complement of the sum.
    """
    return orthogonal_model(system, tol).oblique_projections


def construct_orthogonalizing_metric(system: SubspaceSystem, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Gram matrix ``W0`` of an equivalent inner product making the ``H_k`` orthogonal.

    ``<x, y>_0 = y^H W0 x = <phi^{-1} x, phi^{-1} y>`` with ``phi`` the
    isomorphism from the orthogonal model.
    """
    return orthogonal_model(system, tol).metric


def stability_certify(system: SubspaceSystem, perturbed: SubspaceSystem, tol: Tolerance = DEFAULT_TOL) -> StabilityCertificate:
    """Certify that ``perturbed`` keeps the IBAP when ``sum theta_k^2 < c^2``.

    The certificate is a sufficient condition only.  When it holds, the
    perturbed constant satisfies ``c' >= c - sqrt(sum theta_k^2)``, reported as
    ``predicted_lower_bound``.
    """
    if system.n != perturbed.n:
        raise InputError("systems have different numbers of subspaces")
    if system.space != perturbed.space:
        raise InputError("systems live in different spaces")
    if system.total_rank == 0:
        raise RefusalError("stability: every subspace of the system is trivial")
    c = _require_ibap(system, tol, "stability")
    theta = tuple(opening(a, b) for a, b in zip(system, perturbed))
    spread = math.fsum(t * t for t in theta)
    margin = c * c - spread
    return StabilityCertificate(
        c=c,
        theta=theta,
        margin=margin,
        verdict=margin > 0,
        predicted_lower_bound=c - math.sqrt(spread),
    )


def reduce_operator_system(ops: Sequence[np.ndarray], space: InnerProduct | None = None, tol: Tolerance = DEFAULT_TOL) -> SubspaceSystem:
    """System of ``(ker T_k)^perp``.

    ``T_k x = v_k`` is solvable for all ``v_k`` in the ranges exactly when the
    returned system possesses the IBAP.
    """
    ops = [np.atleast_2d(np.asarray(t)) for t in ops]
    if not ops:
        raise InputError("need at least one operator")
    dim = ops[0].shape[1]
    for k, t in enumerate(ops):
        if t.shape[1] != dim:
            raise InputError(f"operator {k} has {t.shape[1]} columns, expected {dim}")
    space = InnerProduct(dim) if space is None else space
    if space.dim != dim:
        raise InputError("operators do not act on the given space")
    return SubspaceSystem([complement(kernel(t, space, tol), tol) for t in ops], space)
