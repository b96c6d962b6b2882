"""Inverse marginal problems on finite probability spaces.

A sub-sigma-algebra generated by a partition of the atoms is represented by
:class:`PartitionSigmaAlgebra`; conditional expectation is block averaging and
``L^2(A)`` is the space of block-constant vectors in the metric
``<x, y> = sum_k p_k x_k conj(y_k)``.  A collection of algebras has the inverse
marginal property exactly when the zero-mean marginal subspaces ``L^2_0``
have the IBAP.

Atoms are indexed from 0 internally.  Functions that follow the notation of
sequences on ``{1, ..., N}`` (starting points, tail sums) take 1-based
integers and say so.

Infinite spaces are handled by truncation at ``N`` atoms.  The default
``"lump"`` policy keeps ``p_k`` for ``k < N`` and gives atom ``N`` the whole
tail mass, so tail sums ``r_k`` are exact; ``"renormalize"`` rescales the first
``N`` weights instead.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.special

from .analysis import ConditionReport, SubspaceSystem, check_conditions, ibap_constant
from .errors import InputError, RefusalError
from .riesz import VectorFamily, riesz_bounds
from .solver import TargetTuple, solve_exact
from .subspace import DEFAULT_TOL, InnerProduct, Subspace, Tolerance

TRUNCATIONS = ("lump", "renormalize")


class DiscreteProbabilitySpace:
    """Finitely many atoms with strictly positive masses summing to 1."""

    __slots__ = ("p", "atoms", "space", "truncation")

    def __init__(self, p, atoms: Sequence | None = None, truncation: str | None = None):
        p = np.array(p, dtype=float).reshape(-1)
        if p.size == 0:
            raise InputError("a probability space needs at least one atom")
        if not np.all(np.isfinite(p)) or np.any(p <= 0):
            raise InputError("atom masses must be finite and strictly positive")
        total = math.fsum(p)
        if abs(total - 1.0) > 1e-12:
            raise InputError(f"atom masses sum to {total!r}, not 1")
        atoms = tuple(range(1, p.size + 1)) if atoms is None else tuple(atoms)
        if len(atoms) != p.size:
            raise InputError("one label per atom is required")
        if truncation is not None and truncation not in TRUNCATIONS:
            raise InputError(f"unknown truncation policy {truncation!r}")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "space", InnerProduct(p.size, p))
        object.__setattr__(self, "truncation", truncation)

    def __setattr__(self, name, value):
        raise AttributeError("DiscreteProbabilitySpace is immutable")

    def __repr__(self):
        return f"DiscreteProbabilitySpace(N={self.N})"

    @property
    def N(self) -> int:
        return self.p.size

    def expectation(self, xi) -> float:
        return complex(np.dot(self.p, np.asarray(xi))) if np.iscomplexobj(xi) else float(np.dot(self.p, xi))

    @classmethod
    def uniform(cls, N: int) -> "DiscreteProbabilitySpace":
        return cls(np.full(N, 1.0 / N))

    @classmethod
    def geometric(cls, q: float, N: int, truncation: str = "lump") -> "DiscreteProbabilitySpace":
        """``p_k = (1 - q) q^(k-1)`` on ``{1, 2, ...}`` truncated at ``N``."""
        if not 0 < q < 1:
            raise InputError("geometric ratio must lie in (0, 1)")
        k = np.arange(N, dtype=float)
        if truncation == "lump":
            p = (1 - q) * q**k
            p[-1] = q ** (N - 1)
        elif truncation == "renormalize":
            p = q**k
            p = p / p.sum()
        else:
            raise InputError(f"unknown truncation policy {truncation!r}")
        return cls(p, truncation=truncation)

    @classmethod
    def power(cls, s: float, N: int, truncation: str = "lump") -> "DiscreteProbabilitySpace":
        """``p_k = k^(-s) / zeta(s)`` truncated at ``N``; ``s > 1``."""
        if not s > 1:
            raise InputError("power-law exponent must exceed 1")
        k = np.arange(1, N + 1, dtype=float)
        if truncation == "lump":
            z = scipy.special.zeta(s)
            p = k**-s / z
            p[-1] = scipy.special.zeta(s, N) / z
        elif truncation == "renormalize":
            p = k**-s
            p = p / p.sum()
        else:
            raise InputError(f"unknown truncation policy {truncation!r}")
        return cls(p, truncation=truncation)


class PartitionSigmaAlgebra:
    """The sigma-algebra generated by a partition of atom indices ``0..N-1``."""

    __slots__ = ("blocks", "labels")

    def __init__(self, blocks: Sequence[Sequence[int]], N: int | None = None):
        blocks = [tuple(sorted(int(i) for i in b)) for b in blocks]
        if any(not b for b in blocks):
            raise InputError("partition blocks must be nonempty")
        flat = [i for b in blocks for i in b]
        N = len(flat) if N is None else int(N)
        if sorted(flat) != list(range(N)):
            raise InputError(f"blocks do not form a partition of the {N} atoms")
        blocks.sort(key=lambda b: b[0])
        labels = np.empty(N, dtype=int)
        for j, b in enumerate(blocks):
            labels[list(b)] = j
        labels.setflags(write=False)
        object.__setattr__(self, "blocks", tuple(blocks))
        object.__setattr__(self, "labels", labels)

    def __setattr__(self, name, value):
        raise AttributeError("PartitionSigmaAlgebra is immutable")

    @classmethod
    def from_labels(cls, labels) -> "PartitionSigmaAlgebra":
        labels = np.asarray(labels)
        groups = {}
        for i, lab in enumerate(labels.tolist()):
            groups.setdefault(lab, []).append(i)
        return cls(list(groups.values()), labels.size)

    @classmethod
    def trivial(cls, N: int) -> "PartitionSigmaAlgebra":
        return cls([range(N)], N)

    @classmethod
    def discrete(cls, N: int) -> "PartitionSigmaAlgebra":
        return cls([[i] for i in range(N)], N)

    def __eq__(self, other):
        return isinstance(other, PartitionSigmaAlgebra) and other.blocks == self.blocks

    def __hash__(self):
        return hash(self.blocks)

    def __repr__(self):
        return f"PartitionSigmaAlgebra({[list(b) for b in self.blocks]})"

    @property
    def N(self) -> int:
        return self.labels.size

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    def block_masses(self, space: DiscreteProbabilitySpace) -> np.ndarray:
        return np.bincount(self.labels, weights=space.p, minlength=self.n_blocks)

    def averaging_matrix(self, space: DiscreteProbabilitySpace) -> np.ndarray:
        """Rows map a random variable to its block averages."""
        m = np.zeros((self.n_blocks, self.N))
        m[self.labels, np.arange(self.N)] = space.p
        return m / self.block_masses(space)[:, None]

    def is_measurable(self, xi, tol: float = 1e-12) -> bool:
        xi = np.asarray(xi)
        return all(np.ptp(xi[list(b)].real) + np.ptp(xi[list(b)].imag) <= tol * (1 + np.abs(xi).max()) for b in self.blocks)


def _check(space, alg):
    if alg.N != space.N:
        raise InputError(f"partition covers {alg.N} atoms, space has {space.N}")


def _rv(space, xi, name="xi"):
    xi = np.asarray(xi)
    if xi.shape != (space.N,):
        raise InputError(f"{name} must have {space.N} values, got shape {xi.shape}")
    return xi.astype(complex if np.iscomplexobj(xi) else float)


def conditional_expectation(space: DiscreteProbabilitySpace, alg: PartitionSigmaAlgebra, xi) -> np.ndarray:
    """``E(xi | A)``: the mass-weighted average of ``xi`` over each block."""
    _check(space, alg)
    xi = _rv(space, xi)
    return (alg.averaging_matrix(space) @ xi)[alg.labels]


def marginal_subspaces(space: DiscreteProbabilitySpace, alg: PartitionSigmaAlgebra) -> tuple[Subspace, Subspace]:
    """``(L^2(A), L^2_0(A))`` with bases orthonormal in the ``p``-metric.

    ``L^2`` uses the normalized indicators ``1_b / sqrt(mu(b))``; ``L^2_0`` is
    the orthogonal complement of the constants inside it, computed in block
    coordinates where the constant 1 is the vector ``(sqrt(mu(b)))_b``.
    """
    _check(space, alg)
    mu = alg.block_masses(space)
    u = np.zeros((space.N, alg.n_blocks))
    u[np.arange(space.N), alg.labels] = 1.0 / np.sqrt(mu[alg.labels])
    l2 = Subspace(space.space, u, check=False)
    q, _ = np.linalg.qr(np.sqrt(mu)[:, None], mode="complete")
    l20 = Subspace(space.space, u @ q[:, 1:], check=False)
    return l2, l20


def marginal_system(space: DiscreteProbabilitySpace, algs: Sequence[PartitionSigmaAlgebra]) -> SubspaceSystem:
    return SubspaceSystem([marginal_subspaces(space, a)[1] for a in algs], space.space)


def imp_check(space: DiscreteProbabilitySpace, algs: Sequence[PartitionSigmaAlgebra], tol: Tolerance = DEFAULT_TOL) -> ConditionReport:
    """IMP verdict: the IBAP report of the ``L^2_0`` marginal system."""
    if not algs:
        raise InputError("need at least one sigma-algebra")
    return check_conditions(marginal_system(space, algs), tol)


def _common_mean(space, xis, what):
    means = [space.expectation(x) for x in xis]
    scale = 1.0 + max(abs(m) for m in means)
    if max(abs(m - means[0]) for m in means) > 1e-10 * scale:
        raise RefusalError(f"{what}: inputs have unequal means {means}", means=means)
    return means[0]


def imp_solve(space: DiscreteProbabilitySpace, algs: Sequence[PartitionSigmaAlgebra], xis, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """``xi`` with ``E(xi | F_k) = xi_k`` for all ``k``.

    The centered inputs ``xi_k - a`` lie in ``L^2_0(F_k)``; the minimum-norm
    IBAP solution for them is shifted back by the common mean ``a``.
    """
    if len(xis) != len(algs):
        raise InputError(f"expected {len(algs)} random variables, got {len(xis)}")
    xis = [_rv(space, x, f"xis[{k}]") for k, x in enumerate(xis)]
    for k, (alg, x) in enumerate(zip(algs, xis)):
        _check(space, alg)
        if not alg.is_measurable(x, 1e-10):
            raise InputError(f"xis[{k}] is not measurable with respect to its sigma-algebra")
    a = _common_mean(space, xis, "imp_solve")
    system = marginal_system(space, algs)
    report = check_conditions(system, tol, witnesses=False)
    if not report.ibap:
        raise RefusalError("imp_solve: the collection does not possess the IMP", report=report)
    targets = TargetTuple([h.coordinates(x - a) for h, x in zip(system, xis)])
    return solve_exact(system, targets, tol).x + a


# -- the example on N: partitions by starting points -------------------------

def part_from_starting_points(A: Sequence[int], N: int) -> PartitionSigmaAlgebra:
    """Consecutive runs of ``{1..N}`` starting at 1 and at each element of ``A``.

    ``A`` is 1-based.  The point 1 never starts a new run (it always starts
    the first), and points beyond ``N`` are cut off by the truncation.
    """
    cuts = sorted({int(a) for a in A if 2 <= int(a) <= N})
    if any(int(a) < 1 for a in A):
        raise InputError("starting points must be positive integers")
    if not cuts:
        warnings.warn(f"no starting points in 2..{N}; the partition is a single block", RuntimeWarning, stacklevel=2)
    starts = [1] + cuts
    ends = cuts + [N + 1]
    return PartitionSigmaAlgebra([range(s - 1, e - 1) for s, e in zip(starts, ends)], N)


def H_A_subspace(space: DiscreteProbabilitySpace, A: Sequence[int], N: int | None = None) -> Subspace:
    """Block-constant vectors of ``part(A)``, vanishing on the first run if ``1 not in A``."""
    N = space.N if N is None else N
    if N != space.N:
        raise InputError("truncation does not match the space")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        alg = part_from_starting_points(A, N)
    blocks = alg.blocks if 1 in {int(a) for a in A} else alg.blocks[1:]
    u = np.zeros((N, len(blocks)))
    for j, b in enumerate(blocks):
        u[list(b), j] = 1.0 / math.sqrt(math.fsum(space.p[list(b)]))
    return Subspace(space.space, u, check=False)


def tail_indicator(N: int, k: int) -> np.ndarray:
    """``f_k``, the indicator of ``{k, ..., N}`` (``k`` 1-based)."""
    f = np.zeros(N)
    f[k - 1:] = 1.0
    return f


def alternating_sets(n: int, N: int) -> list[list[int]]:
    """Split ``{2..N}`` into ``n`` sets by residue, so consecutive points differ in set."""
    return [list(range(2 + i, N + 1, n)) for i in range(n)]


@dataclass
class TailReport:
    """Tail quantities of a truncated sequence; index ``k`` of each list is ``k + 1``."""

    N: int
    r: np.ndarray
    ratio_series: np.ndarray
    sup_ratio: float
    rk_over_pk: np.ndarray
    pk_ratio: np.ndarray
    step: int | None = None
    step_sup: float | None = None
    note: str = ""


def _tails(p):
    return np.cumsum(p[::-1])[::-1]


def tail_report(space: DiscreteProbabilitySpace, step: int | None = None) -> TailReport:
    """Tail sums ``r_k`` and the ratios entering the tail criteria.

    ``ratio_series[k-1] = r_{k+1} / r_k`` for ``k <= N-1``; ``sup_ratio`` is
    its maximum.  With ``step`` given, ``step_sup`` is
    ``max p_{k+step} / p_k``.  Under the ``"lump"`` policy the last atom's mass
    is a tail, not a term, so the ``p``-ratios stop before it.
    """
    N = space.N
    if N < 2:
        raise InputError("tail diagnostics need at least two atoms")
    p = space.p
    r = _tails(p)
    ratio = r[1:] / r[:-1]
    terms = p[:-1] if space.truncation == "lump" else p
    out = TailReport(
        N=N,
        r=r,
        ratio_series=ratio,
        sup_ratio=float(ratio.max()),
        rk_over_pk=r[: terms.size] / terms,
        pk_ratio=terms[1:] / terms[:-1],
        note=f"finite truncation at N={N} ({space.truncation or 'explicit'} masses); diagnostics only",
    )
    if step is not None:
        step = int(step)
        if step < 1 or step >= terms.size:
            raise InputError(f"step must lie in 1..{terms.size - 1}")
        out.step = step
        out.step_sup = float((terms[step:] / terms[:-step]).max())
    return out


def tail_predicates(space: DiscreteProbabilitySpace, rtol: float = 0.05, max_step: int | None = None) -> dict:
    """Finite-prefix readings of three equivalent tail conditions.

    1. ``sup r_{k+1}/r_k < 1``;
    2. ``r_k / p_k`` bounded;
    3. ``p_{k+1}/p_k`` bounded and ``sup p_{k+m}/p_k < 1`` for some step ``m``.

    A supremum is read as bounded (or a gap below 1 as positive) when doubling
    the prefix changes it by at most ``rtol``.  This is a heuristic on a
    truncation, not a proof about the infinite sequence.
    """
    rep = tail_report(space)
    half = lambda a: a[: max(1, a.size // 2)]

    def stable_max(a):
        return a.max() <= (1 + rtol) * half(a).max()

    def stable_gap(a):
        return a.max() < 1 and (1 - a.max()) * (1 + rtol) >= 1 - half(a).max()

    p1 = bool(stable_gap(rep.ratio_series))
    p2 = bool(stable_max(rep.rk_over_pk))
    terms = space.p[:-1] if space.truncation == "lump" else space.p
    bounded = stable_max(rep.pk_ratio)
    max_step = max(1, terms.size // 4) if max_step is None else max_step
    witness = None
    for m in range(1, max_step + 1):
        seq = terms[m:] / terms[:-m]
        if seq.size >= 2 and stable_gap(seq):
            witness = m
            break
    p3 = bool(bounded and witness is not None)
    return {"ratio_gap": p1, "rk_over_pk_bounded": p2, "step_contraction": p3, "step": witness, "N": space.N}


@dataclass
class ShiftDiagnostic:
    N: int
    identity_residual: float
    shift_norm: float
    power: int
    power_norm: float
    riesz_epsilon: float
    riesz_C: float


def weighted_shift(space: DiscreteProbabilitySpace) -> np.ndarray:
    """Truncated weighted shift ``e_k -> sqrt(p_{k+1}/p_k) e_{k+1}`` in the basis ``e_k = 1_{k}/sqrt(p_k)``."""
    p = space.p
    return np.diag(np.sqrt(p[1:] / p[:-1]), -1)


def weighted_shift_check(space: DiscreteProbabilitySpace, m: int = 1) -> ShiftDiagnostic:
    """Check ``(I - S)(f_k / sqrt(p_k)) = e_k`` for every ``k`` and report norms.

    In the basis ``e_k`` the vector ``f_k / sqrt(p_k)`` has entries
    ``sqrt(p_j / p_k)`` for ``j >= k``.  The identity telescopes exactly on the
    truncation, where ``S`` is nilpotent.
    """
    N = space.N
    if N < 2:
        raise InputError("the shift check needs at least two atoms")
    p = space.p
    s = weighted_shift(space)
    sq = np.sqrt(p)
    coords = np.tril(sq[:, None] / sq[None, :])
    resid = float(np.abs((np.eye(N) - s) @ coords - np.eye(N)).max())
    fam = VectorFamily(space.space, space.space.unwhiten(coords))
    eps, cc = riesz_bounds(fam)
    return ShiftDiagnostic(
        N=N,
        identity_residual=resid,
        shift_norm=float(np.linalg.norm(s, 2)),
        power=m,
        power_norm=float(np.linalg.norm(np.linalg.matrix_power(s, m), 2)),
        riesz_epsilon=eps,
        riesz_C=cc,
    )


# -- measure families and the truncation sweep -------------------------------

@dataclass(frozen=True)
class MeasureFamily:
    """``kind`` is ``geometric`` (param ``q``), ``power`` (param ``s``) or ``explicit`` (param ``p``)."""

    kind: str
    params: dict = field(default_factory=dict)
    truncation: str = "lump"

    def space(self, N: int | None = None) -> DiscreteProbabilitySpace:
        if self.kind == "geometric":
            return DiscreteProbabilitySpace.geometric(float(self.params["q"]), int(N), self.truncation)
        if self.kind == "power":
            return DiscreteProbabilitySpace.power(float(self.params.get("s", 2.0)), int(N), self.truncation)
        if self.kind == "explicit":
            p = self.params["p"]
            if N is not None and int(N) != len(p):
                raise InputError("explicit masses fix N")
            return DiscreteProbabilitySpace(p)
        raise InputError(f"unknown measure family {self.kind!r}")


def starting_point_system(space: DiscreteProbabilitySpace, sets: Sequence[Sequence[int]]) -> SubspaceSystem:
    algs = [part_from_starting_points(A, space.N) for A in sets]
    return marginal_system(space, algs)


@dataclass(frozen=True)
class SweepRow:
    N: int
    c_N: float
    sup_ratio: float
    imp: bool


def imp_sweep(family: MeasureFamily, Ns: Sequence[int], n: int = 2, tol: Tolerance = DEFAULT_TOL) -> list[SweepRow]:
    """Truncated IBAP constant of the ``L^2_0`` system for alternating starting points.

    Values are convergence diagnostics at each ``N``, not statements about
    the infinite space.
    """
    rows = []
    for N in Ns:
        space = family.space(N)
        system = starting_point_system(space, alternating_sets(n, space.N))
        report = check_conditions(system, tol, witnesses=False)
        rows.append(SweepRow(space.N, float(report.c), tail_report(space).sup_ratio, report.ibap))
    return rows


# -- the example on an interval ----------------------------------------------

@dataclass
class IntervalReduction:
    """Atomization of an interval by the merged cut points ``a = b_1 < b_2 < ...``.

    Atom ``k`` stands for ``[b_k, b_{k+1})`` (the last one for ``[b_N, b)``).
    ``sets[i]`` is ``A_i = {k : b_k in pi_i}`` (1-based), ``algebras[i]`` the
    corresponding partition.  When two sequences share a point the IMP fails;
    then ``overlap = (i, j, c)`` and ``witness`` is a nonzero zero-mean vector
    measurable for both algebras.
    """

    space: DiscreteProbabilitySpace
    points: tuple
    sets: list
    algebras: list
    overlap: tuple | None = None
    witness: np.ndarray | None = None
    report: ConditionReport | None = None

    @property
    def imp(self) -> bool:
        return self.overlap is None and self.report is not None and self.report.ibap


def interval_reduction(pis: Sequence[Sequence[float]], masses: Sequence[float], a: float = 0.0,
                       tol: Tolerance = DEFAULT_TOL, analyze: bool = True) -> IntervalReduction:
    """Reduce interval partitions to starting-point partitions of ``{1..N}``.

    ``pis[i]`` are the increasing cut points of the ``i``-th partition, all
    greater than ``a``.  ``masses[k]`` is the measure of the ``k``-th cell of
    the merged cut sequence, including the first cell ``[a, b_2)``.
    """
    seqs = []
    for i, pi in enumerate(pis):
        s = [float(x) for x in pi]
        if any(x <= a for x in s) or any(y <= x for x, y in zip(s, s[1:])):
            raise InputError(f"pis[{i}] must be strictly increasing and greater than a")
        seqs.append(s)
    points = tuple([float(a)] + sorted(set(x for s in seqs for x in s)))
    masses = np.asarray(masses, dtype=float)
    if masses.shape != (len(points),):
        raise InputError(f"expected {len(points)} cell masses, got {masses.size}")
    if np.any(masses <= 0):
        k = int(np.argmin(masses > 0))
        raise InputError(f"cell [{points[k]}, ...) has nonpositive mass {masses[k]}")
    space = DiscreteProbabilitySpace(masses)
    index = {b: k + 1 for k, b in enumerate(points)}
    sets = [sorted(index[x] for x in s) for s in seqs]
    N = len(points)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        algs = [part_from_starting_points(A, N) for A in sets]
    for i in range(len(seqs)):
        for j in range(i + 1, len(seqs)):
            common = sorted(set(seqs[i]) & set(seqs[j]))
            if common:
                c = common[0]
                m = index[c]
                tail = math.fsum(masses[m - 1:])
                f = np.where(np.arange(1, N + 1) < m, tail, -(1.0 - tail))
                return IntervalReduction(space, points, sets, algs, overlap=(i, j, c), witness=f)
    report = imp_check(space, algs, tol) if analyze else None
    return IntervalReduction(space, points, sets, algs, report=report)


# -- the product-density sufficient condition ---------------------------------

def joint_space(table) -> tuple[DiscreteProbabilitySpace, list[PartitionSigmaAlgebra]]:
    """Atoms are the cells of an ``n``-dimensional joint mass table with positive mass.

    Returns the space and the ``n`` coordinate partitions.
    """
    t = np.asarray(table, dtype=float)
    cells = np.argwhere(t > 0)
    if np.any(t < 0):
        raise InputError("joint masses must be nonnegative")
    space = DiscreteProbabilitySpace(t[tuple(cells.T)])
    algs = [PartitionSigmaAlgebra.from_labels(cells[:, d]) for d in range(t.ndim)]
    return space, algs


def product_space(marginals: Sequence[Sequence[float]]):
    """Independent product of marginal distributions with its coordinate partitions."""
    t = np.ones(())
    for m in marginals:
        t = np.multiply.outer(t, np.asarray(m, dtype=float))
    return joint_space(t)


def _cell_table(space, algs):
    shape = tuple(a.n_blocks for a in algs)
    t = np.zeros(shape)
    np.add.at(t, tuple(a.labels for a in algs), space.p)
    return t


def _outer_marginals(space, algs):
    out = np.ones(())
    for a in algs:
        out = np.multiply.outer(out, a.block_masses(space))
    return out


def bickel_alpha(space: DiscreteProbabilitySpace, algs: Sequence[PartitionSigmaAlgebra]) -> float:
    """Largest ``alpha`` with ``mu(A_1 & ... & A_n) >= alpha mu(A_1) ... mu(A_n)``.

    Every ``A_i`` in a partition algebra is a union of blocks, and both sides
    are additive over tuples of blocks: ``mu(A_1 & ... & A_n)`` is the sum of
    cell masses ``mu(a_1 & ... & a_n)`` over block tuples with ``a_i`` in
    ``A_i``, and ``prod mu(A_i)`` the sum of ``prod mu(a_i)`` over the same
    tuples.  A sum of terms each at least ``alpha`` times its counterpart is at
    least ``alpha`` times the counterpart sum, so the cellwise minimum ratio is
    the infimum over all measurable tuples (and it is attained by cells).
    """
    for a in algs:
        _check(space, a)
    if not algs:
        raise InputError("need at least one sigma-algebra")
    return float((_cell_table(space, algs) / _outer_marginals(space, algs)).min())


def bickel_solve(space: DiscreteProbabilitySpace, algs: Sequence[PartitionSigmaAlgebra], xis) -> np.ndarray:
    """Explicit IMP solution ``a + h (sum_k (xi_k - a))`` under the product-density condition.

    On the diagonal the density of the product of marginals with respect to
    the joint law is ``h(w) = prod_i mu(a_i(w)) / mu(a_1(w) & ... & a_n(w))``,
    bounded by ``1 / alpha``.
    """
    if len(xis) != len(algs):
        raise InputError(f"expected {len(algs)} random variables, got {len(xis)}")
    xis = [_rv(space, x, f"xis[{k}]") for k, x in enumerate(xis)]
    for k, (alg, x) in enumerate(zip(algs, xis)):
        _check(space, alg)
        if not alg.is_measurable(x, 1e-10):
            raise InputError(f"xis[{k}] is not measurable with respect to its sigma-algebra")
    alpha = bickel_alpha(space, algs)
    if alpha <= 0:
        raise RefusalError(
            "bickel_solve: alpha = 0, the product-density condition fails (the IMP may still hold)",
            alpha=alpha,
        )
    a = _common_mean(space, xis, "bickel_solve")
    idx = tuple(al.labels for al in algs)
    h = _outer_marginals(space, algs)[idx] / _cell_table(space, algs)[idx]
    return a + h * sum(x - a for x in xis)
