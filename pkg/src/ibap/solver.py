"""Solvers for the inverse best approximation problem ``P_k x = x_k``.

Targets are given by coordinates: ``coords[k]`` holds the coordinates of
``x_k`` in the orthonormal basis of ``H_k``, so the stacked vector ``b`` is
exactly the right-hand side of ``J x = b``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .analysis import SubspaceSystem, _complement_meet, build_gram, ibap_constant
from .errors import IllConditionedError, InputError, RefusalError
from .subspace import DEFAULT_TOL, INF, Tolerance, subspace_sum


@dataclass(frozen=True)
class TargetTuple:
    coords: tuple

    def __init__(self, coords: Sequence):
        vecs = []
        for k, v in enumerate(coords):
            a = np.asarray(v)
            if a.ndim == 0:
                a = a.reshape(1)
            if a.ndim != 1:
                raise InputError(f"coords[{k}] must be a vector")
            if a.dtype.kind not in "fc":
                a = a.astype(float)
            a = a.copy()
            a.setflags(write=False)
            vecs.append(a)
        object.__setattr__(self, "coords", tuple(vecs))

    @classmethod
    def from_vectors(cls, system: SubspaceSystem, xs: Sequence) -> "TargetTuple":
        """Targets from ambient vectors ``x_k``, each projected onto ``H_k``."""
        return cls([s.coordinates(np.asarray(x)) for s, x in zip(system, xs)])

    def stacked(self) -> np.ndarray:
        if not self.coords:
            return np.zeros(0)
        return np.concatenate(self.coords)

    def check(self, system: SubspaceSystem) -> np.ndarray:
        if len(self.coords) != system.n:
            raise InputError(f"expected {system.n} target vectors, got {len(self.coords)}")
        for k, (v, r) in enumerate(zip(self.coords, system.ranks)):
            if v.shape[0] != r:
                raise InputError(f"coords[{k}] has length {v.shape[0]}, subspace {k} has rank {r}")
        return self.stacked()

    def vectors(self, system: SubspaceSystem) -> list[np.ndarray]:
        return [s.basis @ v for s, v in zip(system, self.coords)]


@dataclass
class Solution:
    x: np.ndarray
    residuals: tuple[float, ...]
    norm: float
    info: dict = field(default_factory=dict, compare=False)

    @property
    def max_residual(self) -> float:
        return max(self.residuals, default=0.0)


def residuals(system: SubspaceSystem, x: np.ndarray, targets: TargetTuple) -> tuple[float, ...]:
    """``||P_k x - x_k||`` for each ``k``."""
    return tuple(
        float(np.linalg.norm(s.coordinates(x) - t)) for s, t in zip(system, targets.coords)
    )


def _solution(system, qx, targets, **info):
    x = system.space.unwhiten(qx)
    return Solution(x, residuals(system, x, targets), float(np.linalg.norm(qx)), info)


def _refuse_unless_ibap(system, tol, what):
    gap = system.total_rank - subspace_sum(list(system), tol).rank
    c = ibap_constant(system) if system.total_rank else INF
    if gap > 0 or (c is not INF and c <= tol.rel * math.sqrt(system.n)):
        raise RefusalError(
            f"{what}: the system does not possess the IBAP (c={float(c):.3e}, li_dim_gap={gap})",
            c=c,
            li_dim_gap=gap,
        )
    return c, gap


def solve_exact(system: SubspaceSystem, targets: TargetTuple, tol: Tolerance = DEFAULT_TOL) -> Solution:
    """Minimum-norm ``x`` with ``P_k x = x_k``, computed as ``x = S G^{-1} b``."""
    b = targets.check(system)
    c, _ = _refuse_unless_ibap(system, tol, "solve_exact")
    st = system.whitened_summation_map()
    if st.shape[1] == 0:
        return _solution(system, np.zeros(system.dim), targets, c=c)
    g = build_gram(system).matrix
    ev = np.linalg.eigvalsh(g)
    lam_min = float(ev[0])
    if lam_min <= 0 or ev[-1] / lam_min > 1.0 / tol.rel**2:
        raise IllConditionedError(
            f"solve_exact: Gram operator too ill-conditioned (lambda_min={lam_min:.3e})",
            lambda_min_G=lam_min,
            c=c,
        )
    y = scipy.linalg.cho_solve(scipy.linalg.cho_factor(g), b)
    return _solution(system, st @ y, targets, c=c, lambda_min_G=lam_min)


def solve_approx(
    system: SubspaceSystem,
    targets: TargetTuple,
    eps: float,
    tol: Tolerance = DEFAULT_TOL,
    max_iter: int = 60,
) -> Solution:
    """``x`` with ``||P_k x - x_k|| <= eps`` for all ``k`` on a linearly independent system.

    Uses ``x = S (G + lam I)^{-1} b``, halving ``lam`` from ``||G|| 1e-4`` until
    the residual target is met.  ``info`` records ``lam`` and the iteration count.
    """
    if not (eps > 0 and math.isfinite(eps)):
        raise InputError(f"eps must be a positive real, got {eps!r}")
    b = targets.check(system)
    gap = system.total_rank - subspace_sum(list(system), tol).rank
    if gap > 0:
        raise RefusalError(
            f"solve_approx: subspaces are linearly dependent (li_dim_gap={gap}); "
            "cancelling targets admit no approximate solution",
            li_dim_gap=gap,
        )
    st = system.whitened_summation_map()
    if st.shape[1] == 0:
        return _solution(system, np.zeros(system.dim), targets, lam=0.0, iterations=0)
    g = build_gram(system).matrix
    eye = np.eye(g.shape[0])
    lam = float(np.linalg.norm(g, 2)) * 1e-4
    worst = math.inf
    for it in range(1, max_iter + 1):
        y = scipy.linalg.cho_solve(scipy.linalg.cho_factor(g + lam * eye), b)
        sol = _solution(system, st @ y, targets, lam=lam, iterations=it)
        worst = sol.max_residual
        if worst <= eps:
            return sol
        lam /= 2
    raise RefusalError(
        f"solve_approx: eps={eps:.3e} not reached in {max_iter} iterations (best residual {worst:.3e})",
        residual=worst,
        lam=lam,
    )


def solve_via_cond10(system: SubspaceSystem, targets: TargetTuple, tol: Tolerance = DEFAULT_TOL) -> Solution:
    """Solution assembled from pieces ``z_i`` orthogonal to every ``H_j``, ``j != i``.

    Each ``x_i`` splits as ``y_i + z_i`` with ``y_i`` in ``H_i^perp`` and
    ``z_i`` in the intersection of the other complements; then ``P_i z = x_i``
    for ``z = z_1 + ... + z_n``.  Not minimum-norm in general.
    """
    targets.check(system)
    c, _ = _refuse_unless_ibap(system, tol, "solve_via_cond10")
    pieces = []
    for i, (h, t) in enumerate(zip(system, targets.coords)):
        m = _complement_meet(system, i, tol)
        coef = h.q.conj().T @ m.q
        a = np.linalg.lstsq(coef, t, rcond=None)[0] if coef.size else np.zeros(m.rank)
        pieces.append(m.q @ a)
    qz = np.sum(pieces, axis=0) if pieces else np.zeros(system.dim)
    sol = _solution(system, qz, targets, c=c)
    sol.info["pieces"] = [system.space.unwhiten(p) for p in pieces]
    return sol
