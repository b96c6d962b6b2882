"""Riesz bounds of finite vector families.

For a finite family the tight constants in
``eps ||a|| <= ||sum a_k v_k|| <= C ||a||`` are the extreme singular values of
the matrix of the vectors (whitened for a weighted inner product).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .analysis import SubspaceSystem, _require_ibap
from .errors import InputError, RefusalError
from .subspace import DEFAULT_TOL, InnerProduct, Tolerance


class VectorFamily:
    """Columns ``v_1, ..., v_m`` of a matrix, with optional labels."""

    __slots__ = ("space", "vectors", "labels")

    def __init__(self, space: InnerProduct, vectors, labels: Sequence | None = None):
        v = np.array(vectors)
        if v.ndim == 1:
            v = v.reshape(-1, 1)
        if v.ndim != 2 or v.shape[0] != space.dim:
            raise InputError(f"family vectors must have {space.dim} rows, got shape {v.shape}")
        if v.dtype.kind not in "fc":
            v = v.astype(float)
        labels = tuple(range(v.shape[1])) if labels is None else tuple(labels)
        if len(labels) != v.shape[1]:
            raise InputError("one label per vector is required")
        v.setflags(write=False)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "vectors", v)
        object.__setattr__(self, "labels", labels)

    def __setattr__(self, name, value):
        raise AttributeError("VectorFamily is immutable")

    def __len__(self):
        return self.vectors.shape[1]

    def __repr__(self):
        return f"VectorFamily(m={len(self)}, dim={self.space.dim})"

    def whitened(self) -> np.ndarray:
        return self.space.whiten(self.vectors)


def _bounds(q: np.ndarray) -> tuple[float, float]:
    s = np.linalg.svd(q, compute_uv=False)
    eps = float(s[-1]) if q.shape[1] <= q.shape[0] else 0.0
    return eps, float(s[0])


def riesz_bounds(family: VectorFamily) -> tuple[float, float]:
    """Tight Riesz constants ``(eps, C)``: least and largest singular values."""
    if len(family) == 0:
        raise InputError("riesz_bounds needs a nonempty family")
    return _bounds(family.whitened())


def concatenate(families: Sequence[VectorFamily]) -> VectorFamily:
    if not families:
        raise InputError("no families given")
    space = families[0].space
    if any(f.space != space for f in families):
        raise InputError("families live in different spaces")
    labels = [(i, lab) for i, f in enumerate(families) for lab in f.labels]
    return VectorFamily(space, np.hstack([f.vectors for f in families]), labels)


def _check_inside(system: SubspaceSystem, families, tol=1e-9):
    if len(families) != system.n:
        raise InputError(f"expected {system.n} families, got {len(families)}")
    for k, (h, f) in enumerate(zip(system, families)):
        if f.space != system.space:
            raise InputError(f"family {k} lives in a different space")
        if len(f) and not h.contains(f.vectors, tol):
            raise InputError(f"family {k} is not contained in subspace {k}")


def combine_families(system: SubspaceSystem, families: Sequence[VectorFamily], tol: Tolerance = DEFAULT_TOL):
    """Union of Riesz families, one inside each ``H_i``, with predicted bounds.

    Returns ``(family, predicted_eps, predicted_C)`` where
    ``predicted_eps = c min_i eps_i`` and ``predicted_C = sqrt(sum_i C_i^2)``.
    """
    _check_inside(system, families)
    c = _require_ibap(system, tol, "combine_families")
    nonempty = [f for f in families if len(f)]
    if not nonempty:
        raise InputError("all families are empty")
    bounds = [riesz_bounds(f) for f in nonempty]
    pred_eps = float(c) * min(e for e, _ in bounds)
    pred_c = float(np.sqrt(sum(cc * cc for _, cc in bounds)))
    return concatenate(list(families)), pred_eps, pred_c


@dataclass(frozen=True)
class FamilyVerdict:
    ibap: bool
    epsilon: float
    C: float
    lower_bound: float


def ibap_from_families(system: SubspaceSystem, families: Sequence[VectorFamily], tol: Tolerance = DEFAULT_TOL) -> FamilyVerdict:
    """Decide the IBAP from spanning Riesz families, one per subspace.

    If the combined family is a Riesz family (``eps`` above the rank cut),
    the system has the IBAP with ``c >= eps / C``.  Each family must span its
    subspace and be linearly independent: a redundant family has ``eps = 0``
    and cannot be Riesz, so it is refused (orthonormalize it first).
    """
    _check_inside(system, families)
    for k, (h, f) in enumerate(zip(system, families)):
        if len(f) == 0:
            if h.rank:
                raise InputError(f"family {k} is empty but subspace {k} is not")
            continue
        q = f.whitened()
        rank = tol.rank(np.linalg.svd(q, compute_uv=False))
        if rank < h.rank:
            raise InputError(f"family {k} spans only {rank} of {h.rank} dimensions of subspace {k}")
        if len(f) > rank:
            raise RefusalError(
                f"family {k} is linearly dependent ({len(f)} vectors spanning {rank} dimensions); "
                "a Riesz family must be independent, orthonormalize it first",
                family=k,
            )
    combined = concatenate(list(families))
    if len(combined) == 0:
        return FamilyVerdict(True, float("inf"), 0.0, float("inf"))
    eps, cmax = riesz_bounds(combined)
    ok = eps > tol.threshold(cmax)
    return FamilyVerdict(ok, eps, cmax, eps / cmax if ok else 0.0)
