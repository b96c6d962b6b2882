"""Subspaces of a finite-dimensional space with a diagonal inner product.

Every subspace is stored through an orthonormal basis.  All spectral work
happens in *whitened* coordinates ``q = W^{1/2} x``, where the weighted inner
product ``<x, y> = y^H W x`` becomes the Euclidean one, so that standard SVD
and eigenvalue routines apply without generalized eigenproblems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InputError

__all__ = [
    "INF",
    "Unbounded",
    "InnerProduct",
    "Tolerance",
    "Subspace",
    "orthonormalize",
    "kernel",
    "projector",
    "complement",
    "subspace_sum",
    "intersect",
    "opening",
    "inclination",
    "full_space",
    "zero_subspace",
]


class Unbounded:
    """The value ``+inf`` used where a quantity is defined as infinite.

    Kept distinct from ``float('inf')`` so that a convention (for example the
    inclination of the zero subspace) can never be confused with overflow.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __float__(self):
        return math.inf

    def __reduce__(self):
        return (Unbounded, ())

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("ibap.INF")

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True


INF = Unbounded()


def _as_float(value) -> float:
    return math.inf if value is INF else float(value)


@dataclass(frozen=True)
class Tolerance:
    """Numerical tolerance policy.

    A singular value ``s`` of a matrix with largest singular value ``smax``
    counts as nonzero iff ``s > rel * max(smax, 1)``.  ``band`` is the factor
    around a threshold inside which a decision is flagged as borderline.
    """

    rel: float = 1e-10
    band: float = 100.0

    def __post_init__(self):
        if not (self.rel > 0 and math.isfinite(self.rel)):
            raise InputError(f"tolerance must be a positive finite number, got {self.rel!r}")
        if self.band < 1:
            raise InputError("band factor must be >= 1")

    def threshold(self, smax: float) -> float:
        return self.rel * max(float(smax), 1.0)

    def rank(self, s: np.ndarray, record: list | None = None) -> int:
        """Numerical rank of a matrix given its singular values ``s``.

        When ``record`` is a list, the decision's closest call is appended as
        ``(sigma, threshold)``: the singular value nearest to the cut, on a
        log scale.
        """
        s = np.asarray(s, dtype=float)
        if s.size == 0:
            return 0
        t = self.threshold(s.max())
        r = int(np.count_nonzero(s > t))
        if record is not None:
            nearest = s[np.argmin(np.abs(np.log(np.maximum(s, 1e-300) / t)))]
            record.append((float(nearest), t))
        return r

    def in_band(self, value: float, threshold: float) -> bool:
        if value is INF or threshold <= 0:
            return False
        return threshold / self.band < value < threshold * self.band


DEFAULT_TOL = Tolerance()


class InnerProduct:
    """Diagonal inner product ``<x, y> = sum_k w_k x_k conj(y_k)`` on ``K^dim``."""

    __slots__ = ("dim", "weights", "sqrt_w")

    def __init__(self, dim: int, weights: Sequence[float] | None = None):
        dim = int(dim)
        if dim < 1:
            raise InputError(f"dimension must be positive, got {dim}")
        if weights is None:
            w = np.ones(dim)
        else:
            w = np.asarray(weights, dtype=float).reshape(-1)
            if w.shape != (dim,):
                raise InputError(f"weights: expected {dim} entries, got {w.size}")
            if not np.all(np.isfinite(w)) or np.any(w <= 0):
                raise InputError("weights must be finite and strictly positive")
        w = w.copy()
        w.setflags(write=False)
        s = np.sqrt(w)
        s.setflags(write=False)
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "sqrt_w", s)

    def __setattr__(self, name, value):
        raise AttributeError("InnerProduct is immutable")

    @property
    def is_identity(self) -> bool:
        return bool(np.all(self.weights == 1.0))

    def __eq__(self, other):
        return (
            isinstance(other, InnerProduct)
            and other.dim == self.dim
            and np.array_equal(other.weights, self.weights)
        )

    def __hash__(self):
        return hash((self.dim, self.weights.tobytes()))

    def __repr__(self):
        if self.is_identity:
            return f"InnerProduct(dim={self.dim})"
        return f"InnerProduct(dim={self.dim}, weights={self.weights.tolist()})"

    def whiten(self, x: np.ndarray) -> np.ndarray:
        """Map vectors (rows = coordinates) to Euclidean coordinates."""
        x = np.asarray(x)
        return x * (self.sqrt_w[:, None] if x.ndim == 2 else self.sqrt_w)

    def unwhiten(self, q: np.ndarray) -> np.ndarray:
        q = np.asarray(q)
        return q / (self.sqrt_w[:, None] if q.ndim == 2 else self.sqrt_w)

    def inner(self, x, y):
        return np.vdot(self.whiten(y), self.whiten(x))

    def norm(self, x) -> float:
        return float(np.linalg.norm(self.whiten(np.asarray(x))))

    def gram(self, x) -> np.ndarray:
        """``x^H W x`` for a matrix of column vectors."""
        q = self.whiten(np.asarray(x))
        return q.conj().T @ q

    def operator_norm(self, a: np.ndarray) -> float:
        """Operator norm of a linear map of the space, measured in this metric."""
        a = np.asarray(a)
        return float(np.linalg.norm(self.sqrt_w[:, None] * a / self.sqrt_w[None, :], 2))

    def padded(self, extra: int) -> "InnerProduct":
        """The same metric on ``K^(dim + extra)`` with unit weights appended."""
        return InnerProduct(self.dim + extra, np.concatenate([self.weights, np.ones(extra)]))


def _check_space(space):
    if not isinstance(space, InnerProduct):
        raise InputError(f"expected an InnerProduct, got {type(space).__name__}")


class Subspace:
    """A subspace given by a basis orthonormal in its space's inner product.

    ``basis`` holds the vectors in original coordinates; ``q`` the same basis
    whitened, which has Euclidean-orthonormal columns.  Zero-dimensional
    subspaces have a ``dim x 0`` basis.
    """

    __slots__ = ("space", "basis", "q")

    def __init__(self, space: InnerProduct, basis, *, check: bool = True, _q=None):
        _check_space(space)
        b = np.asarray(basis)
        if b.ndim == 1:
            b = b.reshape(-1, 1)
        if b.size == 0:
            b = np.zeros((space.dim, 0), dtype=b.dtype if b.dtype.kind == "c" else float)
        if b.ndim != 2 or b.shape[0] != space.dim:
            raise InputError(f"basis must have {space.dim} rows, got shape {b.shape}")
        if b.dtype.kind not in "fc":
            b = b.astype(float)
        b = b.copy()
        q = space.whiten(b) if _q is None else np.array(_q, copy=True)
        if b.shape[1] > space.dim:
            raise InputError("more basis vectors than the ambient dimension")
        if check and b.shape[1]:
            err = np.linalg.norm(q.conj().T @ q - np.eye(b.shape[1]), 2)
            if err > 1e-8:
                raise InputError(f"basis is not orthonormal in the inner product (error {err:.2e})")
        b.setflags(write=False)
        q.setflags(write=False)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "basis", b)
        object.__setattr__(self, "q", q)

    def __setattr__(self, name, value):
        raise AttributeError("Subspace is immutable")

    @classmethod
    def from_whitened(cls, space: InnerProduct, q) -> "Subspace":
        q = np.asarray(q)
        if q.ndim == 1:
            q = q.reshape(-1, 1)
        if q.size == 0:
            q = np.zeros((space.dim, 0), dtype=q.dtype if q.dtype.kind == "c" else float)
        return cls(space, space.unwhiten(q), check=False, _q=q)

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    @property
    def dim(self) -> int:
        return self.space.dim

    def __repr__(self):
        return f"Subspace(rank={self.rank}, dim={self.dim})"

    def __eq__(self, other):
        return (
            isinstance(other, Subspace)
            and other.space == self.space
            and np.array_equal(other.basis, self.basis)
        )

    __hash__ = None

    def contains(self, x, tol: float = 1e-9) -> bool:
        """Whether every column of ``x`` lies in the subspace (relative residual)."""
        qx = self.space.whiten(np.asarray(x).reshape(self.dim, -1))
        res = qx - self.q @ (self.q.conj().T @ qx)
        scale = max(float(np.linalg.norm(qx)), 1.0)
        return float(np.linalg.norm(res)) <= tol * scale

    def coordinates(self, x) -> np.ndarray:
        """Coordinates of the orthogonal projection of ``x`` in this basis."""
        return self.q.conj().T @ self.space.whiten(np.asarray(x))

    def padded(self, extra: int) -> "Subspace":
        """Embed into ``K^(dim + extra)`` by appending zero coordinates."""
        z = np.zeros((extra, self.rank), dtype=self.basis.dtype)
        return Subspace(self.space.padded(extra), np.vstack([self.basis, z]), check=False)


def _same_space(subspaces):
    spaces = [s.space for s in subspaces]
    if not spaces:
        raise InputError("at least one subspace is required")
    first = spaces[0]
    for s in spaces[1:]:
        if s != first:
            raise InputError("subspaces live in different inner-product spaces")
    return first


def _orth_whitened(q: np.ndarray, tol: Tolerance, record=None) -> np.ndarray:
    """Orthonormal basis of the column span of ``q`` (Euclidean)."""
    if q.shape[1] == 0:
        return q[:, :0]
    u, s, _ = np.linalg.svd(q, full_matrices=False)
    r = tol.rank(s, record)
    return u[:, :r]


def zero_subspace(space: InnerProduct) -> Subspace:
    return Subspace(space, np.zeros((space.dim, 0)), check=False)


def full_space(space: InnerProduct) -> Subspace:
    return Subspace(space, np.diag(1.0 / space.sqrt_w), check=False, _q=np.eye(space.dim))


def orthonormalize(vectors, space: InnerProduct, tol: Tolerance = DEFAULT_TOL, record=None) -> Subspace:
    """Subspace spanned by the columns of ``vectors``.

    Columns that are already orthonormal in the inner product are kept
    verbatim; otherwise an SVD of the whitened matrix gives the basis and the
    numerical rank.
    """
    _check_space(space)
    v = np.asarray(vectors)
    if v.ndim == 1:
        v = v.reshape(-1, 1)
    if v.size == 0:
        if v.ndim == 2 and v.shape[0] not in (0, space.dim):
            raise InputError(f"vectors must have {space.dim} rows, got {v.shape[0]}")
        return zero_subspace(space)
    if v.ndim != 2 or v.shape[0] != space.dim:
        raise InputError(f"vectors must have {space.dim} rows, got shape {v.shape}")
    if v.dtype.kind not in "fc":
        v = v.astype(float)
    if not np.all(np.isfinite(v)):
        raise InputError("vectors contain non-finite entries")
    qv = space.whiten(v)
    if v.shape[1] <= space.dim:
        gram = qv.conj().T @ qv
        if np.linalg.norm(gram - np.eye(v.shape[1]), 2) <= 1e-13:
            return Subspace(space, v, check=False, _q=qv)
    return Subspace.from_whitened(space, _orth_whitened(qv, tol, record))


def kernel(matrix, space: InnerProduct, tol: Tolerance = DEFAULT_TOL, record=None) -> Subspace:
    """Numerical null space ``{x : M x = 0}`` as a subspace of ``space``."""
    _check_space(space)
    m = np.asarray(matrix)
    if m.ndim != 2 or m.shape[1] != space.dim:
        raise InputError(f"matrix must have {space.dim} columns, got shape {m.shape}")
    if m.shape[0] == 0:
        return full_space(space)
    mw = m / space.sqrt_w[None, :]
    _, s, vh = np.linalg.svd(mw, full_matrices=True)
    r = tol.rank(s, record)
    return Subspace.from_whitened(space, vh[r:].conj().T)


def projector(s: Subspace) -> np.ndarray:
    """Orthogonal projector ``B B^H W`` onto ``s`` in original coordinates."""
    return (s.basis @ s.basis.conj().T) * s.space.weights[None, :]


def whitened_projector(s: Subspace) -> np.ndarray:
    return s.q @ s.q.conj().T


def complement(s: Subspace, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    """Orthogonal complement in the weighted inner product."""
    d, r = s.dim, s.rank
    if r == 0:
        return full_space(s.space)
    if r == d:
        return zero_subspace(s.space)
    u, _, _ = np.linalg.svd(s.q, full_matrices=True)
    return Subspace.from_whitened(s.space, u[:, r:])


def subspace_sum(subspaces: Sequence[Subspace], tol: Tolerance = DEFAULT_TOL, record=None) -> Subspace:
    """``H_1 + ... + H_n``."""
    space = _same_space(subspaces)
    q = np.hstack([s.q for s in subspaces])
    return Subspace.from_whitened(space, _orth_whitened(q, tol, record))


def intersect(subspaces: Sequence[Subspace], tol: Tolerance = DEFAULT_TOL, record=None, space=None) -> Subspace:
    """Intersection, computed as the complement of the sum of complements.

    An empty list denotes the intersection over no sets, the whole space;
    ``space`` must then be given.
    """
    if not subspaces:
        if space is None:
            raise InputError("intersection of no subspaces needs the ambient space")
        return full_space(space)
    space = _same_space(subspaces)
    comps = [complement(s, tol) for s in subspaces]
    return complement(subspace_sum(comps, tol, record), tol)


def opening(m: Subspace, n: Subspace) -> float:
    """Gap ``||P_M - P_N||`` in the weighted operator norm."""
    _same_space([m, n])
    diff = whitened_projector(m) - whitened_projector(n)
    if diff.size == 0:
        return 0.0
    return float(min(np.linalg.norm(diff, 2), 1.0))


def inclination(y: Subspace, z: Subspace):
    """Inclination of ``y`` to ``z``: least distance from a unit vector of ``y`` to ``z``.

    Returns :data:`INF` when ``y`` is the zero subspace.
    """
    _same_space([y, z])
    if y.rank == 0:
        return INF
    resid = y.q - z.q @ (z.q.conj().T @ y.q)
    s = np.linalg.svd(resid, compute_uv=False)
    return float(s[-1]) if s.size == y.rank else 0.0
