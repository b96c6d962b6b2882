"""Subspace systems from operator spectra.

Eigenspaces ``ker(A - l_k I)`` and root subspaces ``ker(A - l_k I)^{m_k}`` for
distinct scalars always possess the IBAP.  The certificate is a family of
operators ``T_i = p_i(A) prod_{j != i} (A - l_j I)^{m_j}`` with
``T_1 + ... + T_n = I`` and ``T_i = 0`` on ``H_j`` for ``j != i``, built from a
Bezout identity ``sum_i p_i(l) prod_{j != i} (l - l_j)^{m_j} = 1``.  It gives
the inclination bound ``delta_i >= 1 / ||T_i||``.

Polynomials are coefficient lists in ascending powers.  For real scalars the
Bezout coefficients are computed in exact rational arithmetic from the binary
values of the inputs; complex scalars fall back to floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from .analysis import SubspaceSystem, orthogonal_model
from .errors import IllConditionedError, InputError
from .subspace import DEFAULT_TOL, InnerProduct, Subspace, Tolerance, kernel


def _separation_floor(lambdas) -> float:
    return 1e-3 * (1.0 + max(abs(l) for l in lambdas))


def _min_gap(lambdas) -> float:
    gaps = [abs(a - b) for i, a in enumerate(lambdas) for b in lambdas[i + 1:]]
    return min(gaps) if gaps else math.inf


def _check_distinct(lambdas):
    for i, a in enumerate(lambdas):
        for b in lambdas[i + 1:]:
            if a == b:
                raise InputError(f"scalars must be pairwise distinct, {a!r} repeats")


def _scalar(v):
    if isinstance(v, (complex, np.complexfloating)) and complex(v).imag != 0:
        return complex(v)
    return float(np.real(v))


class SpectralSpec:
    """Operator ``A`` with target scalars and multiplicities.

    Scalars closer than ``min_sep`` (default ``1e-3 (1 + max |l|)``) are
    rejected: distinctness is an exact notion and floating point needs a gap.
    """

    __slots__ = ("A", "lambdas", "mults", "space")

    def __init__(self, A, lambdas: Sequence, mults: Sequence[int] | None = None,
                 space: InnerProduct | None = None, min_sep: float | None = None):
        a = np.array(A, dtype=complex if np.iscomplexobj(A) else float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InputError(f"A must be square, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InputError("A contains non-finite entries")
        lams = tuple(_scalar(l) for l in lambdas)
        if not lams:
            raise InputError("need at least one scalar")
        mults = tuple(int(m) for m in (mults if mults is not None else [1] * len(lams)))
        if len(mults) != len(lams):
            raise InputError("lambdas and mults have different lengths")
        if any(m < 1 for m in mults):
            raise InputError("multiplicities must be positive integers")
        _check_distinct(lams)
        floor = _separation_floor(lams) if min_sep is None else float(min_sep)
        gap = _min_gap(lams)
        if gap < floor:
            raise InputError(f"scalars separated by {gap:.3e}, below the admission threshold {floor:.3e}")
        space = InnerProduct(a.shape[0]) if space is None else space
        if space.dim != a.shape[0]:
            raise InputError("A does not act on the given space")
        a.setflags(write=False)
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "lambdas", lams)
        object.__setattr__(self, "mults", mults)
        object.__setattr__(self, "space", space)

    def __setattr__(self, name, value):
        raise AttributeError("SpectralSpec is immutable")

    @property
    def n(self) -> int:
        return len(self.lambdas)

    @property
    def dim(self) -> int:
        return self.A.shape[0]


# -- polynomial helpers on coefficient lists (ascending powers) -------------

def _pmul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _ppow(a, m):
    out = [1]
    for _ in range(m):
        out = _pmul(out, a)
    return out


def _peval(a, x):
    acc = 0
    for c in reversed(a):
        acc = acc * x + c
    return acc


def _cofactor(lams, mults, i):
    """``prod_{j != i} (l - l_j)^{m_j}`` as a coefficient list."""
    q = [1]
    for j, (l, m) in enumerate(zip(lams, mults)):
        if j != i:
            q = _pmul(q, _ppow([-l, 1], m))
    return q


def _taylor_shift(a, c):
    """Coefficients of ``a(x)`` in powers of ``(x - c)``."""
    a = list(a)
    n = len(a)
    for k in range(n):
        for j in range(n - 2, k - 1, -1):
            a[j] += c * a[j + 1]
    return a


def _solve_square(m, rhs):
    """Gaussian elimination with partial pivoting on a list-of-lists matrix."""
    n = len(rhs)
    aug = [list(row) + [r] for row, r in zip(m, rhs)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(aug[r][col]))
        if aug[piv][col] == 0:
            raise IllConditionedError("Bezout system is singular")
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        for r in range(col + 1, n):
            f = aug[r][col] / p
            if f:
                for k in range(col, n + 1):
                    aug[r][k] -= f * aug[col][k]
    x = [0] * n
    for r in range(n - 1, -1, -1):
        s = aug[r][n] - sum(aug[r][k] * x[k] for k in range(r + 1, n))
        x[r] = s / aug[r][r]
    return x


@dataclass(frozen=True)
class BezoutCertificate:
    """Solution of ``sum_i p_i(l) prod_{j != i} (l - l_j)^{m_j} = 1``.

    ``polys[i]`` has degree at most ``m_i - 1``.  ``shifted[i]`` holds the
    coefficients of ``p_i(l) prod_{j != i} (l_i - l_j)^{m_j}`` in powers of
    ``(l - l_i)``, the form used to evaluate ``T_i`` stably.  ``residual`` is
    the largest deviation from 1 over ``grid``; it is computed exactly when
    ``exact`` is true.
    """

    lambdas: tuple
    mults: tuple
    polys: tuple
    shifted: tuple
    residual: float
    grid: tuple
    exact: bool

    def coefficients(self) -> list[np.ndarray]:
        dtype = float if self.exact else complex
        return [np.array([complex(c) if not self.exact else float(c) for c in p], dtype=dtype) for p in self.polys]


def bezout(lambdas: Sequence, mults: Sequence[int], tol: Tolerance = DEFAULT_TOL) -> BezoutCertificate:
    """Bezout polynomials by a square linear solve on the coefficients.

    Unknowns are the ``sum m_i`` coefficients of ``p_i`` (``deg p_i <= m_i - 1``);
    equations match the ``sum m_i`` coefficients of the left side against 1.
    """
    lams = tuple(_scalar(l) for l in lambdas)
    mults = tuple(int(m) for m in mults)
    if len(lams) != len(mults) or not lams:
        raise InputError("lambdas and mults must be nonempty and of equal length")
    if any(m < 1 for m in mults):
        raise InputError("multiplicities must be positive integers")
    _check_distinct(lams)
    exact = all(isinstance(l, float) for l in lams)
    vals = [Fraction(l) for l in lams] if exact else [complex(l) for l in lams]
    total = sum(mults)
    cofs = [_cofactor(vals, mults, i) for i in range(len(vals))]
    cols = []
    for i, m in enumerate(mults):
        for k in range(m):
            col = [0] * k + cofs[i]
            cols.append(col + [0] * (total - len(col)))
    matrix = [[cols[c][r] for c in range(total)] for r in range(total)]
    rhs = [1] + [0] * (total - 1)
    sol = _solve_square(matrix, rhs)
    polys, pos = [], 0
    for m in mults:
        polys.append(tuple(sol[pos:pos + m]))
        pos += m
    shifted = []
    for i, p in enumerate(polys):
        scale = _peval(cofs[i], vals[i])
        shifted.append(tuple(_taylor_shift([c * scale for c in p], vals[i])))

    lo = min(v.real if not exact else v for v in vals) - 1
    hi = max(v.real if not exact else v for v in vals) + 1
    grid = [lo + (hi - lo) * Fraction(k, total) if exact else lo + (hi - lo) * k / total for k in range(total + 1)]
    residual = max(
        abs(sum(_peval(p, x) * _peval(q, x) for p, q in zip(polys, cofs)) - 1) for x in grid
    )
    residual = float(residual)
    if not exact and residual > math.sqrt(tol.rel):
        raise IllConditionedError(f"Bezout identity holds only to {residual:.3e}", residual=residual)
    return BezoutCertificate(lams, mults, tuple(polys), tuple(shifted), residual, tuple(grid), exact)


# -- operators ----------------------------------------------------------------

def _shift(a, lam):
    return a - lam * np.eye(a.shape[0])


def _scale(spec) -> float:
    # a fixed reference size, so that A - l I that vanishes up to rounding stays negligible
    return max(float(np.linalg.norm(spec.A, 2)), max(abs(l) for l in spec.lambdas), 1.0)


def _scaled_power(m: np.ndarray, k: int, scale: float) -> np.ndarray:
    """``(M / scale)^k``; same kernel as ``M^k`` without overflow."""
    m = m / scale
    out = np.eye(m.shape[0], dtype=m.dtype)
    for _ in range(k):
        out = out @ m
    return out


def spectral_operators(spec: SpectralSpec, cert: BezoutCertificate | None = None) -> list[np.ndarray]:
    """The operators ``T_i`` in original coordinates.

    Evaluated as ``phat_i(A) prod_{j != i} ((A - l_j) / (l_i - l_j))^{m_j}`` with
    ``phat_i`` in powers of ``A - l_i``, which keeps every factor of moderate size.
    With all multiplicities 1 this is the Lagrange interpolation projector.
    """
    cert = bezout(spec.lambdas, spec.mults) if cert is None else cert
    a = spec.A
    dtype = np.result_type(a.dtype, *(np.asarray(l).dtype for l in spec.lambdas))
    eye = np.eye(spec.dim, dtype=dtype)
    ops = []
    for i, li in enumerate(spec.lambdas):
        coef = [complex(c) if not cert.exact else float(c) for c in cert.shifted[i]]
        d = _shift(a, li).astype(dtype)
        poly = np.zeros_like(eye)
        for c in reversed(coef):
            poly = poly @ d + c * eye
        t = poly
        for j, (lj, mj) in enumerate(zip(spec.lambdas, spec.mults)):
            if j != i:
                f = _shift(a, lj).astype(dtype) / (li - lj)
                for _ in range(mj):
                    t = t @ f
        ops.append(t)
    return ops


def eigenspace_system(spec: SpectralSpec, tol: Tolerance = DEFAULT_TOL) -> SubspaceSystem:
    """System of eigenspaces ``ker(A - l_k I)``; trivial eigenspaces are kept."""
    if any(m != 1 for m in spec.mults):
        raise InputError("eigenspace_system needs all multiplicities equal to 1")
    return SubspaceSystem(
        [kernel(_scaled_power(_shift(spec.A, l), 1, _scale(spec)), spec.space, tol) for l in spec.lambdas],
        spec.space,
    )


class RootDecomposition(NamedTuple):
    system: SubspaceSystem
    operators: list
    certificate: BezoutCertificate


def root_subspace_system(spec: SpectralSpec, tol: Tolerance = DEFAULT_TOL) -> RootDecomposition:
    """Root subspaces ``ker(A - l_k I)^{m_k}`` with their operators ``T_i``."""
    subs = [
        kernel(_scaled_power(_shift(spec.A, l), m, _scale(spec)), spec.space, tol)
        for l, m in zip(spec.lambdas, spec.mults)
    ]
    cert = bezout(spec.lambdas, spec.mults, tol)
    return RootDecomposition(SubspaceSystem(subs, spec.space), spectral_operators(spec, cert), cert)


def delta_lower_bounds(spec: SpectralSpec) -> list[float]:
    """``1 / ||T_i||`` in the operator norm of the space, for each ``i``."""
    return [1.0 / spec.space.operator_norm(t) for t in spectral_operators(spec)]


def synthesize_operator(system: SubspaceSystem, lambdas: Sequence, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Operator whose eigenspace for ``lambdas[k]`` is exactly ``H_k``.

    ``A = l_1 E_1 + ... + l_n E_n + l_{n+1} E_{n+1}`` with the oblique
    projections of the system and ``E_{n+1}`` the projection onto the
    complement of the sum.  ``l_{n+1} = max |l_k| + 1`` by convention.
    """
    lams = tuple(_scalar(l) for l in lambdas)
    if len(lams) != system.n:
        raise InputError(f"expected {system.n} scalars, got {len(lams)}")
    _check_distinct(lams)
    extra = max(abs(l) for l in lams) + 1.0
    es = orthogonal_model(system, tol).oblique_projections
    eye = np.eye(system.dim)
    rest = eye - sum(es)
    dtype = complex if any(isinstance(l, complex) for l in lams) else float
    a = np.zeros((system.dim, system.dim), dtype=np.result_type(dtype, *es))
    for l, e in zip(lams, es):
        a = a + l * e
    return a + extra * rest
