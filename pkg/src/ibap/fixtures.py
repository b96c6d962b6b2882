"""Seeded generators of subspace systems, perturbations and spectra.

Used by the test suite and by ``ibap generate``.  Every generator takes a
``numpy.random.Generator`` so results are reproducible from a seed.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.linalg

from .analysis import SubspaceSystem
from .subspace import InnerProduct, Subspace, orthonormalize


def rng_from(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_space(rng, dim: int, weighted: bool | None = None) -> InnerProduct:
    weighted = bool(rng.integers(2)) if weighted is None else weighted
    if not weighted:
        return InnerProduct(dim)
    return InnerProduct(dim, rng.uniform(0.25, 4.0, dim))


def random_subspace(rng, space: InnerProduct, rank: int, complex_: bool = False) -> Subspace:
    v = rng.standard_normal((space.dim, rank))
    if complex_:
        v = v + 1j * rng.standard_normal((space.dim, rank))
    return orthonormalize(v, space)


def random_system(rng, dim: int | None = None, n: int | None = None, ranks=None, weighted=None,
                  complex_: bool = False) -> SubspaceSystem:
    """Subspaces in general position; IBAP holds iff the ranks fit in ``dim``."""
    dim = int(rng.integers(1, 13)) if dim is None else dim
    n = int(rng.integers(1, 5)) if n is None else n
    if ranks is None:
        ranks = [int(rng.integers(0, min(dim, 4) + 1)) for _ in range(n)]
    space = random_space(rng, dim, weighted)
    return SubspaceSystem([random_subspace(rng, space, r, complex_) for r in ranks], space)


def random_ibap_system(rng, **kw) -> SubspaceSystem:
    """Random system with ``sum r_k <= dim`` and at least one nonzero subspace."""
    dim = kw.pop("dim", None) or int(rng.integers(2, 13))
    n = kw.pop("n", None) or int(rng.integers(1, 5))
    ranks = [0] * n
    budget = int(rng.integers(1, dim + 1))
    for _ in range(budget):
        ranks[int(rng.integers(n))] += 1
    return random_system(rng, dim, n, ranks, **kw)


def lines_at_angle(phi: float) -> SubspaceSystem:
    space = InnerProduct(2)
    u = Subspace(space, np.array([[1.0], [0.0]]))
    v = Subspace(space, np.array([[math.cos(phi)], [math.sin(phi)]]))
    return SubspaceSystem([u, v], space)


def near_dependent_pair(rng, dim: int, gap: float, weighted=None) -> SubspaceSystem:
    """Two lines whose IBAP constant is about ``gap`` (``c^2 = 1 - cos(angle)``)."""
    space = random_space(rng, dim, weighted)
    q, _ = np.linalg.qr(rng.standard_normal((dim, 2)))
    angle = 2 * math.asin(gap / math.sqrt(2)) if gap < 1 else math.pi / 2
    x = q[:, 0]
    y = math.cos(angle) * q[:, 0] + math.sin(angle) * q[:, 1]
    to = space.unwhiten
    return SubspaceSystem([Subspace(space, to(x)[:, None]), Subspace(space, to(y)[:, None])], space)


def near_dependent_system(rng, dim: int, ranks, gap: float, weighted=None) -> SubspaceSystem:
    """Subspaces in general position except that the last one nearly contains
    a vector of the sum of the others, by an amount about ``gap``."""
    space = random_space(rng, dim, weighted)
    total = sum(ranks)
    if total > dim or ranks[-1] == 0 or len(ranks) < 2:
        raise ValueError("need a nonzero last subspace and sum of ranks <= dim")
    q, _ = np.linalg.qr(rng.standard_normal((dim, total)))
    bounds = np.cumsum([0] + list(ranks))
    blocks = [q[:, a:b].copy() for a, b in zip(bounds[:-1], bounds[1:])]
    others = np.hstack(blocks[:-1])
    w = others @ rng.standard_normal(others.shape[1])
    w /= np.linalg.norm(w)
    last = blocks[-1]
    last[:, 0] = w + gap * last[:, 0]
    subs = [Subspace.from_whitened(space, b) for b in blocks[:-1]]
    subs.append(orthonormalize(space.unwhiten(last), space))
    return SubspaceSystem(subs, space)


def degenerate_fixtures(seed: int = 0) -> list[tuple[str, SubspaceSystem]]:
    """Engineered systems: exact dependence, nesting, zero subspaces and
    near-dependence at several scales (a few inside the tolerance band)."""
    rng = rng_from(seed)
    out = []
    for k in range(6):
        dim = int(rng.integers(2, 9))
        space = random_space(rng, dim)
        h = random_subspace(rng, space, int(rng.integers(1, dim + 1)))
        out.append((f"duplicate-{k}", SubspaceSystem([h, h], space)))
    for k in range(6):
        dim = int(rng.integers(3, 10))
        space = random_space(rng, dim)
        big = random_subspace(rng, space, int(rng.integers(2, dim)))
        small = orthonormalize(big.basis[:, :1], space)
        extra = random_subspace(rng, space, 1)
        out.append((f"nested-{k}", SubspaceSystem([big, extra, small], space)))
    for k in range(6):
        dim = int(rng.integers(2, 8))
        space = random_space(rng, dim)
        r = int(rng.integers(1, dim + 1))
        a = random_subspace(rng, space, r)
        b = random_subspace(rng, space, dim - r + 1)
        out.append((f"overfull-{k}", SubspaceSystem([a, b], space)))
    for k in range(4):
        dim = int(rng.integers(1, 7))
        space = random_space(rng, dim)
        z = Subspace(space, np.zeros((dim, 0)))
        subs = [z, random_subspace(rng, space, 1)] if k % 2 else [z, z]
        out.append((f"zero-{k}", SubspaceSystem(subs, space)))
    for k in range(4):
        dim = int(rng.integers(2, 10))
        space = random_space(rng, dim)
        h = random_subspace(rng, space, 1)
        w = h.basis[:, 0] * (1 + 1e-14)
        out.append((f"rounded-duplicate-{k}", SubspaceSystem([h, orthonormalize(w, space)], space)))
    gaps = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7]
    for k in range(20):
        g = gaps[k % len(gaps)]
        dim = int(rng.integers(3, 13))
        if k % 2:
            out.append((f"near-pair-{g:g}-{k}", near_dependent_pair(rng, dim, g)))
        else:
            n = int(rng.integers(2, 5))
            ranks = [1] * n
            out.append((f"near-system-{g:g}-{k}", near_dependent_system(rng, max(dim, n), ranks, g)))
    for k, g in enumerate([3e-11, 8e-12]):
        out.append((f"band-pair-{g:g}", near_dependent_pair(rng, 4 + k, g, weighted=False)))
    for k in range(2):
        space = random_space(rng, 6)
        h = random_subspace(rng, space, 2)
        out.append((f"triple-{k}", SubspaceSystem([h, random_subspace(rng, space, 2), h], space)))
    return out


def random_unitary(rng, dim: int, scale: float, complex_: bool = False) -> np.ndarray:
    k = rng.standard_normal((dim, dim))
    if complex_:
        k = k + 1j * rng.standard_normal((dim, dim))
    k = (k - k.conj().T) / 2
    k /= max(np.linalg.norm(k, 2), 1e-300)
    return scipy.linalg.expm(scale * k)


def perturb(rng, system: SubspaceSystem, scales) -> SubspaceSystem:
    """Rotate each subspace (in whitened coordinates) by a random unitary."""
    space = system.space
    subs = []
    for h, s in zip(system, scales):
        u = random_unitary(rng, space.dim, s, np.iscomplexobj(h.q))
        subs.append(Subspace.from_whitened(space, u @ h.q))
    return SubspaceSystem(subs, space)


def random_spectral_matrix(rng, lambdas, mults, dim: int | None = None, cond: float = 10.0):
    """``A = V J V^{-1}`` with one Jordan block of size ``m_k`` per scalar,
    padded with extra eigenvalues away from all ``lambdas`` when ``dim`` is larger.

    ``V`` has singular values spread over ``[1, cond]``.
    """
    blocks = [l * np.eye(m) + np.eye(m, k=1) for l, m in zip(lambdas, mults)]
    size = sum(mults)
    dim = size if dim is None else dim
    far = max(abs(l) for l in lambdas) + 2.0
    for k in range(dim - size):
        blocks.append(np.array([[far + k]]))
    j = scipy.linalg.block_diag(*blocks)
    u, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    w, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    v = u @ np.diag(np.geomspace(1.0, cond, dim)) @ w
    return v @ j @ np.linalg.inv(v)


def separated_scalars(rng, n: int, sep: float, spread: float = 1.0) -> list[float]:
    """``n`` reals in ``[-spread, spread]`` with minimum gap equal to ``sep``."""
    free = 2 * spread - sep * (n - 1)
    if free < 0:
        raise ValueError("cannot fit the scalars")
    cuts = np.sort(rng.uniform(0, free, n))
    vals = [-spread + c + k * sep for k, c in enumerate(cuts)]
    if n >= 2:
        i = int(rng.integers(n - 1))
        vals[i + 1] = vals[i] + sep
        for k in range(i + 2, n):
            vals[k] = max(vals[k], vals[k - 1] + sep)
    return [float(v) for v in vals]
