"""Concrete spectral models: periodic Sobolev-type spaces, finite-rank
spaces, tensor products and surrogate spaces built from nested
approximation spaces."""

import heapq
import math

import numpy as np

from .errors import InvalidConfig
from .spectral import DomainGrid, SpectralModel

MAX_TENSOR_GRID = 2 ** 20


def fourier_frequencies(count):
    """Frequencies ``0, 1, -1, 2, -2, ...`` ordered by magnitude."""
    k = np.arange(count)
    return np.where(k % 2 == 1, (k + 1) // 2, -(k // 2))


def fourier_basis(nodes, count):
    f = fourier_frequencies(count)
    return np.exp(2j * np.pi * np.outer(nodes, f))


def sobolev_sigma(k, alpha, beta_log=0.0):
    k = np.asarray(k, dtype=float)
    return (k + 1.0) ** (-alpha) * np.log(k + math.e) ** (-beta_log)


def sobolev_tail(M, alpha, beta_log=0.0, explicit=2 ** 20):
    """``sum_{k >= M} sigma_k^2`` for the Sobolev profile.

    Without the log factor this is the Hurwitz zeta value
    ``zeta(2 alpha, M + 1)``.  Otherwise `explicit` terms are summed
    directly and the remainder is closed by the midpoint integral (the
    summand is convex and decreasing), taken in ``u = log(x + 1)``.
    """
    from scipy.integrate import quad
    from scipy.special import zeta

    if beta_log == 0:
        return float(zeta(2.0 * alpha, M + 1))
    k = np.arange(M, M + explicit, dtype=float)
    head = math.fsum(sobolev_sigma(k, alpha, beta_log) ** 2)
    start = M + explicit - 0.5

    def integrand(u):
        # log(x + e) with x = e^u - 1, written to avoid overflow
        log_term = u + math.log1p((math.e - 1.0) * math.exp(-u))
        return math.exp((1.0 - 2.0 * alpha) * u) * log_term ** (-2.0 * beta_log)

    rest, _ = quad(integrand, math.log(start + 1.0), np.inf, limit=500)
    return head + rest


def fourier_sobolev(alpha=1.0, beta_log=0.0, M=256, grid_size=None):
    """Periodic space on ``[0, 1)`` with singular values
    ``(k+1)^-alpha log(k+e)^-beta_log`` and exponential singular functions."""
    if not (alpha > 0.5 or (alpha == 0.5 and beta_log > 0.5)):
        raise InvalidConfig("need alpha > 1/2, or alpha = 1/2 with beta_log > 1/2")
    M = int(M)
    if M < 2:
        raise InvalidConfig("truncation must be at least 2")
    grid_size = 2 * M if grid_size is None else int(grid_size)
    if grid_size < 2 * M:
        raise InvalidConfig("grid_size must be at least 2*M")
    grid = DomainGrid.uniform(grid_size)
    sigma = sobolev_sigma(np.arange(M), alpha, beta_log)
    neglected = sobolev_tail(M, alpha, beta_log)
    return SpectralModel(
        sigma=sigma,
        basis=fourier_basis(grid.nodes, M),
        grid=grid,
        rank_exact=False,
        neglected_tail=neglected,
        name="fourier_sobolev",
        params={"alpha": float(alpha), "beta_log": float(beta_log), "M": M, "grid": grid_size},
    )


def finite_rank(sigma, grid_size=None):
    """Exactly finite-rank model with Fourier singular functions."""
    sigma = np.asarray(sigma, dtype=float)
    grid_size = 2 * len(sigma) if grid_size is None else int(grid_size)
    if grid_size < len(sigma):
        raise InvalidConfig("grid_size must be at least the rank")
    grid = DomainGrid.uniform(grid_size)
    return SpectralModel(
        sigma=sigma,
        basis=fourier_basis(grid.nodes, len(sigma)),
        grid=grid,
        rank_exact=True,
        name="finite_rank",
        params={"rank": len(sigma), "grid": grid_size},
    )


def _canonical_product(base, idx):
    # sorted factors so that permuted multi-indices give bitwise-equal products
    return math.prod(sorted(float(base[i]) for i in idx))


def tensor_sigma(base_sigma, d, M):
    """The `M` largest `d`-fold products of `base_sigma`, non-increasing.

    Ties are broken by lexicographic multi-index.  Returns
    ``(values, multi_indices)``; enumeration is best-first over a heap, so
    only the frontier of candidates is ever held.
    """
    base = np.asarray(base_sigma, dtype=float)
    if np.any(np.diff(base) > 0) or np.any(base <= 0):
        raise InvalidConfig("base sequence must be positive and non-increasing")
    d, M = int(d), int(M)
    if d < 1:
        raise InvalidConfig("dimension must be positive")
    if M > len(base) ** d:
        raise InvalidConfig("not enough products for the requested truncation")
    start = (0,) * d
    heap = [(-_canonical_product(base, start), start)]
    seen = {start}
    values, indices = [], []
    while len(values) < M:
        negv, idx = heapq.heappop(heap)
        values.append(-negv)
        indices.append(idx)
        for j in range(d):
            if idx[j] + 1 < len(base):
                nxt = idx[:j] + (idx[j] + 1,) + idx[j + 1:]
                if nxt not in seen:
                    seen.add(nxt)
                    heapq.heappush(heap, (-_canonical_product(base, nxt), nxt))
    return np.array(values), np.array(indices, dtype=int).reshape(M, d)


def tensor_product_model(base_sigma, d, M, grid_size=None):
    """`d`-fold tensor product of a periodic univariate model on
    ``[0, 1)^d``, truncated to its `M` largest singular values."""
    d = int(d)
    if d not in (1, 2, 3):
        raise InvalidConfig("tensor dimension must be 1, 2 or 3")
    values, idx = tensor_sigma(base_sigma, d, M)
    kmax = int(idx.max())
    axis = 2 * (kmax + 1) if grid_size is None else int(grid_size)
    if axis < kmax + 1:
        raise InvalidConfig("grid too coarse for the frequencies in use")
    if axis ** d > MAX_TENSOR_GRID:
        raise InvalidConfig(f"product grid {axis}^{d} exceeds {MAX_TENSOR_GRID} nodes")
    grid = DomainGrid.uniform(axis, d)
    nodes = grid.nodes.reshape(grid.size, d)
    freqs = fourier_frequencies(kmax + 1)[idx]
    basis = np.exp(2j * np.pi * nodes @ freqs.T)
    return SpectralModel(
        sigma=values,
        basis=basis,
        grid=grid,
        rank_exact=False,
        name="tensor",
        params={"d": d, "M": int(M), "grid": axis},
    )


def haar_level_spaces(grid_level, levels):
    """Indicator functions of the dyadic intervals of levels
    ``0 .. levels-1`` sampled on the uniform grid of ``2^grid_level``
    nodes; entry ``l`` has ``2^l`` columns."""
    if levels - 1 > grid_level:
        raise InvalidConfig("grid is coarser than the finest level")
    nodes = np.arange(2 ** grid_level)
    spaces = []
    for lev in range(levels):
        cell = nodes >> (grid_level - lev)
        spaces.append((cell[:, None] == np.arange(2 ** lev)[None, :]).astype(float))
    return spaces


def _orthonormalize(columns, weights, tol=1e-10):
    """Weighted Gram-Schmidt (two passes) keeping independent columns in order."""
    out = []
    sw = np.sqrt(weights)
    for j in range(columns.shape[1]):
        v = columns[:, j].astype(complex) * sw
        norm0 = np.linalg.norm(v)
        if norm0 == 0:
            continue
        for _ in range(2):
            for q in out:
                v = v - q * np.vdot(q, v)
        nv = np.linalg.norm(v)
        if nv > tol * norm0:
            out.append(v / nv)
    q = np.array(out).T
    return q / sw[:, None]


def surrogate_sigma(M, alpha=0.7, profile="poly", s=1.0):
    """Singular value profile of the surrogate space.

    ``poly``: ``max{1, k}^-alpha``.  ``boundary``: ``k^-1/2 log^-s k`` for
    ``k >= 2``, held constant at its ``k = 2`` value for ``k < 2``.
    """
    k = np.arange(M, dtype=float)
    if profile == "poly":
        return np.maximum(1.0, k) ** (-alpha)
    if profile == "boundary":
        kk = np.maximum(k, 2.0)
        return kk ** -0.5 * np.log(kk) ** (-s)
    raise InvalidConfig(f"unknown surrogate profile {profile!r}")


def surrogate_rkhs(spaces, grid, alpha=0.7, p=1.0, profile="poly", s=1.0, M=None, tol=1e-10):
    """Hilbert space whose orthonormal basis is ``sigma_k b_k`` with
    ``(b_k)`` obtained by orthonormalizing the nested approximation spaces
    in order.

    `spaces[l]` is a grid matrix with ``2^l`` columns spanning the
    approximation space of dimension ``2^l``; each must be contained in
    the next.  Every prefix ``b_0..b_{m-1}`` then spans a space containing
    all supplied spaces of dimension at most ``m``.
    """
    if profile == "poly":
        if not 0 < p < 2:
            raise InvalidConfig("need 0 < p < 2")
        if not 0.5 < alpha < 1.0 / p:
            raise InvalidConfig("need 1/2 < alpha < 1/p")
    elif profile == "boundary":
        if not s > 0.5:
            raise InvalidConfig("boundary profile needs s > 1/2")
    w = grid.weights
    prev = None
    for lev, W in enumerate(spaces):
        W = np.asarray(W)
        if W.shape != (grid.size, 2 ** lev):
            raise InvalidConfig(f"space {lev} must have shape ({grid.size}, {2 ** lev})")
        if np.linalg.matrix_rank(W * np.sqrt(w)[:, None], tol=None) < W.shape[1]:
            raise InvalidConfig(f"space {lev} is rank deficient")
        if prev is not None:
            q = _orthonormalize(W, w, tol)
            coef = q.conj().T @ (prev * w[:, None])
            resid = prev - q @ coef
            scale = max(1.0, float(np.max(np.abs(prev))))
            if np.max(np.abs(resid)) > 1e-8 * scale:
                raise InvalidConfig(f"space {lev - 1} is not contained in space {lev}")
        prev = W
    basis = _orthonormalize(np.concatenate([np.asarray(W) for W in spaces], axis=1), w, tol)
    if M is not None:
        if M > basis.shape[1]:
            raise InvalidConfig("spaces span fewer than M directions")
        basis = basis[:, :M]
    sigma = surrogate_sigma(basis.shape[1], alpha, profile, s)
    return SpectralModel(
        sigma=sigma,
        basis=basis,
        grid=grid,
        rank_exact=True,
        name="surrogate",
        params={"alpha": float(alpha), "profile": profile, "s": float(s), "M": basis.shape[1]},
    )


def projection_coefficients(model, values):
    """Grid L2 coefficients ``<f, b_k>`` and the norm of the part of `f`
    outside the span of the basis."""
    values = np.asarray(values, dtype=complex)
    w = model.grid.weights
    coef = model.basis.conj().T @ (values * w)
    resid = values - model.basis @ coef
    return coef, math.sqrt(float(np.sum(np.abs(resid) ** 2 * w)))


def l2_tail_norm(model, values, m):
    """``||f - P_m f||_{L2}`` on the grid."""
    coef, outside = projection_coefficients(model, values)
    return math.sqrt(float(np.sum(np.abs(coef[m:]) ** 2)) + outside ** 2)


def h_tail_norm(model, values, m, tol=1e-10):
    """``||f - P_m f||_H``; infinite when `f` leaves the span of the basis."""
    coef, outside = projection_coefficients(model, values)
    scale = math.sqrt(float(np.sum(np.abs(values) ** 2 * model.grid.weights)))
    if outside > tol * max(scale, 1.0):
        return math.inf
    return math.sqrt(float(np.sum(np.abs(coef[m:] / model.sigma[m:]) ** 2)))
