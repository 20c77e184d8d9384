"""Sampling density, i.i.d. point draws and the concentration certificate."""

from dataclasses import dataclass, replace
import math

import numpy as np

from .errors import ConcentrationFailure, DegenerateDensity, InvalidArgument
from .linalg import gram, spectral_norm_hermitian
from .spectral import tail_stats, tail_sum

RNG_ALGORITHM = f"numpy.random.PCG64/numpy-{np.__version__}"
DEFAULT_C = 8.0


def _finite_rank_head(model, m):
    return model.rank_exact and m == model.M


def _check_m(model, m):
    if not 1 <= m <= model.M or (m == model.M and not model.rank_exact):
        raise InvalidArgument(f"head dimension {m} invalid for a model with M={model.M}")


def density_eval(model, m, x=None):
    """Mixture density of the normalized head spectral function and the
    sigma-weighted tail, evaluated at nodes `x` (all grid nodes if None).

    For a finite-rank model with ``m`` equal to its rank only the head
    term remains.
    """
    m = int(m)
    _check_m(model, m)
    rows = model.basis if x is None else model.basis[np.asarray(x, dtype=int)]
    mod2 = np.abs(rows) ** 2
    head = mod2[:, :m].sum(axis=1) / m
    if _finite_rank_head(model, m):
        return head
    tail = tail_sum(model, m)
    if tail <= 0.0:
        raise DegenerateDensity("tail branch of the density has zero mass")
    s2 = model.sigma[m:] ** 2
    return 0.5 * (head + (mod2[:, m:] @ s2) / tail)


def target_diagonal(model, m):
    """Diagonal of the expected rank-one sum: ones on the head, then
    ``sigma_k^2 / gamma_m^2``."""
    m = int(m)
    _check_m(model, m)
    if _finite_rank_head(model, m):
        return np.ones(m)
    g = tail_stats(model, m).gamma
    return np.concatenate([np.ones(m), model.sigma[m:] ** 2 / g ** 2])


def info_vectors(model, m, points, rho):
    """Rows are the information vectors of the given points."""
    m = int(m)
    rows = model.basis[np.asarray(points, dtype=int)]
    scale = 1.0 / np.sqrt(np.asarray(rho, dtype=float))
    if _finite_rank_head(model, m):
        return rows * scale[:, None]
    g = tail_stats(model, m).gamma
    weights = np.concatenate([np.ones(m), model.sigma[m:] / g])
    return rows * weights[None, :] * scale[:, None]


@dataclass(frozen=True)
class SampleBatch:
    m: int
    points: np.ndarray
    density_vals: np.ndarray
    info_vectors: np.ndarray
    target: np.ndarray
    residual: float
    seed: int = None
    attempts: int = 1
    C: float = None

    @property
    def n(self):
        return len(self.points)

    def max_norm_sq(self):
        if self.n == 0:
            return 0.0
        return float(np.max(np.sum(np.abs(self.info_vectors) ** 2, axis=1)))


def deviation(info, target):
    """``|| (1/n) sum_i y_i y_i^* - diag(target) ||_{2->2}``."""
    n = len(info)
    dev = -np.diag(np.asarray(target, dtype=complex))
    if n:
        dev = dev + gram(info) / n
    return spectral_norm_hermitian(dev)


def batch_from_points(model, m, points, seed=None, attempts=1, C=None):
    """Assemble a fully populated batch for a fixed point list."""
    points = np.asarray(points, dtype=int)
    rho = density_eval(model, m, points) if len(points) else np.zeros(0)
    if np.any(rho <= 0):
        raise DegenerateDensity("a point has zero sampling density")
    y = info_vectors(model, m, points, rho) if len(points) else np.zeros((0, model.M), complex)
    target = target_diagonal(model, m)
    return SampleBatch(
        m=int(m),
        points=points,
        density_vals=rho,
        info_vectors=y,
        target=target,
        residual=deviation(y, target),
        seed=seed,
        attempts=attempts,
        C=C,
    )


def default_sample_count(m, C=DEFAULT_C):
    return int(math.ceil(C * m * math.log(m + 1)))


def grid_mass(model, m):
    mass = density_eval(model, m) * model.grid.weights
    return np.where(model.grid.valid_mask(), mass, 0.0)


def draw_points(model, m, n=None, seed=0, C=DEFAULT_C):
    """Draw `n` i.i.d. grid nodes with probability proportional to the
    density times the quadrature weight (inverse CDF)."""
    if n is None:
        n = default_sample_count(m, C)
    n = int(n)
    if n < 1:
        raise InvalidArgument("sample count must be positive")
    mass = grid_mass(model, m)
    total = math.fsum(mass)
    if total <= 0.0:
        raise DegenerateDensity("density has no mass on valid grid nodes")
    cdf = np.cumsum(mass) / total
    seed = int(seed)
    if not 0 <= seed < 2 ** 64:
        raise InvalidArgument("seed must be an unsigned 64-bit integer")
    rng = np.random.Generator(np.random.PCG64(seed))
    u = rng.random(n)
    points = np.searchsorted(cdf, u, side="right")
    points = np.minimum(points, len(cdf) - 1)
    return batch_from_points(model, m, points, seed=seed, C=C)


@dataclass(frozen=True)
class ConcentrationReport:
    residual: float
    threshold: float
    passed: bool


def concentration_check(batch, t=0.5):
    return ConcentrationReport(batch.residual, float(t), bool(batch.residual <= t))


def attempt_seed(seed, attempt):
    """Seed used for the given 0-based attempt; attempt 0 reuses `seed`."""
    if attempt == 0:
        return int(seed)
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(attempt),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def resample_until_concentrated(model, m, n=None, t=0.5, max_attempts=20, seed=0, C=DEFAULT_C):
    """Redraw until the deviation is at most `t`.

    Raises `ConcentrationFailure` with the best batch seen when attempts
    run out.
    """
    if max_attempts < 1:
        raise InvalidArgument("max_attempts must be at least 1")
    best = None
    for k in range(max_attempts):
        batch = draw_points(model, m, n, attempt_seed(seed, k), C=C)
        if best is None or batch.residual < best.residual:
            best = batch
        if batch.residual <= t:
            if k == 0:
                return batch
            return replace(batch, attempts=k + 1)
    raise ConcentrationFailure(
        f"no concentrated batch in {max_attempts} attempts (best residual {best.residual:.4f})",
        best_residual=best.residual, best_batch=best, attempts=max_attempts)
