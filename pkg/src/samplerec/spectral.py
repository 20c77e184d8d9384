"""Spectral representation of a separable RKHS on a weighted grid.

A model is the singular value decomposition of the embedding of the
Hilbert space into L2(mu): non-increasing singular values ``sigma_k`` and
L2-orthonormal functions ``b_k``, both sampled on a finite grid whose
quadrature weights stand in for the measure.  With H-coordinates ``c``
(a function ``f = sum_k c_k sigma_k b_k``) every L2 quantity reduces to
finite linear algebra.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import FiniteRankSignal, InvalidArgument, InvalidConfig

DEFAULT_ORTH_TOL = 1e-8


@dataclass(frozen=True)
class DomainGrid:
    """Finite stand-in for the measure space ``(D, mu)``.

    `nodes` has shape ``(N,)`` or ``(N, d)``; `weights` carries the
    mu-mass of each node.  Nodes listed in `invalid` are excluded from
    sampling (the complement of the full-measure set where the kernel
    series is valid).
    """

    nodes: np.ndarray
    weights: np.ndarray
    measure: float = 1.0
    invalid: tuple = ()

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if weights.ndim != 1 or len(weights) != len(nodes):
            raise InvalidConfig("grid weights must be one per node")
        if np.any(weights < 0):
            raise InvalidConfig("grid weights must be nonnegative")
        if not math.isclose(math.fsum(weights), self.measure, rel_tol=1e-12, abs_tol=1e-14):
            raise InvalidConfig(
                f"grid weights sum to {math.fsum(weights)!r}, expected measure {self.measure!r}")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "invalid", tuple(int(i) for i in self.invalid))

    @property
    def size(self):
        return len(self.weights)

    @property
    def dim(self):
        return 1 if self.nodes.ndim == 1 else self.nodes.shape[1]

    @classmethod
    def uniform(cls, n, d=1):
        """Uniform grid on ``[0, 1)^d`` with ``n`` points per axis."""
        axis = np.arange(n) / n
        if d == 1:
            nodes = axis
        else:
            mesh = np.meshgrid(*([axis] * d), indexing="ij")
            nodes = np.stack([g.ravel() for g in mesh], axis=1)
        size = n ** d
        return cls(nodes, np.full(size, 1.0 / size), 1.0)

    def valid_mask(self):
        mask = np.ones(self.size, dtype=bool)
        if self.invalid:
            mask[list(self.invalid)] = False
        return mask


@dataclass(frozen=True)
class SpectralModel:
    """Singular values and grid-sampled singular functions of ``H -> L2``.

    ``basis[j, k]`` is ``b_k`` evaluated at grid node ``j``.  When
    `rank_exact` is set the model has exactly ``M_trunc`` nonzero singular
    values; otherwise it is a truncation of an infinite model and
    `neglected_tail` records ``sum_{k >= M_trunc} sigma_k^2``.
    """

    sigma: np.ndarray
    basis: np.ndarray
    grid: DomainGrid
    rank_exact: bool = False
    neglected_tail: float = 0.0
    tail_tol: float = math.inf
    name: str = "custom"
    params: dict = field(default_factory=dict)
    orth_tol: float = DEFAULT_ORTH_TOL

    def __post_init__(self):
        sigma = np.asarray(self.sigma, dtype=float)
        basis = np.asarray(self.basis, dtype=complex)
        if sigma.ndim != 1 or len(sigma) == 0:
            raise InvalidConfig("sigma must be a non-empty 1-d sequence")
        if np.any(sigma <= 0):
            raise InvalidConfig("singular values must be positive")
        if np.any(np.diff(sigma) > 0):
            raise InvalidConfig("singular values must be non-increasing")
        if basis.shape != (self.grid.size, len(sigma)):
            raise InvalidConfig(
                f"basis shape {basis.shape} does not match grid size {self.grid.size} "
                f"and truncation {len(sigma)}")
        if self.grid.size < len(sigma):
            raise InvalidConfig("grid has fewer nodes than the truncation dimension")
        if self.neglected_tail > self.tail_tol:
            raise InvalidConfig("neglected tail exceeds the declared tolerance")
        sigma.setflags(write=False)
        basis.setflags(write=False)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "_tails", _suffix_sums(sigma ** 2))
        dev = self.orthonormality_defect()
        if dev > self.orth_tol:
            raise InvalidConfig(f"basis is not grid-orthonormal (defect {dev:.3e})")

    @property
    def M(self):
        return len(self.sigma)

    @property
    def trace(self):
        return float(self._tails[0])

    def orthonormality_defect(self):
        """``max_{j,k} |<b_j, b_k>_grid - delta_jk|``."""
        w = self.grid.weights
        g = self.basis.conj().T @ (self.basis * w[:, None])
        return float(np.max(np.abs(g - np.eye(self.M))))

    def head(self, nodes, m):
        return self.basis[np.asarray(nodes, dtype=int), :m]

    def evaluate(self, coef, nodes=None):
        """Evaluate ``sum_k coef_k b_k`` at grid nodes (all nodes by default)."""
        coef = np.asarray(coef)
        rows = self.basis if nodes is None else self.basis[np.asarray(nodes, dtype=int)]
        return rows[:, : len(coef)] @ coef

    def describe(self):
        return {"name": self.name, **self.params}


def _suffix_sums(values):
    """Compensated suffix sums, accumulated from the last (smallest) term."""
    out = np.zeros(len(values) + 1)
    s = 0.0
    c = 0.0
    for i in range(len(values) - 1, -1, -1):
        v = float(values[i])
        t = s + v
        if abs(s) >= abs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
        out[i] = s + c
    return out


@dataclass(frozen=True)
class TailStats:
    m: int
    tail_sq: float
    gamma: float
    branch: str
    bound_main: float
    bound_local: float


def tail_sum(model, m):
    """``sum_{k >= m} sigma_k^2`` over the truncated model."""
    m = int(m)
    if not 0 <= m <= model.M:
        raise InvalidArgument(f"head dimension {m} outside [0, {model.M}]")
    return float(model._tails[m])


def gamma_m(model, m):
    """``max{sigma_m, sqrt(tail_sum(m) / m)}``."""
    return tail_stats(model, m).gamma


def tail_stats(model, m):
    m = int(m)
    if m < 1 or m > model.M:
        raise InvalidArgument(f"head dimension {m} outside [1, {model.M})")
    if m == model.M:
        if model.rank_exact:
            raise FiniteRankSignal(
                f"m={m} reaches the rank of a finite-rank model; use exact interpolation")
        raise InvalidArgument(f"head dimension {m} must be below the truncation {model.M}")
    tail = tail_sum(model, m)
    head_branch = float(model.sigma[m])
    tail_branch = math.sqrt(tail / m)
    if head_branch >= tail_branch:
        gamma, branch = head_branch, "head"
    else:
        gamma, branch = tail_branch, "tail"
    return TailStats(
        m=m,
        tail_sq=tail,
        gamma=gamma,
        branch=branch,
        bound_main=tail_branch,
        bound_local=433.0 * max(head_branch ** 2, tail / m),
    )


def kernel_eval(model, x, y, m=None):
    """Kernel values between grid nodes.

    `x` and `y` are node indices (scalars or arrays; arrays give a matrix).
    Without `m` returns ``K(x, y) = sum_k sigma_k^2 b_k(x) conj(b_k(y))``.
    With `m` returns the pair ``(K_m, R_m)``: the unweighted head kernel
    ``sum_{k<m} b_k(x) conj(b_k(y))`` and the weighted tail kernel
    ``sum_{k>=m} sigma_k^2 b_k(x) conj(b_k(y))``.
    """
    scalar = np.ndim(x) == 0 and np.ndim(y) == 0
    bx = model.basis[np.atleast_1d(np.asarray(x, dtype=int))]
    by = model.basis[np.atleast_1d(np.asarray(y, dtype=int))]
    s2 = model.sigma ** 2
    if m is None:
        out = (bx * s2) @ by.conj().T
        return complex(out[0, 0]) if scalar else out
    m = int(m)
    if not 0 <= m <= model.M:
        raise InvalidArgument(f"head dimension {m} outside [0, {model.M}]")
    km = bx[:, :m] @ by[:, :m].conj().T
    rm = (bx[:, m:] * s2[m:]) @ by[:, m:].conj().T
    if scalar:
        return complex(km[0, 0]), complex(rm[0, 0])
    return km, rm


def diagonal_kernel(model):
    """``K(x, x)`` at every grid node."""
    return (np.abs(model.basis) ** 2) @ (model.sigma ** 2)
