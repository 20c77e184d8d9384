"""Weighted least-squares recovery on the head space and the minimal-norm
interpolant."""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument, PlanFailure
from .spectral import tail_stats

PINV_RTOL = 1e-12


@dataclass(frozen=True)
class RecoveryPlan:
    """Everything needed to apply the estimator.

    ``G[i, k] = rho(x_i)^-1/2 b_k(x_i)`` for ``k < m`` and
    ``Phi[i, k-m] = rho(x_i)^-1/2 sigma_k b_k(x_i)`` for ``k >= m``.
    """

    m: int
    points: np.ndarray
    rho_vals: np.ndarray
    G: np.ndarray
    Phi: np.ndarray
    G_pinv: np.ndarray
    gamma: float
    certificate: object = None
    checks: dict = field(default_factory=dict)

    @property
    def n(self):
        return len(self.points)

    @classmethod
    def zero(cls, model, m):
        """The trivial algorithm ``A = 0`` (no information)."""
        return cls(m=int(m), points=np.zeros(0, dtype=int), rho_vals=np.zeros(0),
                   G=np.zeros((0, m), complex), Phi=np.zeros((0, model.M - m), complex),
                   G_pinv=np.zeros((m, 0), complex), gamma=float("nan"))

    def to_dict(self):
        return {"points": [int(x) for x in self.points], "n": self.n, **self.checks}


def _pinv(G):
    u, s, vh = np.linalg.svd(G, full_matrices=False)
    if len(s) == 0:
        return np.zeros((G.shape[1], G.shape[0]), complex), s
    keep = s > PINV_RTOL * s[0]
    return (vh[keep].conj().T / s[keep]) @ u[:, keep].conj().T, s


def build_plan(model, batch, cert):
    """Assemble the least-squares plan on the points selected by `cert`.

    Raises `PlanFailure` when ``G`` is not of full column rank.
    """
    m = batch.m
    J = np.asarray(cert.J, dtype=int)
    if cert.head_floor <= 0 or len(J) < m:
        raise PlanFailure("certificate has no head mass; G cannot have full rank")
    points = batch.points[J]
    rho = batch.density_vals[J]
    rows = model.basis[points] / np.sqrt(rho)[:, None]
    G = rows[:, :m]
    Phi = rows[:, m:] * model.sigma[m:]
    G_pinv, s = _pinv(G)
    if len(s) < m or s[-1] <= PINV_RTOL * s[0]:
        raise PlanFailure("G is rank deficient although the certificate has head mass")
    gamma = 1.0 if (model.rank_exact and m == model.M) else tail_stats(model, m).gamma
    pinv_norm = 1.0 / s[-1]
    pinv_bound = (cert.head_floor * m) ** -0.5
    phi_norm_sq = float(np.linalg.norm(Phi, 2) ** 2) if Phi.size else 0.0
    phi_bound = cert.full_cap * m * gamma ** 2
    checks = {
        "pinv_norm": pinv_norm,
        "pinv_bound": pinv_bound,
        "pinv_ok": bool(pinv_norm <= pinv_bound * (1 + 1e-8) + 1e-12),
        "phi_norm_sq": phi_norm_sq,
        "phi_bound": phi_bound,
        "phi_ok": bool(phi_norm_sq <= phi_bound * (1 + 1e-8) + 1e-12),
    }
    return RecoveryPlan(m=m, points=points, rho_vals=rho, G=G, Phi=Phi, G_pinv=G_pinv,
                        gamma=gamma, certificate=cert, checks=checks)


def plan_from_points(model, m, points, budget=None):
    """Plan on a fixed point list, certified with the full index set."""
    from .density import batch_from_points
    from .subsample import certify

    batch = batch_from_points(model, m, points)
    return build_plan(model, batch, certify(batch, np.arange(batch.n), budget=budget))


def recover(plan, samples):
    """Head coefficients of the least-squares estimate from samples
    ``f(x_i)``."""
    samples = np.asarray(samples)
    if samples.shape != (plan.n,):
        raise InvalidArgument(f"expected {plan.n} samples, got shape {samples.shape}")
    return plan.G_pinv @ (samples / np.sqrt(plan.rho_vals))


def sample_values(model, coef, points):
    """``f(x_i)`` for ``f = sum_k coef_k b_k`` (L2 coefficients)."""
    return model.evaluate(coef, points)


def recovery_error(model, plan, coef):
    """``||f - A_n f||_{L2}`` for ``f`` with L2 coefficients `coef`."""
    coef = np.asarray(coef, dtype=complex)
    g = recover(plan, sample_values(model, coef, plan.points)) if plan.n else np.zeros(plan.m)
    diff = coef.copy()
    diff[: plan.m] -= g
    return float(np.linalg.norm(diff))


@dataclass(frozen=True)
class SplineResult:
    coef_h: np.ndarray
    residue: float
    rank: int

    def l2_coefficients(self, model):
        return model.sigma * self.coef_h


def _sample_matrix(model, points):
    return model.basis[np.asarray(points, dtype=int)] * model.sigma


def spline_interpolant(model, points, samples, rtol=PINV_RTOL):
    """H-coordinates of the minimal-norm interpolant of the samples.

    ``c = W^* (W W^*)^+ samples`` with ``W[i, k] = sigma_k b_k(x_i)``; the
    Gram matrix ``W W^*`` is the kernel matrix at the points.
    """
    points = np.asarray(points, dtype=int)
    samples = np.asarray(samples, dtype=complex)
    if samples.shape != (len(points),):
        raise InvalidArgument("one sample per point required")
    if len(points) == 0:
        return SplineResult(np.zeros(model.M, complex), 0.0, 0)
    W = _sample_matrix(model, points)
    K = W @ W.conj().T
    K_pinv = np.linalg.pinv(K, rcond=rtol, hermitian=True)
    c = W.conj().T @ (K_pinv @ samples)
    residue = float(np.max(np.abs(W @ c - samples)))
    rank = int(np.linalg.matrix_rank(K, rtol=rtol, hermitian=True))
    return SplineResult(c, residue, rank)
