"""Exact worst-case errors over the unit ball, theoretical bounds,
kernel-matrix certificates and rate fits.

In H-coordinates ``c`` (``f = sum_k c_k sigma_k b_k``, ``||f||_H = |c|``)
a linear sampling algorithm is a matrix acting on ``c``, and its worst-case
L2 error over the unit ball is the largest singular value of
``diag(sigma) - (algorithm output coefficients)``.
"""

from dataclasses import dataclass, field, asdict
import math

import numpy as np

from .errors import InvalidArgument
from .linalg import extreme_eigenvalues
from .recovery import PINV_RTOL, _sample_matrix
from .spectral import tail_stats, tail_sum

SLACK = 1e-10


def ls_error_matrix(model, plan):
    """Error operator of the least-squares plan in H-coordinates."""
    err = np.diag(model.sigma).astype(complex)
    if plan.n:
        L = model.basis[plan.points] * model.sigma / np.sqrt(plan.rho_vals)[:, None]
        err[: plan.m] -= plan.G_pinv @ L
    return err


def worst_case_error_ls(model, plan):
    """``sup_{||f||_H <= 1} ||f - A_n f||_{L2}`` by dense SVD."""
    return float(np.linalg.norm(ls_error_matrix(model, plan), 2))


def spline_error_matrix(model, points):
    points = np.asarray(points, dtype=int)
    err = np.diag(model.sigma).astype(complex)
    if len(points) == 0:
        return err
    W = _sample_matrix(model, points)
    _, s, vh = np.linalg.svd(W, full_matrices=False)
    keep = s > PINV_RTOL * s[0]
    Q = vh[keep].conj().T
    return err - (model.sigma[:, None] * Q) @ Q.conj().T


def worst_case_error_spline(model, points):
    """Worst-case error of the minimal-norm interpolant on fixed points."""
    return float(np.linalg.norm(spline_error_matrix(model, points), 2))


@dataclass(frozen=True)
class TheoremBounds:
    m: int
    tail_sq: float
    gamma: float
    bound_main: float
    bound_local: float
    coarse: float
    coarse_envelope: float


def theorem_bounds(model, m):
    """Right-hand sides of the global and local error bounds.

    `bound_main` is ``sqrt(tail_sum(m)/m)``; `bound_local` is
    ``433 max{sigma_m^2, tail_sum(m)/m}``; `coarse` is
    ``(2/m) tail_sum(ceil(m/2))``, which dominates the max, and
    ``coarse_envelope = 433 * coarse``.
    """
    st = tail_stats(model, m)
    coarse = 2.0 / m * tail_sum(model, math.ceil(m / 2))
    return TheoremBounds(m=st.m, tail_sq=st.tail_sq, gamma=st.gamma,
                         bound_main=st.bound_main, bound_local=st.bound_local,
                         coarse=coarse, coarse_envelope=433.0 * coarse)


@dataclass(frozen=True)
class KernelCertificate:
    head_floor: float
    tail_cap: float
    GG: np.ndarray = field(repr=False)
    PP: np.ndarray = field(repr=False)


def kernel_certificate(model, plan):
    """Certificate from truncated kernel matrices at the points.

    Returns ``lambda_m(GG^*)/m`` and ``lambda_max(Phi Phi^*)/(m gamma^2)``
    with both matrices assembled from kernel evaluations scaled by
    ``1/sqrt(rho(x_i) rho(x_j))``.
    """
    from .spectral import kernel_eval

    m = plan.m
    x = plan.points
    km, rm = kernel_eval(model, x, x, m=m)
    scale = 1.0 / np.sqrt(np.outer(plan.rho_vals, plan.rho_vals))
    GG = km * scale
    PP = rm * scale
    ev = np.linalg.eigvalsh(0.5 * (GG + GG.conj().T))[::-1]
    lam_m = float(ev[m - 1]) if len(ev) >= m else 0.0
    tail_max = extreme_eigenvalues(PP)[1] if PP.size else 0.0
    return KernelCertificate(head_floor=max(lam_m, 0.0) / m,
                             tail_cap=tail_max / (m * plan.gamma ** 2), GG=GG, PP=PP)


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    residual: float


def rate_fit(ns, gs):
    """Least-squares line through ``(log n, log g)``."""
    ns = np.asarray(ns, dtype=float)
    gs = np.asarray(gs, dtype=float)
    if len(ns) != len(gs) or len(ns) < 3:
        raise InvalidArgument("need at least three (n, g) pairs")
    if np.any(ns <= 0) or np.any(gs <= 0):
        raise InvalidArgument("rate fit needs positive values")
    X = np.stack([np.log(ns), np.ones_like(ns)], axis=1)
    coef, *_ = np.linalg.lstsq(X, np.log(gs), rcond=None)
    resid = float(np.linalg.norm(X @ coef - np.log(gs)))
    return RateFit(slope=float(coef[0]), intercept=float(coef[1]), residual=resid)


@dataclass
class ErrorReport:
    model: str
    alpha: float
    beta: float
    m: int
    n_initial: int
    n_sub: int
    g_emp_ls: float
    g_emp_spline: float
    d_m: float
    bound_main: float
    bound_local: float
    ratio_main: float
    ratio_local: float
    head_floor: float
    full_cap: float
    attempts: int
    seed: int
    ratio_coarse: float = math.nan
    local_constant: float = math.nan
    envelope_ok: bool = False
    bound_ok: bool = False
    coarse_ok: bool = False
    spline_ok: bool = False
    neglected_tail: float = 0.0
    d_n_sub: float = math.nan
    status: str = "ok"
    extra: dict = field(default_factory=dict)

    CSV_COLUMNS = ("model", "alpha", "beta", "m", "n_initial", "n_sub", "g_emp_ls",
                   "g_emp_spline", "d_m", "bound_main", "bound_local", "ratio_main",
                   "ratio_local", "head_floor", "full_cap", "attempts", "seed")

    def csv_row(self):
        return [getattr(self, c) for c in self.CSV_COLUMNS]

    def to_dict(self):
        return asdict(self)


def analyze(model, plan, batch, seed=None, n_initial=None):
    """Full error report for a least-squares plan built from `batch`."""
    m = plan.m
    cert = plan.certificate
    g_ls = worst_case_error_ls(model, plan)
    g_sp = worst_case_error_spline(model, plan.points)
    exact_path = model.rank_exact and m == model.M
    if exact_path:
        d_m = 0.0
        bounds = None
        bound_main = bound_local = 0.0
        coarse_bound = 0.0
    else:
        bounds = theorem_bounds(model, m)
        d_m = float(model.sigma[m])
        bound_main = bounds.bound_main
        bound_local = cert.local_constant * bounds.gamma ** 2
        coarse_bound = bounds.coarse
    ratio_main = g_ls / bound_main if bound_main > 0 else (0.0 if g_ls <= SLACK else math.inf)
    ratio_local = g_ls ** 2 / bound_local if bound_local > 0 else (0.0 if g_ls <= SLACK else math.inf)
    ratio_coarse = (g_ls / math.sqrt(coarse_bound / 2.0)) if coarse_bound > 0 else ratio_main
    n_sub = plan.n
    params = model.params
    report = ErrorReport(
        model=model.name,
        alpha=float(params.get("alpha", math.nan)),
        beta=float(params.get("beta_log", params.get("s", 0.0))),
        m=m,
        n_initial=int(batch.n if n_initial is None else n_initial),
        n_sub=n_sub,
        g_emp_ls=g_ls,
        g_emp_spline=g_sp,
        d_m=d_m,
        bound_main=bound_main,
        bound_local=bound_local,
        ratio_main=ratio_main,
        ratio_local=ratio_local,
        head_floor=cert.head_floor,
        full_cap=cert.full_cap,
        attempts=int(batch.attempts),
        seed=int(batch.seed if seed is None else seed),
        ratio_coarse=ratio_coarse,
        local_constant=cert.local_constant,
        envelope_ok=cert.envelope_ok,
        bound_ok=bool(g_ls ** 2 <= bound_local + SLACK),
        coarse_ok=bool(ratio_coarse <= math.sqrt(866.0) + SLACK),
        spline_ok=bool(g_sp <= g_ls + SLACK),
        neglected_tail=float(model.neglected_tail),
        d_n_sub=float(model.sigma[n_sub]) if n_sub < model.M else 0.0,
    )
    report.extra = {
        "certificate": cert.to_dict(),
        "plan": plan.to_dict(),
        "truncation_uncertainty": math.sqrt(model.neglected_tail),
        "bounds": asdict(bounds) if bounds is not None else None,
        "exact_path": exact_path,
    }
    return report
