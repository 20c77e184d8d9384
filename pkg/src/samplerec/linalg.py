"""Small dense linear-algebra helpers shared across modules."""

import numpy as np

DENSE_LIMIT = 1024


def gram(rows, weights=None):
    """Return ``sum_i w_i v_i v_i^*`` for the rows ``v_i`` of `rows`."""
    rows = np.asarray(rows)
    if weights is not None:
        rows = rows * np.sqrt(np.asarray(weights, dtype=float))[:, None]
    return rows.T @ rows.conj()


def hermitian_part(a):
    return 0.5 * (a + a.conj().T)


def power_bracket(a, tol=1e-10, maxiter=10000, seed=0):
    """Power iteration for the spectral norm of a Hermitian matrix.

    Returns ``(lo, hi)``: ``lo = ||a v||`` at the final unit iterate `v`
    (a certified lower bound on the norm) and ``hi = |v^* a v| + r`` with
    `r` the eigen-residual, which bounds the eigenvalue the iteration
    converged to from above.
    """
    a = hermitian_part(np.asarray(a, dtype=complex))
    n = a.shape[0]
    if n == 0:
        return 0.0, 0.0
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(maxiter):
        w = a @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0, 0.0
        lam_new = abs(np.vdot(v, w))
        v = w / nw
        if abs(lam_new - lam) <= tol * max(1.0, lam_new):
            lam = lam_new
            break
        lam = lam_new
    w = a @ v
    rq = np.vdot(v, w).real
    resid = np.linalg.norm(w - rq * v)
    return float(np.linalg.norm(w)), float(abs(rq) + resid)


def spectral_norm_hermitian(a, tol=1e-10):
    """Spectral norm of a Hermitian matrix.

    Dense eigensolve up to ``DENSE_LIMIT``; power iteration beyond.
    """
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    if a.shape[0] <= DENSE_LIMIT:
        ev = np.linalg.eigvalsh(hermitian_part(a))
        return float(max(abs(ev[0]), abs(ev[-1])))
    lo, hi = power_bracket(a, tol=tol)
    return hi


def extreme_eigenvalues(a):
    """Smallest and largest eigenvalue of a Hermitian matrix."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0, 0.0
    ev = np.linalg.eigvalsh(hermitian_part(a))
    return float(ev[0]), float(ev[-1])
