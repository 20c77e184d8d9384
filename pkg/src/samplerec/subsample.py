"""Reduction of a concentrated batch to O(m) information vectors.

The pipeline mirrors the existence argument step by step: an isometric
reduction to finite dimension, identity padding with artificial rank-one
terms, and a selection step.  The selection used in production is a
constructive two-barrier greedy; an exhaustive partition search checks the
shape of the partition statement on tiny instances.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import InvalidArgument, OracleScopeExceeded, SparsifyFailure
from .linalg import extreme_eigenvalues, gram, hermitian_part

RANK_TOL = 1e-10
ENVELOPE = {"c1": 43200.0, "c2": 50.0, "c3": 21600.0}
DEFAULT_TARGETS = (0.2, 4.0)
DEFAULT_BUDGET_FACTOR = 60


@dataclass(frozen=True)
class FiniteReduction:
    """Isometry ``U = diag(I_m, U0)`` and reduced vectors ``z_i = U^* y_i``."""

    m: int
    U0: np.ndarray
    z: np.ndarray
    E_hat: np.ndarray
    rank_warning: bool = False

    @property
    def p(self):
        return self.z.shape[1]

    @property
    def n(self):
        return self.z.shape[0]

    def U(self):
        M = self.m + self.U0.shape[0]
        out = np.zeros((M, self.p), dtype=complex)
        out[: self.m, : self.m] = np.eye(self.m)
        out[self.m:, self.m:] = self.U0
        return out


def reduce_to_finite(batch, m=None):
    """Orthonormal basis of the span of the tails, then ``z_i = U^* y_i``.

    The tail basis comes from a singular value decomposition of the stacked
    tails; directions with singular value below ``RANK_TOL`` times the
    largest are dropped.
    """
    m = batch.m if m is None else int(m)
    y = batch.info_vectors
    tails = y[:, m:]
    rank_warning = False
    if tails.shape[1] == 0 or not np.any(tails):
        U0 = np.zeros((tails.shape[1], 0), dtype=complex)
    else:
        # columns of tails.T are the tail vectors
        u, s, _ = np.linalg.svd(tails.T, full_matrices=False)
        keep = s > RANK_TOL * s[0]
        rank_warning = bool(np.any((s > 1e-14 * s[0]) & ~keep))
        U0 = u[:, keep]
    z = np.concatenate([y[:, :m], tails @ U0.conj()], axis=1)
    lam = np.asarray(batch.target[m:], dtype=float)
    e_prime = hermitian_part(U0.conj().T @ (lam[:, None] * U0))
    p = m + U0.shape[1]
    E_hat = np.zeros((p, p), dtype=complex)
    E_hat[:m, :m] = np.eye(m)
    E_hat[m:, m:] = e_prime
    return FiniteReduction(m=m, U0=U0, z=z, E_hat=E_hat, rank_warning=rank_warning)


@dataclass(frozen=True)
class PaddedSystem:
    z_all: np.ndarray
    origin_mask: np.ndarray
    t_vectors: np.ndarray
    replication: np.ndarray
    n: int
    m: int

    @property
    def q(self):
        return self.z_all.shape[0]

    @property
    def p(self):
        return self.z_all.shape[1]


def pad_identity(red, n=None, m=None):
    """Append artificial vectors so that the scaled rank-one sum
    approximates the identity as well as the original sum approximated
    the reduced target."""
    n = red.n if n is None else int(n)
    m = red.m if m is None else int(m)
    p = red.p
    rest = np.eye(p - m) - red.E_hat[m:, m:]
    if p > m:
        lam, vec = np.linalg.eigh(hermitian_part(rest))
    else:
        lam, vec = np.zeros(0), np.zeros((0, 0))
    if np.any(lam < -1e-10):
        raise InvalidArgument("reduced target has an eigenvalue above one")
    # tiny negative eigenvalues are rounding noise of the eigensolve
    lam = np.clip(lam, 0.0, None)
    t_list, reps, art = [], [], []
    for j in range(len(lam)):
        if lam[j] <= 0.0:
            continue
        t = np.zeros(p, dtype=complex)
        t[m:] = math.sqrt(lam[j]) * vec[:, j]
        nj = int(math.ceil(n / (2.0 * m) * float(np.vdot(t, t).real)))
        t_list.append(t)
        reps.append(nj)
        art.extend([math.sqrt(n / nj) * t] * nj)
    t_vectors = np.array(t_list).reshape(len(t_list), p)
    z_all = red.z if not art else np.concatenate([red.z, np.array(art)], axis=0)
    mask = np.zeros(len(z_all), dtype=bool)
    mask[: red.n] = True
    return PaddedSystem(z_all=z_all, origin_mask=mask, t_vectors=t_vectors,
                        replication=np.array(reps, dtype=int), n=n, m=m)


@dataclass(frozen=True)
class PartitionResult:
    parts: list
    lower: float
    upper: float
    premise_ok: bool
    params: dict = field(default_factory=dict)

    @property
    def found(self):
        return self.parts is not None


def loewner_ok(vectors, lower, upper, tol=1e-10):
    lo, hi = extreme_eigenvalues(gram(vectors))
    return lo >= lower - tol and hi <= upper + tol


def partition_oracle(sys, delta, alpha, beta, max_q=14, lower_const=25.0, upper_const=3600.0,
                     tol=1e-10):
    """Exhaustive search for a partition into at most three parts with
    ``lower_const*delta <= sum_{i in part} z_i z_i^* <= upper_const*(beta/alpha)*delta``.

    Every subset is scored once by a batched eigensolve; partitions are then
    assembled from admissible subsets.
    """
    z = sys.z_all if isinstance(sys, PaddedSystem) else np.asarray(sys)
    q, p = z.shape
    if q > max_q:
        raise OracleScopeExceeded(f"q={q} exceeds the exhaustive limit {max_q}")
    lower = lower_const * delta
    upper = upper_const * (beta / alpha) * delta
    norms = np.sum(np.abs(z) ** 2, axis=1)
    premise_ok = bool(beta >= alpha > 100 * delta > 0 and np.all(norms <= delta + tol))
    params = {"delta": float(delta), "alpha": float(alpha), "beta": float(beta)}
    if q == 0:
        return PartitionResult(None, lower, upper, premise_ok, params)
    outer = z[:, :, None] * z.conj()[:, None, :]
    full = (1 << q) - 1
    sums = np.zeros((full + 1, p, p), dtype=complex)
    for mask in range(1, full + 1):
        low = mask & -mask
        sums[mask] = sums[mask ^ low] + outer[low.bit_length() - 1]
    ev = np.linalg.eigvalsh(sums[1:])
    good = np.zeros(full + 1, dtype=bool)
    good[1:] = (ev[:, 0] >= lower - tol) & (ev[:, -1] <= upper + tol)

    def members(mask):
        return [i for i in range(q) if mask >> i & 1]

    parts = None
    if good[full]:
        parts = [members(full)]
    if parts is None:
        for a in range(1, full, 2):
            if good[a] and good[full ^ a]:
                parts = [members(a), members(full ^ a)]
                break
    if parts is None:
        for a in range(1, full, 2):
            if not good[a]:
                continue
            rest = full ^ a
            low = rest & -rest
            sub = rest
            while sub:
                if sub & low and sub != rest and good[sub] and good[rest ^ sub]:
                    parts = [members(a), members(sub), members(rest ^ sub)]
                    break
                sub = (sub - 1) & rest
            if parts is not None:
                break
    return PartitionResult(parts, lower, upper, premise_ok, params)


@dataclass(frozen=True)
class SubsampleCertificate:
    """Extremal eigenvalues of ``sum_{i in J} y_i y_i^*`` normalized by m.

    `head_floor` is the smallest eigenvalue of the head block, `full_cap`
    the largest eigenvalue of the whole matrix and `tail_cap` the largest
    eigenvalue of the tail block.
    """

    J: np.ndarray
    m: int
    head_floor: float
    full_cap: float
    tail_cap: float
    budget: int = None
    targets: tuple = DEFAULT_TARGETS
    constants: dict = field(default_factory=lambda: dict(ENVELOPE))

    @property
    def size(self):
        return len(self.J)

    @property
    def envelope_ok(self):
        c = self.constants
        return bool(self.head_floor >= c["c2"] and self.full_cap <= c["c3"]
                    and self.size <= c["c1"] * self.m)

    @property
    def targets_ok(self):
        c2, c3 = self.targets
        budget_ok = self.budget is None or self.size <= self.budget
        return bool(self.head_floor >= c2 and self.full_cap <= c3 and budget_ok)

    @property
    def local_constant(self):
        """Constant multiplying ``gamma_m^2`` in the local error bound."""
        if self.envelope_ok:
            return 1.0 + self.constants["c3"] / self.constants["c2"]
        if self.head_floor <= 0:
            return math.inf
        return 1.0 + self.full_cap / self.head_floor

    def to_dict(self):
        return {
            "J": [int(j) for j in self.J],
            "size": self.size,
            "head_floor": self.head_floor,
            "full_cap": self.full_cap,
            "tail_cap": self.tail_cap,
            "budget": self.budget,
            "targets": list(self.targets),
            "envelope": dict(self.constants),
            "envelope_ok": self.envelope_ok,
            "envelope_size_ok": bool(self.size <= self.constants["c1"] * self.m),
            "targets_ok": self.targets_ok,
            "local_constant": self.local_constant,
        }


def _certificate_from_rows(rows, J, m, budget, targets):
    J = np.sort(np.asarray(J, dtype=int))
    sub = rows[J]
    if len(J) == 0:
        return SubsampleCertificate(J, m, 0.0, 0.0, 0.0, budget, tuple(targets))
    head = gram(sub[:, :m])
    head_floor = 0.0 if len(J) < m else max(0.0, extreme_eigenvalues(head)[0])
    # nonzero spectrum of sum y y^* equals that of the |J| x |J| Gram
    small = sub.conj() @ sub.T
    full_cap = extreme_eigenvalues(small)[1]
    tail = sub[:, m:]
    tail_cap = extreme_eigenvalues(tail.conj() @ tail.T)[1] if tail.shape[1] else 0.0
    return SubsampleCertificate(J, m, head_floor / m, full_cap / m, tail_cap / m,
                                budget, tuple(targets))


def certify(batch, J, m=None, budget=None, targets=DEFAULT_TARGETS):
    """Dense-eigensolve certificate of the subset `J` of the batch."""
    m = batch.m if m is None else int(m)
    J = np.asarray(J, dtype=int)
    if len(J) and (J.min() < 0 or J.max() >= batch.n):
        raise InvalidArgument("index set outside the batch")
    return _certificate_from_rows(batch.info_vectors, J, m, budget, targets)


def greedy_sparsify(sys, m=None, budget=None, targets=DEFAULT_TARGETS, lower_shift=1.0):
    """Two-barrier greedy selection.

    Keeps ``A = sum_{i in J} z_i z_i^*`` strictly below the upper barrier
    ``u = c3' m`` and drives the head block ``B = A_{<m}`` up, scoring each
    candidate by the decrease of the lower potential
    ``tr (B + s I)^-1`` minus the increase of the upper potential
    ``tr (u I - A)^-1`` (both by rank-one updates).  Selection stops when no
    candidate lowers the combined potential or the budget is used up; the
    lowest index wins ties.  Artificial padding vectors carry no head mass
    and can only raise the upper potential, so only original indices are
    candidates.
    """
    m = sys.m if m is None else int(m)
    c2, c3 = targets
    budget = DEFAULT_BUDGET_FACTOR * m if budget is None else int(budget)
    z = sys.z_all[sys.origin_mask]
    n, p = z.shape
    cert_all = _certificate_from_rows(z, np.arange(n), m, budget, targets)
    if n <= budget and cert_all.targets_ok:
        return cert_all
    u = c3 * m
    A = np.zeros((p, p), dtype=complex)
    chosen = np.zeros(n, dtype=bool)
    order = []
    eye_p = np.eye(p)
    eye_m = np.eye(m)
    while len(order) < budget:
        R = np.linalg.inv(u * eye_p - A)
        S = np.linalg.inv(A[:m, :m] + lower_shift * eye_m)
        RZ = z @ R.T
        a = np.einsum("ij,ij->i", z.conj(), RZ).real
        up = np.sum(np.abs(RZ) ** 2, axis=1) / np.where(a < 1, 1 - a, 1.0)
        h = z[:, :m]
        SH = h @ S.T
        b = np.einsum("ij,ij->i", h.conj(), SH).real
        low = np.sum(np.abs(SH) ** 2, axis=1) / (1 + b)
        score = low - up
        score[(a >= 1) | chosen] = -np.inf
        best = int(np.argmax(score))
        if not score[best] > 0:
            break
        chosen[best] = True
        order.append(best)
        A = A + np.outer(z[best], z[best].conj())
    cert = _certificate_from_rows(z, np.array(order, dtype=int), m, budget, targets)
    if not cert.targets_ok:
        raise SparsifyFailure(
            f"greedy selection of {cert.size} points missed targets "
            f"(head_floor={cert.head_floor:.4g}, full_cap={cert.full_cap:.4g})",
            certificate=cert)
    return cert
