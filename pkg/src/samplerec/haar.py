"""Fooling functions for dyadic Haar-type classes.

Points live on the dyadic grid ``j / 2^G`` and are handled as integers
``j``; interval membership at level ``l`` is ``j >> (G - l)``, so every
length, norm and integral below is computed from exact dyadic geometry.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import AdversaryScopeExceeded, InvalidArgument, InvalidConfig

GRID_LEVEL_MAX = 52


@dataclass(frozen=True)
class HaarClassSpec:
    """Coefficient class with per-level budgets.

    ``variant="power"``: ``sum_k |c_lk|^2 <= (l+1)^(-2 beta)``.
    ``variant="loglog"``: ``sum_k |c_lk|^2 <= (l+1)^-2 log(l+e)^-2``
    (finite coefficient sequences only).
    """

    beta: float = 2.0
    L_max: int = 40
    grid_level: int = 20
    variant: str = "power"

    def __post_init__(self):
        if self.variant not in ("power", "loglog"):
            raise InvalidConfig(f"unknown Haar variant {self.variant!r}")
        if self.variant == "power" and not self.beta > 1:
            raise InvalidConfig("power variant needs beta > 1")
        if not 1 <= self.grid_level <= GRID_LEVEL_MAX:
            raise InvalidConfig(f"grid level must lie in [1, {GRID_LEVEL_MAX}]")

    def level_weight(self, levels):
        """Square root of the budget at each level."""
        levels = np.asarray(levels, dtype=float)
        if self.variant == "power":
            return (levels + 1.0) ** (-self.beta)
        return 1.0 / ((levels + 1.0) * np.log(levels + math.e))


@dataclass
class AdversarialFunction:
    """``f = c0 - f_L`` with ``f_L = sum_l a_l sum_{k in J_l} chi_lk``.

    Levels coarser than the grid are resolved on a breakpoint partition;
    in the unit grid cells holding sample points the finer levels are
    nested intervals anchored at the point and are summed ring by ring.
    """

    c0: float
    levels: np.ndarray
    coef: np.ndarray
    active: np.ndarray
    h: float
    L: int
    top: int
    l2_norm: float
    integral: float
    integral_fL: float
    point_values: np.ndarray
    budgets: np.ndarray
    info: dict = field(default_factory=dict)

    @property
    def max_abs_at_points(self):
        return float(np.max(np.abs(self.point_values))) if len(self.point_values) else 0.0

    @property
    def lower_bound(self):
        """``c0 - |int f_L|``; never exceeds ``int f <= ||f||_2``."""
        return self.c0 - abs(self.integral_fL)


def snap_points(points, grid_level):
    """Integer grid indices of points given on ``[0, 1)``."""
    x = np.asarray(points)
    if np.issubdtype(x.dtype, np.integer):
        j = x.astype(np.int64)
    else:
        scaled = x.astype(float) * 2.0 ** grid_level
        j = np.floor(scaled).astype(np.int64)
        if np.any(scaled != j):
            raise InvalidArgument("points must be multiples of 2^-grid_level")
    if np.any(j < 0) or np.any(j >= 2 ** grid_level):
        raise InvalidArgument("points must lie in [0, 1)")
    return j


def choose_L(n):
    """Coarsest excluded level: ``ceil(log2(4 n))``."""
    return int(math.ceil(math.log2(4 * n)))


def _occupied(j, G, level):
    return np.unique(j >> (G - level)) if level <= G else None


def haar_adversary(spec, points, epsilon=0.1, max_levels=10 ** 7):
    """Function in the class vanishing at all `points` with large L2 norm.

    ``power`` variant: levels ``L < l <= L_max`` with ``L = ceil(log2 4n)``,
    coefficients ``|J_l|^-1/2 (l+1)^-beta`` on occupied intervals, and
    ``c0 = h = f_L(x_i)``.  ``loglog`` variant: ``L`` is the smallest level
    with ``sum_{l>L} 2^(-l/2) w_l <= epsilon``, the top level ``N`` is
    increased until ``h >= 1``, ``f_L`` is divided by ``h`` and ``c0 = 1``.
    """
    G = spec.grid_level
    j = snap_points(points, G)
    n = len(j)
    if n == 0:
        raise InvalidArgument("need at least one point")
    if n >= 2 ** spec.L_max:
        raise AdversaryScopeExceeded(f"n={n} needs more than {spec.L_max} levels")
    distinct = len(np.unique(j))

    def occupied_count(levels):
        out = np.full(len(levels), distinct, dtype=float)
        for i in np.nonzero(levels < G)[0]:
            out[i] = len(_occupied(j, G, int(levels[i])))
        return out

    if spec.variant == "power":
        L = choose_L(n)
        top = spec.L_max
        if top <= L:
            raise AdversaryScopeExceeded(f"L_max={top} leaves no level above L={L}")
        levels = np.arange(L + 1, top + 1)
        counts = occupied_count(levels)
        raw = counts ** -0.5 * spec.level_weight(levels)
        h = math.fsum(raw)
        coef = raw
        c0 = h
    else:
        L = 0
        while True:
            far = np.arange(L + 1, L + 1 + 4096)
            if math.fsum(2.0 ** (-far / 2) * spec.level_weight(far)) <= epsilon:
                break
            L += 1
        chunks, acc, top = [], 0.0, None
        start = L + 1
        limit = L + max_levels
        while start <= limit:
            levels = np.arange(start, min(start + 2 ** 16, limit + 1))
            raw = occupied_count(levels) ** -0.5 * spec.level_weight(levels)
            csum = acc + np.cumsum(raw)
            hit = np.nonzero(csum >= 1.0)[0]
            if len(hit):
                chunks.append(raw[: hit[0] + 1])
                top = int(levels[hit[0]])
                break
            chunks.append(raw)
            acc = float(csum[-1])
            start = int(levels[-1]) + 1
        if top is None:
            raise AdversaryScopeExceeded(
                f"partial sum stays below 1 up to level {limit} for n={n}")
        raw = np.concatenate(chunks)
        levels = np.arange(L + 1, top + 1)
        h = math.fsum(raw)
        coef = raw / h
        c0 = 1.0
    counts = occupied_count(levels)
    f = _assemble(j, G, levels, coef, c0, counts)
    budgets = (counts * coef ** 2)
    info = {"n": n, "distinct": distinct, "grid_level": G, "variant": spec.variant}
    return AdversarialFunction(c0=c0, levels=levels, coef=coef, active=counts, h=h, L=L,
                               top=int(levels[-1]), budgets=budgets, info=info, **f)


def _assemble(j, G, levels, coef, c0, counts):
    """Exact L2 norm, integral and point values of ``c0 - f_L``."""
    shallow = levels < G
    deep = ~shallow
    # integral of f_L: each occupied interval has length 2^-l
    integral_fL = math.fsum(coef * counts * np.exp2(-levels.astype(float)))
    # coarse partition in units of 2^-G
    size = 1 << G
    starts, ends, vals = [], [], []
    for lev, a in zip(levels[shallow], coef[shallow]):
        occ = _occupied(j, G, int(lev))
        width = 1 << (G - int(lev))
        starts.append(occ * width)
        ends.append((occ + 1) * width)
        vals.append(np.full(len(occ), a))
    pts = np.unique(j)
    bps = [np.array([0, size]), pts, pts + 1]
    if starts:
        bps += starts + ends
    bps = np.unique(np.concatenate(bps))
    delta = np.zeros(len(bps))
    if starts:
        s = np.concatenate(starts)
        e = np.concatenate(ends)
        v = np.concatenate(vals)
        np.add.at(delta, np.searchsorted(bps, s), v)
        np.add.at(delta, np.searchsorted(bps, e), -v)
    cell_fL = np.cumsum(delta)[:-1]
    cell_len = np.diff(bps).astype(float) * 2.0 ** -G
    is_point_cell = np.isin(bps[:-1], pts) & (np.diff(bps) == 1)
    f_cells = c0 - cell_fL
    norm_sq_terms = [f_cells[~is_point_cell] ** 2 * cell_len[~is_point_cell]]
    point_values = {}
    deep_levels = levels[deep].astype(float)
    deep_coef = coef[deep]
    S = np.cumsum(deep_coef)
    for idx in np.nonzero(is_point_cell)[0]:
        base = cell_fL[idx]
        if len(deep_levels) == 0:
            norm_sq_terms.append(np.array([(c0 - base) ** 2 * 2.0 ** -G]))
            point_values[int(bps[idx])] = c0 - base
            continue
        first = deep_levels[0]
        # part of the unit cell outside the first deep interval
        outer = 2.0 ** -G - 2.0 ** -first
        ring_len = np.exp2(-(deep_levels + 1.0))
        ring_len[-1] = 2.0 ** -deep_levels[-1]
        ring_val = c0 - (base + S)
        norm_sq_terms.append(np.array([(c0 - base) ** 2 * outer]))
        norm_sq_terms.append(ring_val ** 2 * ring_len)
        point_values[int(bps[idx])] = ring_val[-1]
    l2 = math.sqrt(math.fsum(np.concatenate(norm_sq_terms)))
    return {
        "l2_norm": l2,
        "integral": c0 - integral_fL,
        "integral_fL": integral_fL,
        "point_values": np.array([point_values[int(x)] for x in j]),
    }


def class_budget_ok(spec, fn, tol=1e-12):
    """Per-level coefficient budgets, including the constant at level 0."""
    ok = np.all(fn.budgets <= spec.level_weight(fn.levels) ** 2 * (1 + tol))
    return bool(ok and fn.c0 ** 2 <= float(spec.level_weight(0)) ** 2 * (1 + tol) and fn.L >= 0)
