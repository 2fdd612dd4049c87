"""Power-allocation optimizers over the relay-downlink EE objective.

The EE surface is treated as quasi-concave in each power variable separately,
which licenses slope-sign bisection per dimension. On top of that one engine
this module builds: the per-dimension bisection search, 1-D and 2-D grid
searches, the bisection-inside-grid combinations, the alternating
two-dimension scheme, and the fixed-power baseline modes. Every optimizer
reports how many scalar EE evaluations it spent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .channel import ChannelRealization
from .config import SystemConfig
from .model import EEObjective, PowerPair

# slope differences below this (relative to the function scale) count as flat
SLOPE_DEADBAND = 1e-12
# smallest finite-difference probing step, in watts
H_FLOOR = 1e-9
# bisection stops once the bracket is this fraction of the dimension's cap
WIDTH_FRAC = 1e-6
# slack, in bps/Hz, when checking an achieved rate against the QoS target
QOS_RATE_SLACK = 1e-12


class Dimension(Enum):
    BS = "BS"
    RELAY = "RELAY"


class InfeasibleError(Exception):
    """No allocation in range can satisfy the per-user QoS constraint."""


@dataclass(frozen=True)
class FeasibleBox:
    """Outer box of the QoS-feasible region (each minimum at the other cap)."""

    p_b_min_w: float
    p_b_max_w: float
    p_r_min_w: float
    p_r_max_w: float


@dataclass(frozen=True)
class OptimizationResult:
    best: PowerPair
    ee: float                 # bits/J at `best`
    evals: int                # scalar EE-objective evaluations spent
    iters: int
    feasible: bool
    algorithm: str
    ee_sequence: tuple = ()   # per-outer-iteration EE, alternating scheme only


FIXED_MODES = ("MaxBS", "MinBS", "MaxRelay", "MinRelay")
VARIANT_PBR_ODSB = "PBR-ODSB"
VARIANT_PBB_ODSR = "PBB-ODSR"


# ---------------------------------------------------------------------------
# QoS feasibility bounds
# ---------------------------------------------------------------------------

def qos_sinr_threshold(cfg: SystemConfig) -> float:
    """SINR needed for (1/2) log2(1+g) >= r_min, i.e. 2^(2 r_min) - 1."""
    return 2.0 ** (2.0 * cfg.r_min_bps_hz) - 1.0


def _cap_bound(p_min: float, p_max: float, which: str) -> float:
    # an equality-binding bound may land a few ulp above the cap; snap it back
    if p_min > p_max:
        if p_min <= p_max * (1.0 + 1e-9):
            return p_max
        raise InfeasibleError(
            f"minimum feasible {which} power {p_min:.6e} W exceeds the cap {p_max:.6e} W")
    return p_min


def min_relay_power(p_b_w: float, ch: ChannelRealization, cfg: SystemConfig) -> float:
    """Smallest relay power meeting the QoS at the given BS power.

    Inverting the SINR in p_r with threshold G and M = (a_b^2 + sigma^2) t_r
    gives p_r_min = G M sigma^2 / (a_b^2 - G sigma^2), valid only while the
    first hop can support the target (a_b^2 > G sigma^2).
    """
    gth = qos_sinr_threshold(cfg)
    if gth == 0.0:
        return 0.0
    sigma2 = cfg.noise_power_w
    a_b2 = p_b_w / ch.t_b
    denom = a_b2 - gth * sigma2
    if denom <= 0.0:
        raise InfeasibleError(
            f"first hop too weak for the QoS: a_b^2={a_b2:.3e} <= "
            f"threshold*sigma^2={gth * sigma2:.3e}")
    m = (a_b2 + sigma2) * ch.t_r
    return _cap_bound(gth * m * sigma2 / denom, cfg.p_r_max_w, "relay")


def min_bs_power(p_r_w: float, ch: ChannelRealization, cfg: SystemConfig) -> float:
    """Smallest BS power meeting the QoS at the given relay power.

    With a = p_b/t_b the SINR reads a p_r / (sigma^2 p_r + sigma^2 t_r (a + sigma^2));
    solving for a gives p_b_min = t_b G sigma^2 (p_r + sigma^2 t_r) / (p_r - G sigma^2 t_r),
    valid only while p_r > G sigma^2 t_r (the SINR saturates in p_b otherwise).
    """
    gth = qos_sinr_threshold(cfg)
    if gth == 0.0:
        return 0.0
    sigma2 = cfg.noise_power_w
    denom = p_r_w - gth * sigma2 * ch.t_r
    if denom <= 0.0:
        raise InfeasibleError(
            f"relay power {p_r_w:.3e} W cannot reach the QoS at any BS power")
    p_min = ch.t_b * gth * sigma2 * (p_r_w + sigma2 * ch.t_r) / denom
    return _cap_bound(p_min, cfg.p_b_max_w, "BS")


def feasible_box(ch: ChannelRealization, cfg: SystemConfig) -> FeasibleBox:
    """Bounding box of the feasible region; raises InfeasibleError when empty."""
    p_r_min = min_relay_power(cfg.p_b_max_w, ch, cfg)
    p_b_min = min_bs_power(cfg.p_r_max_w, ch, cfg)
    return FeasibleBox(p_b_min, cfg.p_b_max_w, p_r_min, cfg.p_r_max_w)


def meets_qos(gamma: float, cfg: SystemConfig) -> bool:
    return 0.5 * math.log2(1.0 + gamma) >= cfg.r_min_bps_hz - QOS_RATE_SLACK


# ---------------------------------------------------------------------------
# Slope-sign bisection engine
# ---------------------------------------------------------------------------

def _slope_sign(f: Callable[[float], float], p: float, lo: float, hi: float,
                rel_step: float):
    """Sign of f' at p by central difference, one-sided at the interval edges.

    Returns (sign, f_estimate) where the estimate is the probe-pair average
    (within O(h^2) of f(p)). Differences below SLOPE_DEADBAND of the local
    function scale report 0.
    """
    h = max(H_FLOOR, rel_step * p)
    a, b = max(lo, p - h), min(hi, p + h)
    if b <= a:
        return 0, f(p)
    fa, fb = f(a), f(b)
    d = fb - fa
    if abs(d) < SLOPE_DEADBAND * max(abs(fa), abs(fb)):
        return 0, 0.5 * (fa + fb)
    return (1 if d > 0.0 else -1), 0.5 * (fa + fb)


def maximize_1d(f: Callable[[float], float], lo: float, hi: float, *,
                kappa: float, eps_rel: float, width_tol: float,
                max_iters: int, fd_rel_step: float,
                expansion_seed_frac: float = 1e-9):
    """Slope-sign bisection maximizer for a quasi-concave f on [lo, hi].

    Phase 1 tests the slope at lo and returns it when already non-increasing;
    a mirror test at hi returns the cap when the function is still rising
    there (same answer the geometric walk would reach, minus the walk).
    Phase 2 expands geometrically by kappa from lo until the slope turns,
    bracketing the peak. Phase 3 bisects the bracket with the slope sign as
    the descent oracle until the EE gap across the bracket falls below
    eps_rel (relative), the bracket is narrower than width_tol, or the
    iteration cap hits. Returns (p, f(p), evals, iters).
    """
    evals = 0

    def ev(p: float) -> float:
        nonlocal evals
        evals += 1
        return f(p)

    def slope(p: float):
        nonlocal evals
        h = max(H_FLOOR, fd_rel_step * p)
        a, b = max(lo, p - h), min(hi, p + h)
        if b <= a:
            return 0, ev(p)
        fa, fb = ev(a), ev(b)
        d = fb - fa
        if abs(d) < SLOPE_DEADBAND * max(abs(fa), abs(fb)):
            return 0, 0.5 * (fa + fb)
        return (1 if d > 0.0 else -1), 0.5 * (fa + fb)

    if hi - lo <= max(width_tol, 0.0):
        return lo, ev(lo), evals, 0

    s_lo, _ = slope(lo)
    if s_lo <= 0:
        return lo, ev(lo), evals, 0
    s_hi, f_hi = slope(hi)
    if s_hi >= 0:
        return hi, ev(hi), evals, 0

    # expansion: slope(lo) > 0 and slope(hi) < 0 here, so a turn exists
    expand_iters = 0
    p_prev, est_prev = lo, None
    p_cur = lo * kappa if lo > 0.0 else hi * expansion_seed_frac
    est_cur = f_hi
    while p_cur < hi:
        s, est_cur = slope(p_cur)
        expand_iters += 1
        if s <= 0:
            break
        p_prev, est_prev = p_cur, est_cur
        p_cur = p_cur * kappa
    else:
        p_cur, est_cur = hi, f_hi

    lo_b, hi_b = p_prev, min(p_cur, hi)
    est_lo = est_prev if est_prev is not None else ev(lo_b)
    est_hi = est_cur

    bisect_iters = 0
    while (abs(est_hi - est_lo) > eps_rel * max(abs(est_lo), abs(est_hi))
           and hi_b - lo_b > width_tol and bisect_iters < max_iters):
        mid = 0.5 * (lo_b + hi_b)
        s, est = slope(mid)
        bisect_iters += 1
        if s >= 0:
            lo_b, est_lo = mid, est
        else:
            hi_b, est_hi = mid, est

    p_star = 0.5 * (lo_b + hi_b)
    return p_star, ev(p_star), evals, expand_iters + bisect_iters


def grid_max_1d(f: Callable[[float], float], lo: float, hi: float, n: int,
                feasible: Optional[Callable[[float], bool]] = None):
    """Best of f over n linearly spaced points, skipping infeasible ones.

    Ties keep the earlier (lower-power) point. Returns (p, f(p), evals);
    (None, -inf, 0-ish) when every point is infeasible.
    """
    if n < 2:
        raise ValueError("grid needs at least 2 points")
    best_p, best_v, evals = None, -math.inf, 0
    for p in np.linspace(lo, hi, n):
        p = float(p)
        if feasible is not None and not feasible(p):
            continue
        v = f(p)
        evals += 1
        if v > best_v:
            best_p, best_v = p, v
    return best_p, best_v, evals


def grid_search_2d(f_grid: Callable[[np.ndarray, np.ndarray], np.ndarray],
                   x: np.ndarray, y: np.ndarray,
                   feasible_mask: Optional[np.ndarray] = None):
    """Vectorized exhaustive search of f_grid over the x-by-y mesh.

    Returns (i, j, value, n_feasible). The first maximum in row-major order
    wins ties, i.e. lowest x then lowest y. Raises InfeasibleError when the
    mask kills every point.
    """
    xm, ym = np.meshgrid(x, y, indexing="ij")
    values = f_grid(xm, ym)
    if feasible_mask is None:
        feasible_mask = np.ones_like(values, dtype=bool)
    if not feasible_mask.any():
        raise InfeasibleError("no grid point satisfies the constraints")
    masked = np.where(feasible_mask, values, -np.inf)
    i, j = np.unravel_index(int(np.argmax(masked)), masked.shape)
    return int(i), int(j), float(masked[i, j]), int(feasible_mask.sum())


# ---------------------------------------------------------------------------
# EE-bound optimizers
# ---------------------------------------------------------------------------

def _axis_interval(dim: Dimension, fixed_other_w: float, box: FeasibleBox,
                   ch: ChannelRealization, cfg: SystemConfig):
    """QoS-feasible interval along `dim` when the other power is pinned.

    The lower end is recomputed at the pinned power (not taken from the box)
    so every point of the interval satisfies the QoS.
    """
    if dim is Dimension.RELAY:
        return min_relay_power(fixed_other_w, ch, cfg), box.p_r_max_w
    return min_bs_power(fixed_other_w, ch, cfg), box.p_b_max_w


def _axis_objective(obj: EEObjective, dim: Dimension, fixed_other_w: float):
    if dim is Dimension.RELAY:
        return lambda p: obj.ee(fixed_other_w, p)
    return lambda p: obj.ee(p, fixed_other_w)


def _make_pair(dim: Dimension, p: float, fixed_other_w: float) -> PowerPair:
    if dim is Dimension.RELAY:
        return PowerPair(fixed_other_w, p)
    return PowerPair(p, fixed_other_w)


def ee_slope_sign(dim: Dimension, pp: PowerPair, ch: ChannelRealization,
                  cfg: SystemConfig) -> int:
    """Sign (-1, 0, +1) of the EE partial derivative along `dim` at pp."""
    obj = EEObjective(ch, cfg)
    f = _axis_objective(obj, dim, pp.p_r_w if dim is Dimension.BS else pp.p_b_w)
    p = pp.p_b_w if dim is Dimension.BS else pp.p_r_w
    hi = cfg.p_b_max_w if dim is Dimension.BS else cfg.p_r_max_w
    sign, _ = _slope_sign(f, p, 0.0, hi, cfg.fd_rel_step)
    return sign


def pba(dim: Dimension, fixed_other_w: float, box: FeasibleBox,
        ch: ChannelRealization, cfg: SystemConfig) -> OptimizationResult:
    """Slope-sign bisection over one power dimension at a fixed other power."""
    lo, hi = _axis_interval(dim, fixed_other_w, box, ch, cfg)
    obj = EEObjective(ch, cfg)
    f = _axis_objective(obj, dim, fixed_other_w)
    p, fp, evals, iters = maximize_1d(
        f, lo, hi, kappa=cfg.kappa, eps_rel=cfg.eps_ee,
        width_tol=WIDTH_FRAC * hi, max_iters=cfg.max_bisect_iters,
        fd_rel_step=cfg.fd_rel_step)
    return OptimizationResult(_make_pair(dim, p, fixed_other_w), fp, evals,
                              iters, True, f"PBA-{dim.value}")


def ods_grid(dim: Dimension, fixed_other_w: float, box: FeasibleBox,
             ch: ChannelRealization, cfg: SystemConfig,
             n: Optional[int] = None) -> OptimizationResult:
    """Exhaustive 1-D search along `dim` at a fixed other power."""
    n = cfg.grid_points if n is None else n
    lo, hi = _axis_interval(dim, fixed_other_w, box, ch, cfg)
    obj = EEObjective(ch, cfg)
    f = _axis_objective(obj, dim, fixed_other_w)

    def ok(p):
        pair = _make_pair(dim, p, fixed_other_w)
        return meets_qos(obj.gamma(pair.p_b_w, pair.p_r_w), cfg)

    p, v, evals = grid_max_1d(f, lo, hi, n, feasible=ok)
    if p is None:
        raise InfeasibleError("every grid point violates the QoS")
    return OptimizationResult(_make_pair(dim, p, fixed_other_w), v, evals, 1,
                              True, f"ODS-{dim.value}")


def pb_ods(variant: str, ch: ChannelRealization, cfg: SystemConfig) -> OptimizationResult:
    """Bisection in one dimension nested inside a grid over the other.

    PBR-ODSB runs the bisection on the relay power at each of grid_points BS
    powers; PBB-ODSR mirrors the roles. Evaluation counts accumulate over the
    inner searches.
    """
    box = feasible_box(ch, cfg)
    if variant == VARIANT_PBR_ODSB:
        inner, outer_lo, outer_hi = Dimension.RELAY, box.p_b_min_w, box.p_b_max_w
    elif variant == VARIANT_PBB_ODSR:
        inner, outer_lo, outer_hi = Dimension.BS, box.p_r_min_w, box.p_r_max_w
    else:
        raise ValueError(f"unknown variant {variant!r}")
    best = None
    evals = 0
    outer_feasible = 0
    for po in np.linspace(outer_lo, outer_hi, cfg.grid_points):
        try:
            r = pba(inner, float(po), box, ch, cfg)
        except InfeasibleError:
            continue
        evals += r.evals
        outer_feasible += 1
        if best is None or r.ee > best.ee:
            best = r
    if best is None:
        raise InfeasibleError("every outer grid point is infeasible")
    return OptimizationResult(best.best, best.ee, evals, outer_feasible, True, variant)


def tds(ch: ChannelRealization, cfg: SystemConfig) -> OptimizationResult:
    """Two-dimensional exhaustive grid search (the optimal baseline).

    grid_points x grid_points over the feasible box, each point QoS-checked;
    evals counts the feasible points examined.
    """
    box = feasible_box(ch, cfg)
    obj = EEObjective(ch, cfg)
    pb = np.linspace(box.p_b_min_w, box.p_b_max_w, cfg.grid_points)
    pr = np.linspace(box.p_r_min_w, box.p_r_max_w, cfg.grid_points)
    pbm, prm = np.meshgrid(pb, pr, indexing="ij")
    rate_ok = (0.5 * np.log2(1.0 + obj.gamma_grid(pbm, prm))
               >= cfg.r_min_bps_hz - QOS_RATE_SLACK)
    i, j, value, n_feasible = grid_search_2d(obj.ee_grid, pb, pr, rate_ok)
    return OptimizationResult(PowerPair(float(pb[i]), float(pr[j])), value,
                              n_feasible, 1, True, "TDS")


def alternating_maximize(f2: Callable[[float, float], float],
                         init_x: float, init_y: float, *,
                         y_interval: Callable[[float], tuple],
                         x_interval: Callable[[float], tuple],
                         kappa: float, eps_rel: float,
                         width_frac: float = WIDTH_FRAC,
                         max_bisect_iters: int, max_outer_iters: int,
                         fd_rel_step: float):
    """Coordinate ascent on f2(x, y) with slope-sign bisection per coordinate.

    Each outer iteration maximizes over y at the pinned x, refreshes the x
    interval at the new y, maximizes over x, and refreshes the y interval;
    the interval callbacks realize the per-iteration feasibility updates of
    the EE problem (constant boxes do for analytic objectives). Stops once
    the objective moves by less than eps_rel (relative) across an outer
    iteration. A sub-problem whose pinned coordinate is unchanged reuses the
    previous solution; it is a pure function of its inputs.

    Returns (x, y, value_sequence, evals, outer_iters).
    """
    evals = 0

    def ev(x, y):
        nonlocal evals
        evals += 1
        return f2(x, y)

    x, y = init_x, init_y
    seq = [ev(x, y)]
    y_key = x_key = None
    y_sol = x_sol = None
    iters = 0
    for _ in range(max_outer_iters):
        if y_key != x:
            lo, hi = y_interval(x)
            p, fp, used, _ = maximize_1d(
                lambda t: f2(x, t), lo, hi, kappa=kappa, eps_rel=eps_rel,
                width_tol=width_frac * hi, max_iters=max_bisect_iters,
                fd_rel_step=fd_rel_step)
            evals += used
            y_key, y_sol = x, p
        y = y_sol
        if x_key != y:
            lo, hi = x_interval(y)
            p, fp, used, _ = maximize_1d(
                lambda t: f2(t, y), lo, hi, kappa=kappa, eps_rel=eps_rel,
                width_tol=width_frac * hi, max_iters=max_bisect_iters,
                fd_rel_step=fd_rel_step)
            evals += used
            x_key, x_sol = y, p
        x = x_sol
        iters += 1
        seq.append(ev(x, y))
        if abs(seq[-1] - seq[-2]) <= eps_rel * abs(seq[-1]):
            break
    return x, y, seq, evals, iters


def aop(ch: ChannelRealization, cfg: SystemConfig,
        init: Optional[PowerPair] = None) -> OptimizationResult:
    """Alternate the per-dimension bisection over both powers until the EE converges.

    Each outer iteration optimizes the relay power at the current BS power,
    refreshes the BS-power QoS minimum, then optimizes the BS power at the
    new relay power and refreshes the relay minimum. The default start is the
    midpoint of the feasible box.
    """
    box = feasible_box(ch, cfg)
    if init is None:
        init = PowerPair(0.5 * (box.p_b_min_w + box.p_b_max_w),
                         0.5 * (box.p_r_min_w + box.p_r_max_w))
    if not (box.p_b_min_w <= init.p_b_w <= box.p_b_max_w
            and box.p_r_min_w <= init.p_r_w <= box.p_r_max_w):
        raise ValueError(f"init {init} outside the feasible box {box}")
    obj = EEObjective(ch, cfg)
    p_b, p_r, seq, evals, iters = alternating_maximize(
        obj.ee, init.p_b_w, init.p_r_w,
        y_interval=lambda pb: (min_relay_power(pb, ch, cfg), box.p_r_max_w),
        x_interval=lambda pr: (min_bs_power(pr, ch, cfg), box.p_b_max_w),
        kappa=cfg.kappa, eps_rel=cfg.eps_ee,
        max_bisect_iters=cfg.max_bisect_iters,
        max_outer_iters=cfg.max_aop_iters, fd_rel_step=cfg.fd_rel_step)
    return OptimizationResult(PowerPair(p_b, p_r), seq[-1], evals, iters,
                              True, "AOP", tuple(seq))


def fixed_mode(mode: str, ch: ChannelRealization, cfg: SystemConfig) -> OptimizationResult:
    """Pin one power at its cap or QoS minimum; bisection-optimize the other."""
    box = feasible_box(ch, cfg)
    if mode == "MaxBS":
        r = pba(Dimension.RELAY, box.p_b_max_w, box, ch, cfg)
    elif mode == "MinBS":
        r = pba(Dimension.RELAY, box.p_b_min_w, box, ch, cfg)
    elif mode == "MaxRelay":
        r = pba(Dimension.BS, box.p_r_max_w, box, ch, cfg)
    elif mode == "MinRelay":
        r = pba(Dimension.BS, box.p_r_min_w, box, ch, cfg)
    else:
        raise ValueError(f"unknown fixed mode {mode!r}")
    return OptimizationResult(r.best, r.ee, r.evals, r.iters, True, mode)
