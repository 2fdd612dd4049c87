"""Self-check suite: model invariants verified against independent oracles."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import List

import numpy as np

from .channel import (large_scale_gain, relay_user_distance,
                      sample_channels_with_retry, sample_placement)
from .config import SystemConfig
from .experiments import (quasiconcavity_probe, root_min_bs_power,
                          root_min_relay_power, validate_sinr_signal_level)
from .model import PowerPair, sinr
from .numerics import RandomStream, pseudo_inverse
from .optimize import (InfeasibleError, feasible_box, min_bs_power,
                       min_relay_power)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _geometry_check(cfg: SystemConfig) -> CheckResult:
    """Path-loss law behaves: unit gain at 1 m, monotone decay, correct ratio."""
    det = replace(cfg, shadowing_sigma_db=0.0)
    rng = RandomStream(0, 0).generator()
    g1 = large_scale_gain(1.0, det, rng)
    ratio = large_scale_gain(200.0, det, rng) / large_scale_gain(100.0, det, rng)
    expected_ratio = 2.0 ** (-cfg.pathloss_exponent)
    dists = np.linspace(100.0, 900.0, 50)
    gains = np.array([large_scale_gain(d, det, rng) for d in dists])
    monotone = bool(np.all(np.diff(gains) < 0.0))
    d_col = relay_user_distance(900.0, 0.0, 425.0)
    ok = (abs(g1 - 1.0) < 1e-12
          and abs(ratio - expected_ratio) < 1e-12 * expected_ratio
          and monotone
          and abs(d_col - 475.0) < 1e-9)
    return CheckResult(
        "geometry", ok,
        f"gain(1m)={g1:.3g}, doubling ratio={ratio:.6g} "
        f"(expected {expected_ratio:.6g}), monotone={monotone}, "
        f"collinear relay-user distance={d_col:.6g} m")


def _sample_fixed_realization(cfg: SystemConfig, seed: int, stream: int):
    rng = RandomStream(seed, stream).generator()
    placement = sample_placement(cfg, rng)
    ch = sample_channels_with_retry(cfg, placement, rng)
    return ch, rng


def _zf_check(cfg: SystemConfig, seed: int) -> CheckResult:
    ch, _ = _sample_fixed_realization(cfg, seed, 0)
    k = cfg.n_users
    err_ru = float(np.max(np.abs(ch.h_ru @ pseudo_inverse(ch.h_ru) - np.eye(k))))
    n_r = cfg.n_relay_antennas
    err_br = float(np.max(np.abs(ch.h_br @ pseudo_inverse(ch.h_br) - np.eye(n_r))))
    ok = err_ru <= 1e-8 and err_br <= 1e-8
    return CheckResult("zf_exactness", ok,
                       f"|H pinv(H) - I| = {err_ru:.2e} (relay-user), "
                       f"{err_br:.2e} (BS-relay); tolerance 1e-8")


def _signal_level_check(cfg: SystemConfig, seed: int, n_symbols: int) -> List[CheckResult]:
    ch, rng = _sample_fixed_realization(cfg, seed, 1)
    pp = PowerPair(cfg.p_b_max_w, cfg.p_r_max_w)
    stats = validate_sinr_signal_level(ch, pp, cfg, rng, n_symbols)
    pb_err = abs(stats.mean_p_b_w - pp.p_b_w) / pp.p_b_w
    pr_err = abs(stats.mean_p_r_w - pp.p_r_w) / pp.p_r_w
    norm_ok = pb_err <= 0.01 and pr_err <= 0.01
    norm = CheckResult("power_normalization", norm_ok,
                       f"E||x_b||^2 off by {pb_err:.2%}, E||x_r||^2 off by "
                       f"{pr_err:.2%}; tolerance 1%")
    sigma2 = cfg.noise_power_w
    if sigma2 == 0.0:
        # noiseless: exact symbol recovery, empirical SINR is the inf sentinel
        ok = bool(np.all(np.isinf(stats.sinr_per_user)))
        return [norm, CheckResult("sinr_closed_form", ok,
                                  "noiseless exact-recovery mode: "
                                  f"all-inf={ok}")]
    g_cf = sinr(pp, ch, sigma2, sigma2)
    rel = float(np.max(np.abs(stats.sinr_per_user - g_cf)) / g_cf)
    ok = rel <= 0.02
    return [norm, CheckResult("sinr_closed_form", ok,
                              f"max per-user deviation {rel:.2%} from the "
                              f"closed form ({g_cf:.4g}); tolerance 2%")]


def _bounds_check(cfg: SystemConfig, seed: int, n_realizations: int) -> CheckResult:
    worst_rel = 0.0
    worst_eq = 0.0
    checked = 0
    degenerate = 0
    for t in range(n_realizations):
        ch, _ = _sample_fixed_realization(cfg, seed, 100 + t)
        try:
            feasible_box(ch, cfg)
        except InfeasibleError:
            continue
        prm = min_relay_power(cfg.p_b_max_w, ch, cfg)
        pbm = min_bs_power(cfg.p_r_max_w, ch, cfg)
        if prm == 0.0 and pbm == 0.0:
            # zero QoS target or zero noise: the bounds collapse, no equation to check
            degenerate += 1
            continue
        checked += 1
        prm_root = root_min_relay_power(cfg.p_b_max_w, ch, cfg)
        pbm_root = root_min_bs_power(cfg.p_r_max_w, ch, cfg)
        worst_rel = max(worst_rel,
                        abs(prm - prm_root) / prm_root,
                        abs(pbm - pbm_root) / pbm_root)
        sigma2 = cfg.noise_power_w
        for pp in (PowerPair(cfg.p_b_max_w, prm), PowerPair(pbm, cfg.p_r_max_w)):
            rate = 0.5 * math.log2(1.0 + sinr(pp, ch, sigma2, sigma2))
            worst_eq = max(worst_eq, abs(rate - cfg.r_min_bps_hz))
    ok = worst_rel <= 1e-8 and worst_eq <= 1e-10
    return CheckResult("bounds_vs_root", ok,
                       f"{checked} realizations ({degenerate} degenerate); worst "
                       f"closed-form vs root deviation {worst_rel:.2e} (tol 1e-8), "
                       f"worst QoS equality gap {worst_eq:.2e} bps/Hz (tol 1e-10)")


def _quasiconcavity_check(cfg: SystemConfig, seed: int, n_realizations: int) -> CheckResult:
    good, checked, failures = quasiconcavity_probe(cfg, seed, n_realizations)
    frac = good / checked if checked else 0.0
    ok = checked > 0 and frac >= 0.95
    detail = (f"{good}/{checked} realizations single-peaked per axis "
              f"({frac:.1%}, threshold 95%)")
    if failures:
        detail += f"; failing trial ids {failures[:10]}"
    return CheckResult("quasiconcavity_probe", ok, detail)


def run_validation_suite(cfg: SystemConfig, seed: int, n_symbols: int = 100_000,
                         n_bound_checks: int = 20,
                         n_probe: int = 100) -> List[CheckResult]:
    """Run every invariant check; returns one CheckResult per check."""
    checks = [_geometry_check(cfg), _zf_check(cfg, seed)]
    checks.extend(_signal_level_check(cfg, seed, n_symbols))
    checks.append(_bounds_check(cfg, seed, n_bound_checks))
    checks.append(_quasiconcavity_check(cfg, seed, n_probe))
    return checks
