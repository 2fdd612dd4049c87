"""Acceptance suite: every exit criterion at its stated tolerance.

Each test prints one CRITERION line. Run with

    pytest tests/test_acceptance.py -v -s

The full suite takes a couple of minutes at desk scale.
"""

import math
from dataclasses import replace

import numpy as np
import pytest

from relay_ee import (EEObjective, PowerPair, RandomStream, SystemConfig,
                      aop, feasible_box, fixed_mode, maximize_1d, pb_ods,
                      quasiconcavity_probe, run_point, sample_channels_with_retry,
                      sample_placement, sinr, system_power, tds,
                      validate_sinr_signal_level)
from relay_ee.cli import main
from relay_ee.experiments import root_min_bs_power, root_min_relay_power
from relay_ee.optimize import (Dimension, InfeasibleError, alternating_maximize,
                               min_bs_power, min_relay_power)
from relay_ee.report import comparison_csv

E_MINUS_1 = math.e - 1.0
SEED = 20190001


def _report(n, ok, detail):
    print(f"CRITERION {n}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


def _realization(cfg, stream):
    rng = RandomStream(SEED, stream).generator()
    placement = sample_placement(cfg, rng)
    return sample_channels_with_retry(cfg, placement, rng), rng


@pytest.fixture(scope="module")
def cfg():
    return SystemConfig().validate()


# -- 1. signal-level model consistency ----------------------------------------

def test_criterion_1_model_consistency(cfg):
    worst_sinr = 0.0
    worst_pow = 0.0
    s2 = cfg.noise_power_w
    pp = PowerPair(cfg.p_b_max_w, cfg.p_r_max_w)
    for t in range(20):
        ch, rng = _realization(cfg, t)
        stats = validate_sinr_signal_level(ch, pp, cfg, rng, n_symbols=100_000)
        g = sinr(pp, ch, s2, s2)
        worst_sinr = max(worst_sinr, float(np.max(np.abs(stats.sinr_per_user - g)) / g))
        worst_pow = max(worst_pow,
                        abs(stats.mean_p_b_w - pp.p_b_w) / pp.p_b_w,
                        abs(stats.mean_p_r_w - pp.p_r_w) / pp.p_r_w)
    ok = worst_sinr <= 0.02 and worst_pow <= 0.01
    _report(1, ok, f"20 realizations x 1e5 symbols: worst SINR deviation "
                   f"{worst_sinr:.2%} (tol 2%), worst power deviation "
                   f"{worst_pow:.2%} (tol 1%)")


# -- 2. power-model exactness --------------------------------------------------

def test_criterion_2_power_model(cfg):
    sp = system_power(cfg)
    targets = (("p_c", sp.p_c_w, 42.04710176362725),
               ("p_cd", sp.p_cd_w, 7.943282347242815),
               ("p_pc", sp.p_pc_w, 0.10683854166666665))
    worst = max(abs(got - want) / want for _, got, want in targets)
    _report(2, worst <= 1e-6,
            f"(N_b,N_r,K)=(200,100,10): worst relative error {worst:.2e} "
            f"against hand-derived 42.047/7.943/0.10684 W (tol 1e-6)")


# -- 3. closed-form bounds vs root finding --------------------------------------

def test_criterion_3_bound_correctness(cfg):
    worst_rel = 0.0
    worst_eq = 0.0
    s2 = cfg.noise_power_w
    n_ok = 0
    for t in range(100):
        ch, _ = _realization(cfg, 200 + t)
        try:
            feasible_box(ch, cfg)
        except InfeasibleError:
            continue
        n_ok += 1
        prm = min_relay_power(cfg.p_b_max_w, ch, cfg)
        pbm = min_bs_power(cfg.p_r_max_w, ch, cfg)
        worst_rel = max(
            worst_rel,
            abs(prm - root_min_relay_power(cfg.p_b_max_w, ch, cfg)) / prm,
            abs(pbm - root_min_bs_power(cfg.p_r_max_w, ch, cfg)) / pbm)
        for pair in (PowerPair(cfg.p_b_max_w, prm), PowerPair(pbm, cfg.p_r_max_w)):
            rate = 0.5 * math.log2(1.0 + sinr(pair, ch, s2, s2))
            worst_eq = max(worst_eq, abs(rate - cfg.r_min_bps_hz))
    ok = n_ok >= 90 and worst_rel <= 1e-8 and worst_eq <= 1e-10
    _report(3, ok, f"{n_ok}/100 feasible realizations: worst bound deviation "
                   f"{worst_rel:.2e} (tol 1e-8), worst QoS equality gap "
                   f"{worst_eq:.2e} bps/Hz (tol 1e-10)")


# -- 4. optimizer correctness on analytic toys -----------------------------------

def test_criterion_4_analytic_toys():
    f = lambda p: math.log1p(p) / (1.0 + p)
    p, _, _, _ = maximize_1d(f, 0.0, 10.0, kappa=1.1, eps_rel=1e-14,
                             width_tol=1e-5, max_iters=200, fd_rel_step=1e-6)
    err_1d = abs(p - E_MINUS_1)
    const = lambda _: (0.0, 10.0)
    x, y, _, _, iters = alternating_maximize(
        lambda a, b: f(a) * f(b), 5.0, 5.0, y_interval=const, x_interval=const,
        kappa=1.1, eps_rel=1e-12, max_bisect_iters=200, max_outer_iters=10,
        fd_rel_step=1e-6)
    err_2d = max(abs(x - E_MINUS_1), abs(y - E_MINUS_1))
    ok = err_1d <= 1e-4 and err_2d <= 1e-3 and iters <= 3
    _report(4, ok, f"bisection argmax error {err_1d:.2e} (tol 1e-4); "
                   f"alternating error {err_2d:.2e} in {iters} iterations "
                   f"(tol 1e-3, <= 3)")


# -- 5. near-optimality of the nested and alternating searches --------------------

@pytest.fixture(scope="module")
def trials_grid200(cfg):
    cfg200 = replace(cfg, grid_points=200)
    rows = []
    for t in range(200):
        ch, _ = _realization(cfg200, 1000 + t)
        try:
            feasible_box(ch, cfg200)
        except InfeasibleError:
            continue
        rows.append((tds(ch, cfg200).ee,
                     pb_ods("PBR-ODSB", ch, cfg200).ee,
                     aop(ch, cfg200).ee))
    return np.array(rows)


def test_criterion_5_near_optimal_ee(trials_grid200):
    tds_ee, pbr_ee, aop_ee = trials_grid200.mean(axis=0)
    gap = abs(pbr_ee - tds_ee) / tds_ee
    ratio = aop_ee / tds_ee
    ok = gap <= 0.02 and ratio >= 0.90
    _report(5, ok, f"{len(trials_grid200)} trials, 200-point grids: "
                   f"|EE(PBR-ODSB)-EE(TDS)|/EE(TDS) = {gap:.3%} (tol 2%), "
                   f"EE(AOP)/EE(TDS) = {ratio:.3f} (floor 0.90)")


# -- 6./7. fixed-power orderings over a sweep -------------------------------------

@pytest.fixture(scope="module")
def sweep_modes(cfg):
    points = {}
    for n_r in (50, 100, 200):
        cfg_v = replace(cfg, n_relay_antennas=n_r).validate()
        rows = []
        for t in range(200):
            ch, _ = _realization(cfg_v, 3000 + t)
            try:
                feasible_box(ch, cfg_v)
            except InfeasibleError:
                continue
            obj = EEObjective(ch, cfg_v)

            def run(r):
                return (r.ee, obj.rate(r.best.p_b_w, r.best.p_r_w) / cfg_v.bandwidth_hz)

            rows.append((run(tds(ch, cfg_v)),
                         run(fixed_mode("MaxBS", ch, cfg_v)),
                         run(fixed_mode("MaxRelay", ch, cfg_v))))
        points[n_r] = np.array(rows)   # (trials, 3 algorithms, [ee, se])
    return points


def test_criterion_6_max_power_se_dominance(sweep_modes):
    # when the optimum pins the relay power at its cap, MaxRelay and TDS tie in
    # theory; the continuous bisection and the grid argmax then sit at slightly
    # different BS powers on a flat EE peak (measured tie noise ~3e-4), so the
    # per-trial ordering carries a 1e-3 relative tolerance
    trial_tol, agg_tol = 1e-3, 1e-4
    worst = math.inf
    per_trial_ok = True
    for n_r, rows in sweep_modes.items():
        se_tds, se_maxbs, se_maxrel = rows[:, 0, 1], rows[:, 1, 1], rows[:, 2, 1]
        per_trial_ok &= bool(np.all(se_maxbs >= se_tds * (1 - trial_tol))
                             and np.all(se_maxrel >= se_tds * (1 - trial_tol)))
        worst = min(worst, se_maxbs.mean() / se_tds.mean(),
                    se_maxrel.mean() / se_tds.mean())
    ok = per_trial_ok and worst >= 1 - agg_tol
    _report(6, ok, f"SE(MaxBS), SE(MaxRelay) >= SE(TDS) per trial (tol {trial_tol}) "
                   f"and in aggregate at N_r in (50,100,200); worst aggregate "
                   f"ratio {worst:.6f} (>= {1 - agg_tol})")


def test_criterion_7_max_power_ee_suboptimal(sweep_modes):
    tol = 1e-4
    worst = 0.0
    for n_r, rows in sweep_modes.items():
        ee_tds, ee_maxbs, ee_maxrel = rows[:, 0, 0], rows[:, 1, 0], rows[:, 2, 0]
        worst = max(worst, ee_maxbs.mean() / ee_tds.mean(),
                    ee_maxrel.mean() / ee_tds.mean())
    ok = worst <= 1 + tol
    _report(7, ok, f"mean EE(MaxBS), mean EE(MaxRelay) <= mean EE(TDS) at every "
                   f"sweep point; worst aggregate ratio {worst:.6f} (<= {1 + tol})")


# -- 8. complexity of the alternating search --------------------------------------

def test_criterion_8_aop_complexity(cfg):
    table = run_point(cfg, n_trials=200, master_seed=SEED)   # grid_points = 100
    csv_text = comparison_csv(table)
    rows = {line.split(",")[2]: line.split(",")
            for line in csv_text.strip().split("\n")[1:]}
    evals_aop = float(rows["AOP"][7])
    evals_tds = float(rows["TDS"][7])
    ratio = evals_aop / evals_tds
    ok = ratio <= 0.05
    _report(8, ok, f"compare CSV at 100-point grids over 200 trials: "
                   f"mean evals AOP/TDS = {evals_aop:.0f}/{evals_tds:.0f} = "
                   f"{ratio:.3%} (tol 5%)")


# -- 9. quasi-concavity probe ------------------------------------------------------

def test_criterion_9_quasiconcavity(cfg):
    good, checked, failures = quasiconcavity_probe(cfg, SEED, 500)
    frac = good / checked
    ok = checked >= 450 and frac >= 0.95
    detail = (f"{good}/{checked} realizations with a single slope-sign change "
              f"per power axis ({frac:.1%}, threshold 95%)")
    if failures:
        detail += f"; failures logged: trial ids {failures}"
    _report(9, ok, detail)


# -- 10. end-to-end determinism ------------------------------------------------------

def test_criterion_10_byte_identical_compare(tmp_path):
    out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["compare", "--trials", "25", "--seed", "99"]
    assert main(args + ["--out", str(out_a)]) == 0
    assert main(args + ["--out", str(out_b)]) == 0
    same = out_a.read_bytes() == out_b.read_bytes()
    _report(10, same, f"two seeded compare runs: byte-identical = {same} "
                      f"({out_a.stat().st_size} bytes)")
