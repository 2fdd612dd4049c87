import math
from dataclasses import replace

import numpy as np
import pytest

from relay_ee import (EEObjective, PowerPair, RandomStream, alpha_b, alpha_r,
                      energy_efficiency, sinr, sum_rate, system_power)
from relay_ee.channel import ChannelRealization
from relay_ee.experiments import slope_sign_changes
from relay_ee.optimize import min_relay_power

from conftest import make_realization


def toy_channel(t_b=1.0, t_r=1.0, k=2):
    """Realization stub for the closed-form paths; matrices are placeholders."""
    return ChannelRealization(np.eye(k), 1.0, np.eye(k), np.ones(k), t_b, t_r)


# --- amplitude factors ------------------------------------------------------

def test_alpha_b_identity_channel():
    assert alpha_b(10.0, toy_channel(t_b=10.0)) == pytest.approx(1.0, rel=1e-12)
    assert alpha_b(0.0, toy_channel()) == 0.0


def test_alpha_b_normalizes_bs_transmit_power(cfg_det):
    # tr E[x_b x_b^h] = a_b^2 * ||first K pinv columns||_F^2 must equal P_b
    cfg = replace(cfg_det, n_relay_antennas=10, n_users=4)
    ch, _ = make_realization(cfg, seed=9)
    p_b = 0.42
    a_b = alpha_b(p_b, ch)
    t_b_indep = np.sum(np.abs(np.linalg.pinv(ch.h_br)[:, :cfg.n_users]) ** 2)
    assert a_b ** 2 * t_b_indep == pytest.approx(p_b, rel=1e-9)


def test_alpha_r_direct_substitution():
    assert alpha_r(4.0, 1.0, 1.0, toy_channel(t_r=0.5)) == pytest.approx(2.0, rel=1e-12)
    assert alpha_r(0.0, 1.0, 1.0, toy_channel()) == 0.0


# --- SINR ---------------------------------------------------------------

def test_sinr_direct_substitution():
    # a_b^2 = 4, a_r^2 = 2, sigma_r^2 = 1, sigma_u^2 = 2 -> gamma = 8/4 = 2
    ch = toy_channel(t_b=1.0, t_r=1.0)
    pp = PowerPair(4.0, 2.0 * (4.0 + 1.0) * 1.0)
    assert sinr(pp, ch, 1.0, 2.0) == pytest.approx(2.0, rel=1e-12)


def test_sinr_zero_user_noise_independent_of_relay_power():
    ch = toy_channel(t_b=2.0, t_r=3.0)
    g1 = sinr(PowerPair(8.0, 1.0), ch, 0.5, 0.0)
    g2 = sinr(PowerPair(8.0, 7.0), ch, 0.5, 0.0)
    assert g1 == pytest.approx(8.0 / 2.0 / 0.5, rel=1e-12)  # a_b^2 / sigma_r^2
    assert g1 == pytest.approx(g2, rel=1e-12)


def test_sinr_zero_power_edges():
    ch = toy_channel()
    assert sinr(PowerPair(0.0, 1.0), ch, 1.0, 1.0) == 0.0
    assert sinr(PowerPair(1.0, 0.0), ch, 1.0, 1.0) == 0.0
    assert sinr(PowerPair(0.0, 0.0), ch, 0.0, 0.0) == 0.0


def test_sinr_monotone_in_channel_scale(cfg_det):
    # scaling h_ru by c >= 1 divides t_r by c^2 and never lowers gamma
    ch, _ = make_realization(cfg_det, seed=5)
    pp = PowerPair(cfg_det.p_b_max_w, cfg_det.p_r_max_w)
    s2 = cfg_det.noise_power_w
    base = sinr(pp, ch, s2, s2)
    for c in (1.0, 1.5, 4.0, 100.0):
        scaled = ChannelRealization(ch.h_br, ch.d_br, c * ch.h_ru, ch.d_users,
                                    ch.t_b, ch.t_r / c ** 2)
        assert sinr(pp, scaled, s2, s2) >= base * (1.0 - 1e-12)


# --- rate --------------------------------------------------------------

def test_sum_rate_known_points(cfg_default):
    per, total = sum_rate(3.0, cfg_default)
    assert per[0] == pytest.approx(180e3, rel=1e-12)
    assert total == pytest.approx(1.8e6, rel=1e-12)
    assert sum_rate(0.0, cfg_default)[1] == 0.0
    assert sum_rate(1.0, cfg_default)[0][0] == pytest.approx(90e3, rel=1e-12)


def test_rates_identical_across_users(cfg_default):
    per, _ = sum_rate(17.3, cfg_default)
    assert np.all(per == per[0])


def test_sum_rate_concave_in_relay_power(cfg_det):
    ch, _ = make_realization(cfg_det, seed=7)
    obj = EEObjective(ch, cfg_det)
    pr = np.linspace(1e-4, cfg_det.p_r_max_w, 200)
    rates = np.array([obj.rate(cfg_det.p_b_max_w, p) for p in pr])
    assert np.all(np.diff(rates) > 0)
    second = np.diff(rates, 2)
    assert np.all(second <= 1e-9 * rates.max())


# --- power model ---------------------------------------------------------

def test_system_power_reference_values(cfg_default):
    # hand-evaluated at (N_b, N_r, K) = (200, 100, 10)
    sp = system_power(cfg_default)
    assert sp.p_c_w == pytest.approx(42.04710176362725, rel=1e-6)
    assert sp.p_cd_w == pytest.approx(7.943282347242815, rel=1e-6)
    assert sp.p_pc_w == pytest.approx(0.10683854166666665, rel=1e-6)
    assert sp.p_sys_w == pytest.approx(sp.p_c_w + sp.p_cd_w + sp.p_pc_w
                                       + cfg_default.p0_w, rel=1e-12)


def test_system_power_optional_syn_term(cfg_default):
    with_syn = replace(cfg_default, include_p_syn=True)
    delta = system_power(with_syn).p_sys_w - system_power(cfg_default).p_sys_w
    assert delta == pytest.approx(cfg_default.p_syn_w, rel=1e-12)


# --- energy efficiency ---------------------------------------------------

def test_ee_is_rate_over_power(cfg_det):
    ch, _ = make_realization(cfg_det, seed=11)
    bd = energy_efficiency(PowerPair(0.5, 0.1), ch, cfg_det)
    assert bd.ee_bits_per_joule == pytest.approx(bd.sum_rate_bps / bd.p_total_w, rel=1e-12)
    assert bd.p_total_w > 0
    assert bd.sum_rate_bps == pytest.approx(bd.rate_per_user_bps.sum(), rel=1e-12)


def test_ee_zero_power_zero_rate(cfg_det):
    ch, _ = make_realization(cfg_det, seed=11)
    bd = energy_efficiency(PowerPair(0.0, 0.0), ch, cfg_det)
    assert bd.gamma == 0.0 and bd.ee_bits_per_joule == 0.0


def test_p_total_affine_in_powers(cfg_det):
    ch, _ = make_realization(cfg_det, seed=11)
    rng = RandomStream(1, 0).generator()
    base = energy_efficiency(PowerPair(0.0, 0.0), ch, cfg_det).p_total_w
    for _ in range(10):
        pb, pr = rng.uniform(0, 1, 2)
        got = energy_efficiency(PowerPair(pb, pr), ch, cfg_det).p_total_w
        assert got == pytest.approx(base + cfg_det.zeta_b * pb + cfg_det.zeta_r * pr,
                                    rel=1e-12)


def test_inverse_amplifier_model(cfg_det):
    ch, _ = make_realization(cfg_det, seed=11)
    inv = replace(cfg_det, amplifier_model="inverse")
    base = energy_efficiency(PowerPair(0.0, 0.0), ch, inv).p_total_w
    got = energy_efficiency(PowerPair(0.3, 0.3), ch, inv).p_total_w
    assert got == pytest.approx(base + 0.3 / 0.3 + 0.3 / 0.3, rel=1e-12)


def test_ee_objective_matches_breakdown(cfg_default):
    ch, _ = make_realization(cfg_default, seed=17)
    obj = EEObjective(ch, cfg_default)
    rng = RandomStream(2, 0).generator()
    for _ in range(20):
        pb = rng.uniform(0, cfg_default.p_b_max_w)
        pr = rng.uniform(0, cfg_default.p_r_max_w)
        bd = energy_efficiency(PowerPair(pb, pr), ch, cfg_default)
        assert obj.ee(pb, pr) == pytest.approx(bd.ee_bits_per_joule, rel=1e-12)
        assert obj.gamma(pb, pr) == pytest.approx(bd.gamma, rel=1e-12)
        assert obj.p_total(pb, pr) == pytest.approx(bd.p_total_w, rel=1e-12)


def test_ee_grid_matches_scalar(cfg_default):
    ch, _ = make_realization(cfg_default, seed=17)
    obj = EEObjective(ch, cfg_default)
    pb = np.linspace(1e-4, cfg_default.p_b_max_w, 7)
    pr = np.linspace(1e-5, cfg_default.p_r_max_w, 5)
    pbm, prm = np.meshgrid(pb, pr, indexing="ij")
    grid = obj.ee_grid(pbm, prm)
    for i in range(len(pb)):
        for j in range(len(pr)):
            assert grid[i, j] == pytest.approx(obj.ee(pb[i], pr[j]), rel=1e-12)


def test_ee_rises_then_falls_over_wide_relay_range(cfg_det):
    # widen the relay cap so the single interior peak falls inside the sweep
    cfg = replace(cfg_det, p_r_max_w=100.0)
    ch, _ = make_realization(cfg, seed=23)
    obj = EEObjective(ch, cfg)
    lo = min_relay_power(cfg.p_b_max_w, ch, cfg)
    pr = np.linspace(lo, cfg.p_r_max_w, 1000)
    ee = obj.ee_grid(np.full_like(pr, cfg.p_b_max_w), pr)
    k = int(np.argmax(ee))
    assert 0 < k < len(pr) - 1
    changes, unimodal = slope_sign_changes(ee)
    assert changes == 1 and unimodal
