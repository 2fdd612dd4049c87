"""Closed-form link model: amplitude factors, SINR, sum rate, power, and EE."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .channel import ChannelRealization
from .config import SystemConfig


class PowerPair(NamedTuple):
    p_b_w: float
    p_r_w: float


@dataclass(frozen=True)
class SystemPowerBreakdown:
    p_c_w: float     # RF chains, averaged over the two half-duplex slots
    p_cd_w: float    # coding/decoding
    p_pc_w: float    # precoding arithmetic
    p_sys_w: float   # total static consumption


@dataclass(frozen=True)
class EEBreakdown:
    """Everything the EE objective produces for one allocation on one realization."""

    gamma: float
    rate_per_user_bps: np.ndarray
    sum_rate_bps: float
    p_c_w: float
    p_cd_w: float
    p_pc_w: float
    p_sys_w: float
    p_total_w: float
    ee_bits_per_joule: float


def alpha_b(p_b_w: float, ch: ChannelRealization) -> float:
    """BS amplitude factor sqrt(P_b / t_b) pinning the per-slot transmit power."""
    return math.sqrt(p_b_w / ch.t_b)


def alpha_r(p_r_w: float, a_b: float, sigma_r2_w: float,
            ch: ChannelRealization) -> float:
    """Relay amplitude factor sqrt(P_r / ((a_b^2 + sigma_r^2) t_r))."""
    if p_r_w == 0.0:
        return 0.0
    return math.sqrt(p_r_w / ((a_b * a_b + sigma_r2_w) * ch.t_r))


def sinr(pp: PowerPair, ch: ChannelRealization,
         sigma_r2_w: float, sigma_u2_w: float) -> float:
    """Post-ZF SINR a_b^2 a_r^2 / (a_r^2 sigma_r^2 + sigma_u^2), equal for all users."""
    a_b2 = pp.p_b_w / ch.t_b
    if pp.p_r_w == 0.0 or a_b2 + sigma_r2_w == 0.0:
        a_r2 = 0.0   # relay transmits nothing / receives nothing to amplify
    else:
        a_r2 = pp.p_r_w / ((a_b2 + sigma_r2_w) * ch.t_r)
    num = a_b2 * a_r2
    den = a_r2 * sigma_r2_w + sigma_u2_w
    if den == 0.0:
        return 0.0 if num == 0.0 else math.inf
    return num / den


def sum_rate(gamma: float, cfg: SystemConfig):
    """Per-user rate (W/2) log2(1 + gamma) and the K-user sum, both in bps.

    The 1/2 pays for the two half-duplex slots; under ZF every user sees the
    same SINR so the per-user rates are identical.
    """
    r_k = 0.5 * cfg.bandwidth_hz * math.log2(1.0 + gamma)
    return np.full(cfg.n_users, r_k), cfg.n_users * r_k


def system_power(cfg: SystemConfig) -> SystemPowerBreakdown:
    """Static consumption: RF chains, coding, precoding arithmetic, overhead.

    Each hop is active for half the frame, hence the 1/2 averaging of the
    two per-slot RF terms and of the two precoding terms.
    """
    n_b, n_r, k = cfg.n_bs_antennas, cfg.n_relay_antennas, cfg.n_users
    p_c1 = n_b * cfg.p_tx_w + n_r * cfg.p_rx_w
    p_c2 = n_r * cfg.p_tx_w + k * cfg.p_rx_w
    p_c = 0.5 * (p_c1 + p_c2)
    p_cd = 0.5 * k * (cfg.p_cod_w + cfg.p_dec_w)
    lt = cfg.ops_per_joule * cfg.coherence_time_s
    p_pc_bs = (3.0 * n_b ** 2 * n_r + 2.0 * n_b * n_r) / (2.0 * lt) + n_r ** 3 / (3.0 * lt)
    p_pc_r = (3.0 * n_r ** 2 * k + 2.0 * n_r * k) / (2.0 * lt) + n_r ** 3 / (3.0 * lt)
    p_pc = 0.5 * (p_pc_bs + p_pc_r)
    p_sys = p_c + p_cd + p_pc + cfg.p0_w
    if cfg.include_p_syn:
        p_sys += cfg.p_syn_w
    return SystemPowerBreakdown(p_c, p_cd, p_pc, p_sys)


def amplifier_power(p_w: float, zeta: float, model: str) -> float:
    """Amplifier draw for transmit power p: zeta*p ('literal') or p/zeta ('inverse')."""
    return zeta * p_w if model == "literal" else p_w / zeta


def energy_efficiency(pp: PowerPair, ch: ChannelRealization,
                      cfg: SystemConfig) -> EEBreakdown:
    """Full EE breakdown (delivered bits per consumed joule) for one allocation."""
    sigma2 = cfg.noise_power_w
    g = sinr(pp, ch, sigma2, sigma2)
    per_user, total_rate = sum_rate(g, cfg)
    sp = system_power(cfg)
    p_total = (amplifier_power(pp.p_b_w, cfg.zeta_b, cfg.amplifier_model)
               + amplifier_power(pp.p_r_w, cfg.zeta_r, cfg.amplifier_model)
               + sp.p_sys_w)
    return EEBreakdown(g, per_user, total_rate, sp.p_c_w, sp.p_cd_w, sp.p_pc_w,
                       sp.p_sys_w, p_total, total_rate / p_total)


class EEObjective:
    """Fast EE evaluators bound to one (realization, config) pair.

    Caches everything that does not depend on the power pair. ``ee`` counts
    its own scalar evaluations (the complexity currency of the optimizers);
    the vectorized helpers leave accounting to their callers. Matches
    ``energy_efficiency`` up to floating-point association.
    """

    def __init__(self, ch: ChannelRealization, cfg: SystemConfig):
        self.ch = ch
        self.cfg = cfg
        self.sigma2 = cfg.noise_power_w
        self.t_b = ch.t_b
        self.t_r = ch.t_r
        self.p_sys = system_power(cfg).p_sys_w
        self.k_w_half = 0.5 * cfg.n_users * cfg.bandwidth_hz
        if cfg.amplifier_model == "literal":
            self.c_b, self.c_r = cfg.zeta_b, cfg.zeta_r
        else:
            self.c_b, self.c_r = 1.0 / cfg.zeta_b, 1.0 / cfg.zeta_r
        self.evals = 0

    def gamma(self, p_b: float, p_r: float) -> float:
        a = p_b / self.t_b
        den = self.sigma2 * p_r + self.sigma2 * self.t_r * (a + self.sigma2)
        if den == 0.0:
            return 0.0 if a * p_r == 0.0 else math.inf
        return a * p_r / den

    def rate(self, p_b: float, p_r: float) -> float:
        """Sum rate in bps (reporting helper, not counted as an evaluation)."""
        return self.k_w_half * math.log2(1.0 + self.gamma(p_b, p_r))

    def p_total(self, p_b: float, p_r: float) -> float:
        return self.c_b * p_b + self.c_r * p_r + self.p_sys

    def ee(self, p_b: float, p_r: float) -> float:
        self.evals += 1
        rate = self.k_w_half * math.log2(1.0 + self.gamma(p_b, p_r))
        return rate / (self.c_b * p_b + self.c_r * p_r + self.p_sys)

    def gamma_grid(self, p_b, p_r) -> np.ndarray:
        p_b = np.asarray(p_b, dtype=float)
        p_r = np.asarray(p_r, dtype=float)
        a = p_b / self.t_b
        den = self.sigma2 * p_r + self.sigma2 * self.t_r * (a + self.sigma2)
        safe = np.where(den > 0.0, den, 1.0)
        zero_den = np.where(a * p_r == 0.0, 0.0, np.inf)
        return np.where(den > 0.0, a * p_r / safe, zero_den)

    def ee_grid(self, p_b, p_r) -> np.ndarray:
        """Vectorized EE over broadcastable power arrays."""
        rate = self.k_w_half * np.log2(1.0 + self.gamma_grid(p_b, p_r))
        return rate / (self.c_b * np.asarray(p_b) + self.c_r * np.asarray(p_r) + self.p_sys)
