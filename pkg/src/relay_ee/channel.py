"""Cell geometry, large-scale fading, and joint channel realizations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SystemConfig
from .numerics import (RankDeficientError, pseudo_inverse, sample_cn,
                       sample_lognormal_shadowing, trace_gram_inverse)


@dataclass(frozen=True)
class UserPlacement:
    bs_user_dist_m: np.ndarray     # (K,) radii from the cell center
    relay_user_dist_m: np.ndarray  # (K,) planar distance to the relay
    user_angles_deg: np.ndarray    # (K,) within +/- sector/2 of the bisector


@dataclass(frozen=True)
class ChannelRealization:
    """One joint draw of both hops with the derived traces cached.

    t_b is the squared Frobenius norm of the first K columns of pinv(h_br)
    (only the K data streams are precoded); t_r = tr((h_ru h_ru^H)^{-1}).
    Both feed the power-normalization amplitude factors.
    """

    h_br: np.ndarray      # (N_r, N_b) = sqrt(d_br) * G
    d_br: float
    h_ru: np.ndarray      # (K, N_r), row k scaled by sqrt(d_users[k])
    d_users: np.ndarray   # (K,)
    t_b: float
    t_r: float


def relay_user_distance(radius_m, angle_deg, relay_distance_m):
    """Distance between a user at polar (radius, angle) and the relay on the bisector.

    Law of cosines; broadcasts over arrays.
    """
    th = np.radians(angle_deg)
    return np.sqrt(radius_m ** 2 + relay_distance_m ** 2
                   - 2.0 * radius_m * relay_distance_m * np.cos(th))


def sample_placement(cfg: SystemConfig, rng: np.random.Generator) -> UserPlacement:
    """Drop K users uniformly on the edge ring inside the sector.

    Radius uniform on [ring_min, ring_max], angle uniform on +/- sector/2;
    the relay sits on the sector bisector at relay_distance_m.
    """
    radii = rng.uniform(cfg.user_ring_min_m, cfg.user_ring_max_m, cfg.n_users)
    half = 0.5 * cfg.sector_deg
    angles = rng.uniform(-half, half, cfg.n_users)
    d_rel = relay_user_distance(radii, angles, cfg.relay_distance_m)
    return UserPlacement(radii, d_rel, angles)


def large_scale_gain(distance_m: float, cfg: SystemConfig,
                     rng: np.random.Generator) -> float:
    """Lognormal shadowing times the power-law path gain d^(-eta), referenced to 1 m."""
    if distance_m <= 0:
        raise ValueError("distance must be positive")
    shadow = sample_lognormal_shadowing(rng, cfg.shadowing_sigma_db)
    return shadow * distance_m ** (-cfg.pathloss_exponent)


def sample_channels(cfg: SystemConfig, placement: UserPlacement,
                    rng: np.random.Generator) -> ChannelRealization:
    """Draw both hops and cache the pseudo-inverse traces.

    The draw order is fixed (d_br shadowing, G_br, per-user shadowing, G_ru)
    so a given stream always produces the same realization. Raises
    RankDeficientError on a singular draw; callers decide the resample policy.
    """
    d_br = large_scale_gain(cfg.relay_distance_m, cfg, rng)
    g_br = sample_cn(rng, cfg.n_relay_antennas, cfg.n_bs_antennas)
    h_br = np.sqrt(d_br) * g_br
    d_users = np.array([large_scale_gain(d, cfg, rng)
                        for d in placement.relay_user_dist_m])
    g_ru = sample_cn(rng, cfg.n_users, cfg.n_relay_antennas)
    h_ru = np.sqrt(d_users)[:, None] * g_ru
    # only the first K columns of the BS pseudo-inverse carry data streams
    tilde = pseudo_inverse(h_br)[:, :cfg.n_users]
    t_b = float(np.sum(np.abs(tilde) ** 2))
    t_r = trace_gram_inverse(h_ru)
    return ChannelRealization(h_br, d_br, h_ru, d_users, t_b, t_r)


def sample_channels_with_retry(cfg: SystemConfig, placement: UserPlacement,
                               rng: np.random.Generator,
                               max_attempts: int = 10) -> ChannelRealization:
    """Resample on a rank-deficient draw (probability-zero event), bounded."""
    for _ in range(max_attempts - 1):
        try:
            return sample_channels(cfg, placement, rng)
        except RankDeficientError:
            continue
    return sample_channels(cfg, placement, rng)
