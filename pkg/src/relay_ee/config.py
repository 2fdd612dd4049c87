"""Scenario configuration: cell constants, power model, and solver controls."""

from __future__ import annotations

from dataclasses import dataclass, fields

from .numerics import dbm_to_watts


class ConfigError(ValueError):
    """Invalid configuration value or combination."""


@dataclass(frozen=True)
class SystemConfig:
    """All scenario constants plus algorithm tolerances and grid controls.

    Defaults reproduce the reference LTE-like scenario: cell-edge users on an
    800-900 m ring of a 900 m cell served through a half-duplex AF relay on
    the sector bisector, one 180 kHz subchannel, -100 dBm per-antenna noise.
    """

    # antennas / users
    n_relay_antennas: int = 100          # N_r
    antenna_ratio: float = 2.0           # alpha >= 1; N_b = round(alpha * N_r)
    n_users: int = 10                    # K single-antenna users

    # geometry
    cell_radius_m: float = 900.0
    user_ring_min_m: float = 800.0
    user_ring_max_m: float = 900.0
    sector_deg: float = 60.0
    relay_distance_m: float = 425.0

    # propagation
    pathloss_exponent: float = 3.5       # eta
    shadowing_sigma_db: float = 8.0      # 0 disables shadowing

    # radio
    bandwidth_hz: float = 180e3          # W
    noise_power_dbm: float = -100.0      # per-antenna, both hops

    # power budgets and QoS
    p_b_max_w: float = dbm_to_watts(29.0)
    p_r_max_w: float = dbm_to_watts(23.0)
    r_min_bps_hz: float = 1.0            # per-user minimum rate

    # consumption model
    zeta_b: float = 0.3                  # amplifier efficiency coefficients
    zeta_r: float = 0.3
    amplifier_model: str = "literal"     # "literal": zeta*P; "inverse": P/zeta
    p_tx_w: float = dbm_to_watts(24.0)   # RF chain, per transmit antenna
    p_rx_w: float = dbm_to_watts(19.0)   # RF chain, per receive antenna
    p_cod_w: float = dbm_to_watts(29.0)  # coding, per user
    p_dec_w: float = dbm_to_watts(29.0)  # decoding, per user
    p0_w: float = dbm_to_watts(27.0)     # backhaul and cooling overhead
    p_syn_w: float = dbm_to_watts(28.0)
    include_p_syn: bool = False          # P_syn is not part of the consumption sum
    coherence_time_s: float = 0.032      # T
    ops_per_joule: float = 1e9           # L, processing capability

    # solver controls
    kappa: float = 1.1                   # geometric expansion step, > 1
    eps_ee: float = 1e-4                 # relative EE convergence tolerance
    grid_points: int = 100               # per dimension in grid searches
    max_bisect_iters: int = 100
    max_aop_iters: int = 20
    fd_rel_step: float = 1e-6            # relative step for slope-sign probing

    # reproducibility
    seed: int = 42

    @property
    def n_bs_antennas(self) -> int:
        """N_b = round(alpha * N_r)."""
        return int(round(self.antenna_ratio * self.n_relay_antennas))

    @property
    def noise_power_w(self) -> float:
        return dbm_to_watts(self.noise_power_dbm)

    def validate(self) -> "SystemConfig":
        """Raise ConfigError on any violated invariant; return self otherwise."""
        if self.n_users < 1:
            raise ConfigError("n_users must be >= 1")
        if self.n_relay_antennas < self.n_users:
            raise ConfigError(
                f"n_relay_antennas={self.n_relay_antennas} must be >= "
                f"n_users={self.n_users}")
        if self.antenna_ratio < 1.0:
            raise ConfigError(
                f"antenna_ratio={self.antenna_ratio} must be >= 1 so that "
                f"n_bs_antennas >= n_relay_antennas")
        if self.kappa <= 1.0:
            raise ConfigError("kappa must exceed 1")
        if not 0.0 < self.user_ring_min_m < self.user_ring_max_m <= self.cell_radius_m:
            raise ConfigError(
                f"need 0 < user_ring_min_m={self.user_ring_min_m} < "
                f"user_ring_max_m={self.user_ring_max_m} <= "
                f"cell_radius_m={self.cell_radius_m}")
        if not 0.0 < self.sector_deg <= 360.0:
            raise ConfigError(f"sector_deg={self.sector_deg} must be in (0, 360]")
        if self.relay_distance_m <= 0:
            raise ConfigError("relay_distance_m must be positive")
        if self.pathloss_exponent <= 0:
            raise ConfigError("pathloss_exponent must be positive")
        if self.shadowing_sigma_db < 0:
            raise ConfigError("shadowing_sigma_db must be >= 0")
        if self.r_min_bps_hz < 0:
            raise ConfigError("r_min_bps_hz must be >= 0")
        if self.amplifier_model not in ("literal", "inverse"):
            raise ConfigError(
                f"amplifier_model={self.amplifier_model!r} must be 'literal' or 'inverse'")
        for name in ("bandwidth_hz", "p_b_max_w", "p_r_max_w", "zeta_b", "zeta_r",
                     "p_tx_w", "p_rx_w", "p_cod_w", "p_dec_w", "p0_w", "p_syn_w",
                     "coherence_time_s", "ops_per_joule", "eps_ee", "fd_rel_step"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.grid_points < 1:
            raise ConfigError("grid_points must be >= 1")
        if self.max_bisect_iters < 1 or self.max_aop_iters < 1:
            raise ConfigError("iteration caps must be >= 1")
        return self


# keys that take a dBm value in config files and the watt field they set
DBM_KEY_MAP = {
    "p_b_max_dbm": "p_b_max_w",
    "p_r_max_dbm": "p_r_max_w",
    "p_tx_dbm": "p_tx_w",
    "p_rx_dbm": "p_rx_w",
    "p_cod_dbm": "p_cod_w",
    "p_dec_dbm": "p_dec_w",
    "p0_dbm": "p0_w",
    "p_syn_dbm": "p_syn_w",
}

_INT_FIELDS = {"n_relay_antennas", "n_users", "grid_points",
               "max_bisect_iters", "max_aop_iters", "seed"}
_BOOL_FIELDS = {"include_p_syn"}
_STR_FIELDS = {"amplifier_model"}


def _parse_value(key: str, raw: str, lineno: int):
    try:
        if key in _BOOL_FIELDS:
            low = raw.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(raw)
        if key in _STR_FIELDS:
            return raw
        if key in _INT_FIELDS:
            return int(raw)
        return float(raw)
    except ValueError:
        raise ConfigError(f"line {lineno}: cannot parse value {raw!r} for key {key!r}")


def load_config_file(path: str) -> SystemConfig:
    """Parse a flat ``key = value`` config file into a validated SystemConfig.

    '#' starts a comment, blank lines are ignored, unknown keys are rejected,
    and *_dbm keys are converted to watts at load. An empty file reproduces
    the built-in reference scenario. Watt and dBm variants of the same
    parameter are mutually exclusive.
    """
    field_names = {f.name for f in fields(SystemConfig)}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}")

    overrides: dict = {}
    source_key: dict = {}
    for lineno, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {text!r}")
        key, raw = (part.strip() for part in text.split("=", 1))
        if key in DBM_KEY_MAP:
            field = DBM_KEY_MAP[key]
            value = dbm_to_watts(_parse_value(field, raw, lineno))
        elif key in field_names:
            field = key
            value = _parse_value(key, raw, lineno)
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if field in source_key and source_key[field] != key:
            raise ConfigError(
                f"line {lineno}: key {key!r} conflicts with earlier {source_key[field]!r} "
                f"(dBm and watt variants are mutually exclusive)")
        if field in source_key:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        overrides[field] = value
        source_key[field] = key

    cfg = SystemConfig(**overrides)
    try:
        return cfg.validate()
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}")
