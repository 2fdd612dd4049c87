"""Desk-scale EE power-allocation study of a massive MIMO AF relay downlink.

Channel model, ZF closed-form link model, power-consumption model, and the
optimizer family (per-dimension bisection, grid searches, their nesting, the
alternating scheme, and fixed-power baselines) with a seeded Monte Carlo
runner and CSV/figure reporting.
"""

from .channel import (ChannelRealization, UserPlacement, large_scale_gain,
                      relay_user_distance, sample_channels,
                      sample_channels_with_retry, sample_placement)
from .config import ConfigError, SystemConfig, load_config_file
from .experiments import (ALGORITHMS, AlgorithmStats, OracleReport, SweepRow,
                          SweepTable, TrialResult, build_oracle_report,
                          quasiconcavity_probe, run_point, run_sweep,
                          run_trial, validate_sinr_signal_level)
from .model import (EEBreakdown, EEObjective, PowerPair, alpha_b, alpha_r,
                    energy_efficiency, sinr, sum_rate, system_power)
from .numerics import (RandomStream, RankDeficientError, dbm_to_watts,
                       pseudo_inverse, sample_cn, sample_lognormal_shadowing,
                       trace_gram_inverse, watts_to_dbm)
from .optimize import (Dimension, FeasibleBox, InfeasibleError,
                       OptimizationResult, aop, ee_slope_sign, feasible_box,
                       fixed_mode, grid_max_1d, grid_search_2d, maximize_1d,
                       min_bs_power, min_relay_power, ods_grid, pb_ods, pba,
                       qos_sinr_threshold, tds)
from .validation import CheckResult, run_validation_suite

__version__ = "0.1.0"
