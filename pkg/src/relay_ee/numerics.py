"""Deterministic random substreams, complex-matrix helpers, and unit conversions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# relative singular-value cutoff below which a matrix counts as rank deficient
RANK_RTOL = 1e-10


class RankDeficientError(np.linalg.LinAlgError):
    """Matrix is numerically rank deficient for pseudo-inversion."""


def dbm_to_watts(x_dbm: float) -> float:
    """Convert a power level in dBm to watts."""
    return 10.0 ** ((x_dbm - 30.0) / 10.0)


def watts_to_dbm(x_w: float) -> float:
    """Convert a power level in watts to dBm."""
    return 10.0 * np.log10(x_w) + 30.0


@dataclass(frozen=True)
class RandomStream:
    """One independent, reproducible random substream.

    Philox is counter based, so (seed, stream_id) fixes the whole sequence
    regardless of thread count or execution order, and distinct stream_ids
    give statistically independent streams. One stream per Monte Carlo trial.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed % 2**64, self.stream_id % 2**64], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


def sample_cn(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """i.i.d. circularly symmetric complex normal entries, mean 0, variance 1.

    Real and imaginary parts each carry variance 1/2.
    """
    re = rng.standard_normal((rows, cols))
    im = rng.standard_normal((rows, cols))
    return (re + 1j * im) / np.sqrt(2.0)


def sample_lognormal_shadowing(rng: np.random.Generator, sigma_db: float) -> float:
    """Linear shadowing gain 10^(X/10) with X ~ N(0, sigma_db^2).

    sigma_db = 0 degenerates to exactly 1.
    """
    if sigma_db < 0:
        raise ValueError("sigma_db must be >= 0")
    return float(10.0 ** (rng.normal(0.0, sigma_db) / 10.0))


def _svd_full_rank(m: np.ndarray):
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    if s[0] == 0.0 or s[-1] < RANK_RTOL * s[0]:
        raise RankDeficientError(
            f"numerical rank below {min(m.shape)} at relative tolerance {RANK_RTOL:g}"
        )
    return u, s, vh


def pseudo_inverse(m: np.ndarray) -> np.ndarray:
    """Moore-Penrose pseudo-inverse via SVD.

    For a wide full-row-rank m this equals m^H (m m^H)^{-1}. Raises
    RankDeficientError when the smallest singular value falls below
    RANK_RTOL times the largest.
    """
    u, s, vh = _svd_full_rank(np.asarray(m))
    return (vh.conj().T * (1.0 / s)) @ u.conj().T


def trace_gram_inverse(m: np.ndarray) -> float:
    """tr((m m^H)^{-1}) for a wide or square full-row-rank m.

    Computed from the singular values as sum(s^-2), reusing the same rank
    cutoff as the pseudo-inverse. Strictly positive.
    """
    m = np.asarray(m)
    if m.shape[0] > m.shape[1]:
        raise ValueError("matrix must be wide or square (rows <= cols)")
    _, s, _ = _svd_full_rank(m)
    return float(np.sum(s ** -2.0))
