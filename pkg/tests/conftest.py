from dataclasses import replace

import pytest

from relay_ee import (RandomStream, SystemConfig, sample_channels_with_retry,
                      sample_placement)


@pytest.fixture(scope="session")
def cfg_default():
    return SystemConfig().validate()


@pytest.fixture(scope="session")
def cfg_det(cfg_default):
    """Reference scenario with shadowing off, for deterministic geometry checks."""
    return replace(cfg_default, shadowing_sigma_db=0.0)


def make_realization(cfg, seed=42, stream=0):
    rng = RandomStream(seed, stream).generator()
    placement = sample_placement(cfg, rng)
    return sample_channels_with_retry(cfg, placement, rng), placement
