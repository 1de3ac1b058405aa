from pathlib import Path

import numpy as np
import pytest

from qdnoma.channel import ChannelSet, ScenarioConfig, random_channel_set, rayleigh
from qdnoma.rates import SinrTargets

DEFAULT_RATES = (0.5, 1.0, 1.0)
CONFIGS = Path(__file__).resolve().parents[1] / "configs"
PAIRING_PATH = str(CONFIGS / "pairing.json")


@pytest.fixture
def config():
    return ScenarioConfig()


@pytest.fixture
def targets():
    return SinrTargets.from_rates(DEFAULT_RATES)


def geometric_instance(seed, config=None):
    config = config or ScenarioConfig()
    return random_channel_set(config, np.random.default_rng(seed))


def scale_free_instance(rng, n=None):
    """Unit-noise instance with random antenna count and per-link gains."""
    n = int(rng.integers(2, 6)) if n is None else n
    scales = 10 ** rng.uniform(-1, 1, 4)
    g = rayleigh(rng, n, 4) * scales[:, None]
    return ChannelSet(*g)


def random_targets(rng, lo=0.1, hi=2.0):
    return SinrTargets.from_rates(rng.uniform(lo, hi, 3))
