import numpy as np
import pytest

from adastream.ladder import DEFAULT_LADDER
from adastream.quality import QualityGrid


def random_grid(rng, clip_id="rand", bitrate=3e6, velocity=None) -> QualityGrid:
    """Uniform random JOD grid, the workhorse fixture for selection tests."""
    if velocity is None:
        velocity = float(rng.uniform(0.0, 120.0))
    q = rng.uniform(0.0, 10.0, (DEFAULT_LADDER.n_frame_rates,
                                DEFAULT_LADDER.n_heights))
    return QualityGrid(clip_id, velocity, bitrate, q)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
