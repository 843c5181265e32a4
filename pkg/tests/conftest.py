import numpy as np
import pytest

from noiseaid.chen import ChenParams, ClosedLoopSpec, FeedbackVariant
from noiseaid.noise import CoherenceMode, DisturbanceSpec
from noiseaid.sde import TimeGrid


@pytest.fixture
def params():
    return ChenParams()


@pytest.fixture
def short_grid():
    """A cheap grid for unit tests: 0.1 s at the production step."""
    return TimeGrid(0.0, 0.1, 1e-4)


@pytest.fixture
def x0():
    return np.array([2.0, 8.0, 10.0])


@pytest.fixture
def full_spec():
    return ClosedLoopSpec(
        variant=FeedbackVariant.FULL31,
        disturbance=DisturbanceSpec.paper(),
        mode=CoherenceMode.COMMON,
    )
