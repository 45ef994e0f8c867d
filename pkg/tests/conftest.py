import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hoifit.primitives import icosphere
from hoifit.toyrig import build_toy_rig


@pytest.fixture(scope="session")
def toy_rig():
    return build_toy_rig()


@pytest.fixture(scope="session")
def unit_sphere():
    # fine tessellation: surface within ~1e-3 of the exact sphere
    return icosphere(subdivisions=4, radius=1.0)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240811)
