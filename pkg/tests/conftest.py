"""
Shared pytest fixtures.
"""
import sys
from pathlib import Path

import numpy as np
import pytest

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))



@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def b_grid_101():
    return np.linspace(0.0, 1.0, 101)
