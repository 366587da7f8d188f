"""
Pytest configuration for the devsurf test suite.

Shared fixtures: the data directory, a moderately sampled helix and its
development, and a seeded generator.
"""

import pytest
import sys
from pathlib import Path

import numpy as np

# Add the project root to the Python path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.curve_model import angles_from_curve, parse_curve_spec, sample_curve  # noqa: E402
from src.development import develop  # noqa: E402

HELIX_RANGE = (0.3, 2.8)


@pytest.fixture(scope="session")
def test_data_dir():
    """Return the path to the test data directory"""
    return Path(__file__).parent.parent / "data"


@pytest.fixture(scope="session")
def helix_spec():
    """Unit helix, radius 1 and pitch 1, on 4001 samples"""
    return parse_curve_spec({
        "family": "helix",
        "params": {"radius": 1.0, "pitch": 1.0},
        "range": list(HELIX_RANGE),
        "samples": 4001,
    })


@pytest.fixture(scope="session")
def helix_curve(helix_spec):
    return sample_curve(helix_spec)


@pytest.fixture(scope="session")
def helix_developed(helix_curve):
    """(profile with omega, developed directrix)"""
    return develop(helix_curve, angles_from_curve(helix_curve))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
