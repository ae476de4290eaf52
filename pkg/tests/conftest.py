import sys
from pathlib import Path

import numpy as np
import pytest

# Add the project root directory to the Python path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from tasepcheck.core.config import get_settings  # noqa: E402
from tasepcheck.models.numerics import SpectralPoint  # noqa: E402

GOLDEN_DIR = Path(__file__).parent / "golden"


@pytest.fixture
def rng():
    """Seeded generator so random spectral points are the same on every run."""
    return np.random.default_rng(20240611)


@pytest.fixture
def spectral_point_factory(rng):
    """Draw n distinct spectral variables on |xi| = radius."""
    def make(n, radius=0.5):
        while True:
            values = radius * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=n))
            gaps = np.abs(values[:, None] - values[None, :])
            np.fill_diagonal(gaps, np.inf)
            if gaps.min() > 1e-2:
                return SpectralPoint(xi=tuple(complex(v) for v in values))
    return make


@pytest.fixture
def fresh_settings(monkeypatch):
    """Clear the cached settings before and after a test that changes the environment."""
    get_settings.cache_clear()
    yield monkeypatch
    monkeypatch.undo()
    get_settings.cache_clear()


@pytest.fixture
def golden_dir():
    return GOLDEN_DIR
