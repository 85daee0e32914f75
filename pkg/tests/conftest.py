# tests/conftest.py

import math

import numpy as np
import pytest

from ptkdv.core.config import settings
from ptkdv.services.waves import TravelingWaveParams

SQRT_HALF = 1.0 / math.sqrt(2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def output_root(tmp_path, monkeypatch):
    """Redirect command outputs into the test's temporary directory."""
    root = tmp_path / "runs"
    root.mkdir()
    monkeypatch.setattr(settings, "output_root", root)
    return root


@pytest.fixture
def cnoidal_wave():
    return TravelingWaveParams(SQRT_HALF, 0.9)


@pytest.fixture
def soliton_wave():
    return TravelingWaveParams(SQRT_HALF, 1.0)
