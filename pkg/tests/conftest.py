import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from probelight.envmap import EnvMap
from probelight.synth import faceted_scene, fronto_plane_scene, two_plane_scene


@pytest.fixture(scope="session")
def faceted():
    """Multi-orientation scene with known lighting, shared read-only."""
    return faceted_scene()


@pytest.fixture(scope="session")
def two_planes():
    return two_plane_scene()


@pytest.fixture(scope="session")
def fronto():
    return fronto_plane_scene()


@pytest.fixture()
def smooth_sinusoid_env():
    """Long-wavelength map whose bilinear interpolation error is tiny."""
    w, h = 256, 128
    az = 2 * np.pi * (np.arange(w) + 0.5) / w - np.pi
    el = np.pi / 2 - np.pi * (np.arange(h) + 0.5) / h
    data = np.empty((h, w, 3))
    for c in range(3):
        data[:, :, c] = 1.0 + 0.5 * np.cos(el)[:, None] * np.sin(az + c)[None, :]
    return EnvMap(data)
