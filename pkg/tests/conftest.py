from pathlib import Path

import numpy as np
import pytest

from mhdm.imageio import read_image

DATA = Path(__file__).parent / "data"


def blocks_image(size):
    """Piecewise-constant test image: a bright rectangle and a disc on a gray floor."""
    yy, xx = np.mgrid[0:size, 0:size] / size
    rect = (np.abs(xx - 0.4) < 0.2) & (np.abs(yy - 0.5) < 0.25)
    disc = (xx - 0.7) ** 2 + (yy - 0.3) ** 2 < 0.02
    return 0.3 + 0.4 * rect + 0.2 * disc


def stock_image(name):
    return read_image(DATA / f"{name}64.png")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
