import os
import sys

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

from ragft import morton  # noqa: E402
from ragft.io import VoxelizedCloud  # noqa: E402

settings.register_profile("default", max_examples=50, deadline=None)
settings.load_profile("default")

DATA = os.path.join(os.path.dirname(__file__), "data")

ACCEPTANCE_LINES = []

# Nine leaves in three 2x2x2 cells holding 3, 4 and 2 points; root at level 0.
NINE_LEAVES = [
    (0, 0, 0), (1, 0, 0), (0, 1, 0),
    (2, 0, 0), (3, 0, 0), (2, 1, 0), (3, 1, 0),
    (0, 2, 0), (1, 2, 0),
]


def sorted_cloud(depth, coords, attributes=None, weights=None):
    coords = np.asarray(coords, dtype=np.int64)
    order = np.argsort(morton.encode(coords))
    if attributes is None:
        attributes = np.ones(len(coords))
    attributes = np.asarray(attributes, dtype=np.float64)[order]
    w = None if weights is None else np.asarray(weights, dtype=np.float64)[order]
    return VoxelizedCloud(depth, coords[order], attributes, w)


@pytest.fixture
def nine_point_cloud():
    return sorted_cloud(2, NINE_LEAVES)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
