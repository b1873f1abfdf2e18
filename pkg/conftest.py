import numpy as np
import pytest

from lorroll import get_manifold, parse_manifold


@pytest.fixture
def flat21():
    return get_manifold("flat", 2, 1)


@pytest.fixture
def s21():
    return get_manifold("s", 2, 1, 1.0)


@pytest.fixture
def h21():
    return get_manifold("h", 2, 1, 1.0)


@pytest.fixture
def s31():
    return get_manifold("s", 3, 1, 1.0)


@pytest.fixture
def h22():
    return get_manifold("h", 2, 2, 1.0)


@pytest.fixture
def clifton_pohl():
    return get_manifold("clifton-pohl")


@pytest.fixture
def de_sitter_chart():
    """2D de Sitter in global coordinates: cosh(t)^2 dx^2 - dt^2, curvature +1."""
    return parse_manifold('custom:{"g11": "cosh(x2)^2", "g22": "-1"}')


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
