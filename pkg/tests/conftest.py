import numpy as np
import pytest

from sparsetf import build_system


@pytest.fixture
def rng():
    return np.random.default_rng(20240803)


@pytest.fixture(scope="session")
def small_system():
    """8x8 grid: hann L_w=8, a=4, M=8, L=32."""
    return build_system("hann", 8, 4, 8, 32)


@pytest.fixture(scope="session")
def mid_system():
    """32x32 grid: hann L_w=32, a=8, M=32, L=256."""
    return build_system("hann", 32, 8, 32, 256)


# (kind, L_w, a, M, L) tuples small enough for dense-matrix comparison.
DENSE_SHAPES = [
    ("hann", 16, 4, 16, 64),
    ("hann", 32, 8, 32, 256),
    ("rectangular", 8, 8, 16, 128),
    ("hann", 12, 4, 16, 128),
    ("rectangular", 4, 4, 4, 8),
]


@pytest.fixture(scope="session", params=DENSE_SHAPES, ids=lambda s: f"{s[0]}-Lw{s[1]}-a{s[2]}-M{s[3]}-L{s[4]}")
def dense_system(request):
    kind, lw, a, m, L = request.param
    return build_system(kind, lw, a, m, L)


def random_signal(rng, L, complex_valued=True):
    data = rng.standard_normal(L)
    if complex_valued:
        data = data + 1j * rng.standard_normal(L)
    return data
