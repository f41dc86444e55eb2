import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from izcorr.spectra import make_pair
from izcorr.verify import random_pair, random_point, random_spectrum

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20260418)


@pytest.fixture
def unit_pair():
    """X = Y = [0, 1]."""
    return make_pair([0, 1], [0, 1])


def seeds():
    return st.integers(min_value=0, max_value=2**32 - 1)


@st.composite
def pairs(draw, min_n=1, max_n=4):
    n = draw(st.integers(min_value=min_n, max_value=max_n))
    rng = np.random.default_rng(draw(seeds()))
    return random_pair(rng, n)


@st.composite
def pairs_and_points(draw, min_n=1, max_n=4):
    pair = draw(pairs(min_n, max_n))
    rng = np.random.default_rng(draw(seeds()))
    return pair, random_point(rng, pair)


@st.composite
def spectra(draw, min_n=1, max_n=6):
    n = draw(st.integers(min_value=min_n, max_value=max_n))
    return random_spectrum(np.random.default_rng(draw(seeds())), n)


def rel(a, b):
    return abs(complex(a) - complex(b)) / max(abs(complex(a)), abs(complex(b)), 1e-300)


# acceptance criteria append (label, passed, detail) here; printed after the run
ACCEPTANCE_LINES: list[tuple[str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in ACCEPTANCE_LINES:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {label}: {detail}")
