import numpy as np
import pytest
from hypothesis import settings, strategies as st

from bft_entropy.dispersion import Dispersion
from bft_entropy.state import GGEState

settings.register_profile("default", deadline=None, max_examples=25, derandomize=True)
settings.load_profile("default")

LATTICE = Dispersion.lattice_cosine()
CONTINUUM = Dispersion.continuum_quadratic()


def fourier_state(a0: float, a1: float, a2: float, b1: float) -> GGEState:
    """Lattice GGE with w = a0 + a1 cos k + a2 cos 2k + b1 sin k."""
    w = lambda k: a0 + a1 * np.cos(k) + a2 * np.cos(2 * k) + b1 * np.sin(k)
    return GGEState(LATTICE, w, f"fourier({a0:.3g},{a1:.3g},{a2:.3g},{b1:.3g})")


@st.composite
def validated_states(draw):
    """Random GGEs with w >= 0 everywhere, i.e. n <= 1/2."""
    if draw(st.booleans()):
        a1 = draw(st.floats(-2, 2))
        a2 = draw(st.floats(-1, 1))
        b1 = draw(st.floats(-1, 1))
        a0 = abs(a1) + abs(a2) + abs(b1) + draw(st.floats(0.0, 3.0))
        return fourier_state(a0, a1, a2, b1)
    beta = draw(st.floats(0.3, 3.0))
    mu = draw(st.floats(-2.0, 0.0))
    return GGEState.thermal(CONTINUUM, beta, mu)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
