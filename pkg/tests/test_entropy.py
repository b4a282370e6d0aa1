import numpy as np
import pytest
from hypothesis import given, strategies as st

from bft_entropy import entropy
from bft_entropy.dispersion import Dispersion
from bft_entropy.state import GGEState, QuenchSpec, gge_from_quench

from conftest import validated_states

LATTICE = Dispersion.lattice_cosine()
CONTINUUM = Dispersion.continuum_quadratic()
THIRD = GGEState.from_occupation(LATTICE, lambda k: np.full(np.shape(k), 1 / 3), "third")

# 30-digit mpmath values of int dk/2pi H_alpha(n) and int dk/2pi |v| H_alpha(n)
RATE_ORACLE = {
    "lattice-thermal": (GGEState.thermal(LATTICE, 1.0, -1.5), {
        1: (0.4710524543467429, 0.30090794131801746),
        2: (0.37606064841329245, 0.23540777569771906),
        3: (0.33308865547626027, 0.2049699813135048)}),
    "continuum-thermal": (GGEState.thermal(CONTINUUM, 1.0, -0.5), {
        1: (0.38973524163209537, 0.41490835885116443),
        2: (0.31248671176471496, 0.28555916081702638)}),
    "gamma-quench": (gge_from_quench(QuenchSpec.gamma_quench(0.8)), {
        1: (0.45912060816198933, 0.35910626104077353),
        2: (0.39045085538769171, 0.31883243282231247),
        3: (0.3563457412516887, 0.29522313132672113)}),
}


def test_h_alpha_closed_forms():
    assert entropy.h_alpha(1 / 3, 2) == pytest.approx(np.log(9 / 5), rel=1e-15)
    assert entropy.h_alpha(0.5, 1) == pytest.approx(np.log(2), rel=1e-15)
    assert entropy.h_alpha(0.0, 1) == 0.0
    assert entropy.h_alpha(1.0, 3) == 0.0
    with pytest.raises(ValueError):
        entropy.h_alpha(0.3, 0.0)
    with pytest.raises(ValueError):
        entropy.h_alpha(1.2, 2)


@given(st.floats(1e-6, 1 - 1e-6), st.floats(0.05, 8))
def test_h_alpha_symmetric_and_non_negative(n, alpha):
    h = entropy.h_alpha(n, alpha)
    assert h >= -1e-15
    # 1 - n is exact only to one ulp, and H_alpha is steep near the edges for small alpha
    assert h == pytest.approx(entropy.h_alpha(1 - n, alpha), abs=1e-10)
    assert h <= np.log(2) + 1e-14


@given(st.floats(0.01, 0.99), st.floats(0.2, 5), st.floats(0.2, 5))
def test_h_alpha_non_increasing_in_alpha(n, a, b):
    lo, hi = sorted((a, b))
    assert entropy.h_alpha(n, hi) <= entropy.h_alpha(n, lo) + 1e-14


def test_constant_state_rates():
    assert entropy.renyi_rate_space(THIRD, 2) == pytest.approx(np.log(9 / 5), rel=1e-14)
    assert entropy.renyi_rate_time(THIRD, 2) == pytest.approx(2 / np.pi * np.log(9 / 5), rel=1e-14)


def test_empty_state_rates_vanish():
    empty = GGEState.from_occupation(LATTICE, lambda k: np.zeros(np.shape(k)), "empty")
    assert entropy.renyi_rate_space(empty, 2) == 0.0
    assert entropy.renyi_rate_time(empty, 1) == 0.0


@pytest.mark.parametrize("name", list(RATE_ORACLE))
def test_rates_against_oracle(name):
    state, table = RATE_ORACLE[name]
    for alpha, (space, time) in table.items():
        assert entropy.renyi_rate_space(state, alpha) == pytest.approx(space, rel=1e-12)
        assert entropy.renyi_rate_time(state, alpha) == pytest.approx(time, rel=1e-12)


def test_sector_labels():
    assert list(entropy.sector_momenta(2)) == [-1, 1]
    assert list(entropy.sector_momenta(3)) == [-2, 0, 2]
    assert np.allclose(entropy.sector_charges(4), np.pi * np.array([-3, -1, 1, 3]) / 4)
    with pytest.raises(ValueError):
        entropy.sector_momenta(2.5)
    with pytest.raises(ValueError):
        entropy.sector_momenta(1)


def test_third_state_sector_sum():
    s = entropy.sector_scgf_sum(THIRD, 2, "space")
    assert s == pytest.approx(-np.log(9 / 5), rel=1e-14)
    with pytest.raises(ValueError):
        entropy.sector_scgfs(THIRD, 2, "diagonal")


@given(validated_states(), st.sampled_from([2, 3, 4, 6]), st.sampled_from(["space", "time"]))
def test_sector_identity_property(state, alpha, direction):
    chk = entropy.sector_identity_check(state, alpha, direction, tol=1e-10)
    assert chk.ok, chk
    assert abs(chk.lhs.imag) < 1e-12


def test_profile_limits():
    state = RATE_ORACLE["gamma-quench"][0]
    rs, rt = entropy.renyi_rate_space(state, 2), entropy.renyi_rate_time(state, 2)
    assert entropy.renyi_profile(state, 2, 64, 0.0) == 0.0
    assert entropy.renyi_profile(state, 2, 64, 10.0) == pytest.approx(20 * rt, rel=1e-12)
    assert entropy.renyi_profile(state, 2, 64, 1e6) == pytest.approx(64 * rs, rel=1e-5)
    with pytest.raises(ValueError):
        entropy.renyi_profile(state, 2, -1, 1)


@given(validated_states(), st.sampled_from([2, 3]), st.floats(0.5, 40), st.floats(0.5, 40))
def test_fcs_profile_identity_property(state, alpha, x, t):
    chk = entropy.fcs_profile_check(state, alpha, x, t)
    assert chk.ok, chk


def test_fcs_split_endpoints():
    state = RATE_ORACLE["lattice-thermal"][0]
    fast = entropy.fcs_split(state, 2, 0.0)
    assert np.allclose(fast.dynamic, 0)
    assert fast.static.sum().real == pytest.approx(-entropy.renyi_rate_space(state, 2), rel=1e-12)
    slow = entropy.fcs_split(state, 2, 3.0)
    assert np.allclose(slow.static, 0)
    assert slow.dynamic.sum().real == pytest.approx(-entropy.renyi_rate_time(state, 2), rel=1e-12)
