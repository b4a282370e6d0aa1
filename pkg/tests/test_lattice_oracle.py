import numpy as np
import pytest
from hypothesis import given, strategies as st

from bft_entropy import entropy
from bft_entropy import lattice_oracle as lo
from bft_entropy.dispersion import Dispersion
from bft_entropy.state import GGEState, QuenchSpec, gge_from_quench

LATTICE = Dispersion.lattice_cosine()
SPEC = QuenchSpec.gamma_quench(0.8)
# mpmath: int dk/2pi cos(k d) g^2 sin^2 k / (1 + g^2 sin^2 k), g = 0.8
C_INFINITE = {0: 0.21913119055696969, 1: 0.0, 2: -0.096083838952500108, 5: 0.0}


def test_ring_momenta():
    k = lo.ring_momenta(8)
    assert k.size == 8 and k[0] == -np.pi and np.allclose(np.diff(k), np.pi / 4)
    with pytest.raises(ValueError):
        lo.ring_momenta(7)


def test_gge_matrix_against_oracle():
    gge = gge_from_quench(SPEC)
    C = lo.gge_correlation_matrix(gge, 8)
    for d, val in C_INFINITE.items():
        assert C[d, 0] == pytest.approx(val, abs=1e-15)
    assert np.allclose(C, C.conj().T)


def test_constant_state_is_diagonal():
    s = GGEState.from_occupation(LATTICE, lambda k: np.full(np.shape(k), 0.3))
    C, F = lo.correlation_matrices(s, 64, 10)
    assert np.allclose(C, 0.3 * np.eye(10), atol=1e-15)
    assert not F.any()


def test_initial_state_has_no_entanglement_for_zero_quench():
    trivial = QuenchSpec(LATTICE, lambda k: np.ones(np.shape(k), complex), lambda k: np.zeros(np.shape(k), complex))
    assert lo.renyi_exact(*lo.correlation_matrices(trivial, 32, 6, 3.0), 2) == 0.0


def test_pairing_antisymmetry_enforced():
    even = QuenchSpec(LATTICE, lambda k: np.sqrt(1 - 0.25 * np.cos(k) ** 2) + 0j, lambda k: 0.5 * np.cos(k) + 0j)
    with pytest.raises(ValueError):
        lo.correlation_matrices(even, 32, 4)


def test_fcs_determinant_constant_state():
    C = 0.3 * np.eye(12)
    for lam in (0.4, 1j * np.pi / 2, 2.5j):
        assert lo.fcs_determinant(C, lam) == pytest.approx(12 * np.log(1 + (np.exp(lam) - 1) * 0.3), abs=1e-13)


def test_fcs_determinant_with_pivoting():
    C = np.array([[0.0, 0.5], [0.5, 0.0]])
    expect = np.log(np.linalg.det(np.eye(2) + (np.exp(1.0) - 1) * C) + 0j)
    assert lo.fcs_determinant(C, 1.0) == pytest.approx(expect, abs=1e-14)


def test_rate_extrapolation_converges_to_sector_scgf():
    s = GGEState.thermal(LATTICE, 1.0, -1.5)
    h = np.pi / 2
    fit = lo.fcs_rate_extrapolation(s, 1j * h, (32, 64, 128, 256))
    bft = entropy.sector_scgfs(s, 2, "space")[1]
    assert abs(fit.intercept - bft) < 1e-6
    with pytest.raises(ValueError):
        lo.fcs_rate_extrapolation(s, 1j, (32,))


def test_revival_guards():
    with pytest.raises(lo.RevivalGuardError):
        lo.check_revival_guards(SPEC, 64, 20, [1.0])
    with pytest.raises(lo.RevivalGuardError):
        lo.check_revival_guards(SPEC, 64, 8, [17.0])
    lo.check_revival_guards(SPEC, 64, 16, [0.0, 16.0])


@pytest.mark.parametrize("ell", [1, 2, 3])
@pytest.mark.parametrize("t", [0.0, 0.7, 2.0])
@pytest.mark.parametrize("alpha", [1, 2, 3])
def test_brute_force_equivalence(ell, t, alpha):
    exact = lo.renyi_exact(*lo.correlation_matrices(SPEC, 8, ell, t), alpha)
    brute = lo.brute_force_renyi(SPEC, 8, ell, t, alpha)
    assert exact == pytest.approx(brute, abs=1e-10)


@given(st.floats(0.1, 3.0), st.sampled_from([16, 24, 32, 48]), st.integers(1, 8), st.floats(0, 20))
def test_spectrum_pairing_property(gamma, L, ell, t):
    spec = QuenchSpec.gamma_quench(gamma)
    nu = lo.entanglement_spectrum(*lo.correlation_matrices(spec, L, ell, t))
    assert np.allclose(nu + nu[::-1], 1.0, atol=1e-9)
    assert nu.min() > -1e-12 and nu.max() < 1 + 1e-12


def test_quench_comparison_linear_regime():
    cmp = lo.quench_comparison(SPEC, 128, 16, 2)
    assert cmp.slope_error < 0.05
    assert cmp.plateau_error < 0.05
    # the pre-quench state obeys an area law, with no extensive part
    assert 0 < cmp.exact[0] < 0.5
    assert cmp.profile[0] == 0.0
