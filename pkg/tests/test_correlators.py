import numpy as np
import pytest
from hypothesis import given, strategies as st

from bft_entropy import correlators as co
from bft_entropy.dispersion import Dispersion
from bft_entropy.state import GGEState, QuenchSpec

LATTICE = Dispersion.lattice_cosine()
CONTINUUM = Dispersion.continuum_quadratic()
LAT_STATE = GGEState.thermal(LATTICE, 1.0, -0.5)
CONT_STATE = GGEState.thermal(CONTINUUM, 1.0, -0.5)


def brute_lattice(state, dx, dt, which, N=1024):
    """Periodic trapezoid sum of the defining double integral."""
    k = 2 * np.pi * np.arange(N) / N - np.pi
    K, Kp = np.meshgrid(k, k, indexing="ij")
    amp = state.n(K) * (1 - state.n(Kp))
    if which == "current":
        amp = amp * np.sin(0.5 * (K + Kp)) ** 2
    phase = dx * (Kp - K) + dt * (LATTICE.energy(K) - LATTICE.energy(Kp))
    return np.sum(amp * np.exp(1j * phase)) / N**2


def test_window_geometry():
    w = co.Window(0.5, 0.2)
    assert (w.lo, w.hi) == pytest.approx((0.4, 0.6))
    assert w.mirror().center == -0.5
    with pytest.raises(ValueError):
        co.Window(0.0, -1.0)


def test_single_mode_kernel_limit():
    z = np.array([0.0, 1e-9])
    vals = co.single_mode_kernel(0.3, 0.2, z)
    assert vals[0] == pytest.approx(0.2 / (2 * np.pi))
    assert abs(vals[1] - vals[0]) < 1e-9


def test_light_cone_predicate():
    assert co.in_light_cone(CONTINUUM, 1.0, 0.2, 2.0)
    assert not co.in_light_cone(CONTINUUM, 1.0, 0.2, 2.5)
    assert co.in_light_cone(LATTICE, np.pi / 2, 0.2, 1.995)
    assert not co.in_light_cone(LATTICE, np.pi / 2, 0.2, 1.98)


def test_tabulated_current_kernel_is_velocity_on_diagonal():
    th = np.linspace(-3, 3, 301)
    d = Dispersion.tabulated(th, th**2 / 2)
    assert co.current_kernel(d, 0.7, 0.7) == pytest.approx(0.7, abs=1e-9)
    assert co.current_kernel(d, 0.2, 1.0) == pytest.approx(0.6, abs=1e-9)


@pytest.mark.parametrize("which", ["density", "current"])
@pytest.mark.parametrize("dx,dt", [(0, 0), (3, 0), (0, 5.0), (2, 4.5)])
def test_lattice_against_brute_force(which, dx, dt):
    fn = co.gge_density_density if which == "density" else co.gge_current_current
    assert fn(LAT_STATE, dx, dt) == pytest.approx(brute_lattice(LAT_STATE, dx, dt, which), abs=1e-13)


def test_windowed_full_zone_matches_separable():
    full = co.gge_current_current(LAT_STATE, 1, 2.0)
    win = co._windowed(LAT_STATE, 1, 2.0, None, "current")
    assert win == pytest.approx(full, abs=1e-12)


def test_local_density_variance():
    n = LAT_STATE.n(np.linspace(-np.pi, np.pi, 4097)[:-1]).mean()
    assert co.gge_density_density(LAT_STATE, 0, 0).real == pytest.approx(n * (1 - n), rel=1e-12)


def test_continuum_fermion_two_point_at_origin():
    from bft_entropy import quadrature
    lo, hi = CONT_STATE.domain()
    dens = quadrature.integrate_real(lambda t: CONT_STATE.n(t) / (2 * np.pi), lo, hi, rtol=1e-13)
    assert co.gge_fermion_two_point(CONT_STATE, 0.0, 0.0).real == pytest.approx(dens, rel=1e-12)


def test_continuum_vacuum_moment_defined():
    with pytest.raises(ValueError):
        co.gge_current_current(CONT_STATE, 0.0, 0.0)
    assert co._continuum_vacuum_moments(1.0, 1.0, 0.0) == [0j, 0j, 0j]


def test_continuum_current_decays_as_cube():
    dts = np.geomspace(20, 640, 11)
    vals = np.abs([co.gge_current_current(CONT_STATE, 0.0, t) for t in dts])
    fit = co.decay_exponent_fit(dts, vals)
    assert fit.exponent == pytest.approx(-3.0, abs=0.05)
    assert not fit.curved


def test_windows_sum_to_full_density():
    edges = np.linspace(-np.pi, np.pi, 9)
    parts = sum(co.gge_density_density(LAT_STATE, 2, 1.5, ((a + b) / 2, b - a)) for a, b in zip(edges[:-1], edges[1:]))
    assert parts == pytest.approx(co.gge_density_density(LAT_STATE, 2, 1.5), abs=1e-11)


def test_decay_fit_models():
    x = np.linspace(1, 10, 10)
    assert co.decay_exponent_fit(x, 3 * x**-2.5).exponent == pytest.approx(-2.5)
    fit = co.decay_exponent_fit(x, 2 * np.exp(-0.7 * x), model="exponential")
    assert fit.exponent == pytest.approx(-0.7) and fit.r2 == pytest.approx(1.0)
    with pytest.raises(co.InsufficientDataError):
        co.decay_exponent_fit(x, np.where(x < 4, 1.0, 0.0), floor=1e-12)
    with pytest.raises(ValueError):
        co.decay_exponent_fit(x[:3], x[:3])


@given(st.floats(-4, -0.5), st.floats(0.5, 3))
def test_decay_fit_recovers_power_property(p, a):
    x = np.geomspace(10, 1000, 8)
    assert co.decay_exponent_fit(x, a * x**p).exponent == pytest.approx(p, abs=1e-10)


def brute_correction(spec, theta0, eps, zeta, ell, nK=48, nkappa=4000):
    """Gauss-Legendre in K = (k + k')/2 over the window and in kappa = k' - k."""
    from bft_entropy.quadrature import composite_nodes
    x, t = zeta * ell, ell
    R = spec.domain()[1]
    K, wK = composite_nodes(np.linspace(theta0 - eps / 2, theta0 + eps / 2, 5), nK // 4)
    kap, wkap = composite_nodes(np.linspace(-4 * R, 4 * R, nkappa // 16 + 1), 16)
    k = K[:, None] - kap[None, :] / 2
    kp = K[:, None] + kap[None, :] / 2
    E = spec.dispersion.energy
    amp = np.conj(spec.g(k)) * spec.f(k) * spec.g(kp) * np.conj(spec.f(kp))
    phase = x * (kp - k) + 2 * t * (E(k) - E(kp))
    # (k, k') -> (K, kappa) has unit Jacobian
    return np.sum(wK[:, None] * wkap[None, :] * amp * np.exp(1j * phase)) / (2 * np.pi) ** 2


def test_quench_correction_against_tensor_quadrature():
    spec = QuenchSpec.gaussian_quench(1.5)
    for zeta, ell in [(1.0, 2.0), (0.8, 20.0), (3.0, 20.0)]:
        res = co.quench_correction_density(spec, [0.5], 0.2, zeta, ell, mode="opposite")
        ref = brute_correction(spec, 0.5, 0.2, zeta, ell)
        assert abs(res.values[0] - ref) < 1e-10 * abs(ref) + res.floor


def test_quench_correction_resolution_independent():
    spec = QuenchSpec.gaussian_quench(1.5)
    a = co.quench_correction_density(spec, [0.5, 0.9], 0.2, 1.8, 400.0)
    b = co.quench_correction_density(spec, [0.5, 0.9], 0.2, 1.8, 400.0, phase_per_cell=0.5, order=12)
    assert np.allclose(a.values, b.values, atol=1e-12 * np.abs(a.values).max())


def test_quench_correction_in_and_out_of_cone():
    spec = QuenchSpec.gaussian_quench(1.5)
    ells = np.geomspace(50, 800, 8)
    inside = [abs(co.quench_correction_density(spec, [0.9], 0.2, 1.8, L).values[0]) for L in ells]
    assert co.decay_exponent_fit(ells, inside).exponent == pytest.approx(-1.0, abs=0.05)
    out = co.quench_correction_density(spec, [0.9], 0.2, 3.0, 800.0)
    assert abs(out.values[0]) < 1e-3 * inside[-1]


def test_light_cone_scan_small_grid():
    spec = QuenchSpec.gaussian_quench(1.5)
    scan = co.light_cone_scan(spec, [0.3, 0.9], 0.2, [0.6, 1.8], np.geomspace(50, 800, 6))
    assert np.array_equal(scan.predicted, np.eye(2, dtype=bool))
    assert scan.agrees.all() and scan.disagreements_off_boundary == 0


def test_quench_modes():
    spec = QuenchSpec.gaussian_quench(1.5)
    opp = co.quench_correction_density(spec, [0.5], 0.2, 1.0, 50.0, mode="opposite").values[0]
    pair = co.quench_correction_density(spec, [0.5], 0.2, 1.0, 50.0, mode="pair").values[0]
    mirror = co.quench_correction_density(spec, [-0.5], 0.2, 1.0, 50.0, mode="opposite").values[0]
    assert pair == pytest.approx(opp + mirror, abs=1e-15)
    assert co.quench_correction_density(spec, [0.5], 0.2, 1.0, 50.0, mode="same").values[0] == 0
    with pytest.raises(ValueError):
        co.quench_correction_density(spec, [0.5], 0.2, 1.0, 50.0, mode="cross")
