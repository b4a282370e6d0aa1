"""
Correlation functions behind the twist-field asymptotics.

Theoretical Background
----------------------
In a GGE the only non-trivial contractions are
<b^dag_k b_k'> = n(k) delta(k - k') and <b_k b^dag_k'> = (1 - n(k)) delta(k - k').
A bilinear q(x) = int dk dk'/2pi e^{ix(k'-k)} Q(k, k') b^dag_k b_k' then has

    <q(x, t) q(0, 0)>^c = int dk dk'/(2pi)^2 e^{i x (k'-k) + i t (E(k) - E(k'))}
                          Q(k, k')^2 n(k) (1 - n(k')),

with Q = 1 for the density and Q = the current kernel for the current.
Single-mode densities restrict K = (k + k')/2 to a window of width eps
around theta_0, which in position space is the kernel
sin(eps z / 2) e^{i theta_0 z} / (pi z).

Current kernels:
  lattice-cosine      J sin((k + k')/2)        (nearest-neighbour lattice current)
  continuum-quadratic (k + k') / (2 m)
  tabulated           (E(k) - E(k')) / (k - k'), v(k) on the diagonal

The first two are separable, so the full-window double integrals reduce to
sums of products of one-dimensional Fourier integrals. On the continuum the
vacuum part of (1 - n) is done exactly with Fresnel moments
(t -> t - i0 regularisation).

After a pair-producing quench the extra contraction <b b> adds

    int dk dk'/(2pi)^2 e^{i x (k'-k) + 2 i t (E(k) - E(k'))} chi(K)
        conj(g_k) f_k g_k' conj(f_k')

to the correlation of q_theta(x, t) with q_{-theta}(0, t). Its
stationary point sits at v(k) = v(k') = x/(2t), so with x = zeta * ell,
t = ell it decays like 1/ell when zeta/2 lies in v(window) and faster
otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import quadrature
from .dispersion import Dispersion
from .state import GGEState, QuenchSpec

TWO_PI = 2.0 * np.pi


class InsufficientDataError(ValueError):
    """Too few resolved samples to fit a decay law."""

    def __init__(self, message: str, resolved: int):
        super().__init__(message)
        self.resolved = resolved


@dataclass(frozen=True)
class Window:
    """Rapidity window [center - width/2, center + width/2]."""

    center: float
    width: float

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError("window width must be positive")

    @property
    def lo(self) -> float:
        return self.center - 0.5 * self.width

    @property
    def hi(self) -> float:
        return self.center + 0.5 * self.width

    def mirror(self) -> "Window":
        return Window(-self.center, self.width)


def single_mode_kernel(theta0: float, eps: float, z):
    """Position-space window kernel sin(eps z/2) e^{i theta0 z} / (pi z)."""
    z = np.asarray(z, dtype=float)
    safe = np.where(z == 0, 1.0, z)
    val = np.sin(0.5 * eps * safe) * np.exp(1j * theta0 * safe) / (np.pi * safe)
    return np.where(z == 0, eps / TWO_PI + 0j, val)


def in_light_cone(dispersion: Dispersion, theta0: float, eps: float, zeta: float,
                  samples: int = 65) -> bool:
    """True when zeta/2 lies in the range of v over the window.

    For a velocity increasing across the window this is
    v(theta0 - eps/2) <= zeta/2 <= v(theta0 + eps/2).
    """
    grid = np.linspace(theta0 - 0.5 * eps, theta0 + 0.5 * eps, samples)
    v = dispersion.velocity(grid)
    return bool(v.min() <= 0.5 * zeta <= v.max())


def current_kernel(dispersion: Dispersion, k, kp):
    k = np.asarray(k, dtype=float)
    kp = np.asarray(kp, dtype=float)
    if dispersion.family == "lattice-cosine":
        return dispersion.params["J"] * np.sin(0.5 * (k + kp))
    if dispersion.family == "continuum-quadratic":
        return (k + kp) / (2 * dispersion.params["m"])
    diff = k - kp
    close = np.abs(diff) < 1e-7
    safe = np.where(close, 1.0, diff)
    quotient = (dispersion.energy(k) - dispersion.energy(kp)) / safe
    return np.where(close, dispersion.velocity(0.5 * (k + kp)), quotient)


# one-dimensional Fourier integrals ------------------------------------------
def _fourier_rule(lo: float, hi: float, rate: float, max_width: float = 0.05,
                  order: int = 16, phase_per_panel: float = 1.5):
    n = max(int(np.ceil((hi - lo) / max_width)),
            int(np.ceil((hi - lo) * abs(rate) / phase_per_panel)), 8)
    return quadrature.composite_nodes(np.linspace(lo, hi, n + 1), order)


def gge_fermion_two_point(state: GGEState, dx: float, dt: float) -> complex:
    """<b^dag(x, t) b(0, 0)> = int dtheta/2pi e^{-i dx theta + i dt E} n."""
    lo, hi = state.domain()
    rate = abs(dx) + abs(dt) * state.max_velocity() + 1.0
    k, w = _fourier_rule(lo, hi, rate)
    disp = state.dispersion
    return complex(np.sum(w * state.n(k) * np.exp(-1j * dx * k + 1j * dt * disp.energy(k))) / TWO_PI)


def _continuum_vacuum_moments(mass: float, dx: float, dt: float) -> list[complex]:
    """(1/2pi) int dk k^m e^{i dx k - i dt k^2/(2 mass)} for m = 0, 1, 2."""
    if dt == 0:
        if dx == 0:
            raise ValueError("coincident continuum correlator is UV divergent")
        return [0j, 0j, 0j]
    a = dt / (2 * mass)
    shift = dx / (2 * a)
    f0 = np.sqrt(np.pi / (1j * a)) * np.exp(1j * dx**2 / (4 * a))
    return [f0 / TWO_PI, shift * f0 / TWO_PI, (shift**2 + 1 / (2j * a)) * f0 / TWO_PI]


def _separable_terms(disp: Dispersion, which: str):
    """Q(k,k')^2 = sum_r c_r u_r(k) v_r(k') for the separable families."""
    one = lambda k: np.ones_like(k)
    if which == "density":
        return [(1.0, one, one, 0, 0)]
    if disp.family == "lattice-cosine":
        J2 = disp.params["J"] ** 2
        return [(0.5 * J2, one, one, 0, 0),
                (-0.5 * J2, np.cos, np.cos, None, None),
                (0.5 * J2, np.sin, np.sin, None, None)]
    if disp.family == "continuum-quadratic":
        c = 1 / (4 * disp.params["m"] ** 2)
        return [(c, lambda k: k**2, one, 2, 0),
                (2 * c, lambda k: k, lambda k: k, 1, 1),
                (c, one, lambda k: k**2, 0, 2)]
    return None


def _full_window(state: GGEState, dx: float, dt: float, which: str) -> complex:
    disp = state.dispersion
    terms = _separable_terms(disp, which)
    if terms is None:
        return _windowed(state, dx, dt, None, which)
    lo, hi = state.domain()
    rate = abs(dx) + abs(dt) * state.max_velocity() + 1.0
    k, w = _fourier_rule(lo, hi, rate)
    n = state.n(k)
    E = disp.energy(k)
    fwd = w * n * np.exp(-1j * dx * k + 1j * dt * E) / TWO_PI
    bwd = w * np.exp(1j * dx * k - 1j * dt * E) / TWO_PI
    vac = None
    if not disp.compact:
        vac = _continuum_vacuum_moments(disp.params["m"], dx, dt)
    total = 0j
    for coef, u, v, _, m in terms:
        A = np.sum(fwd * u(k))
        if disp.compact:
            B = np.sum(bwd * (1 - n) * v(k))
        else:
            B = vac[m] - np.sum(bwd * n * v(k))
        total += coef * A * B
    return complex(total)


def _windowed(state: GGEState, dx: float, dt: float, window: Optional[Window], which: str,
              order: int = 16, phase_per_panel: float = 1.5, max_width: float = 0.05) -> complex:
    """Double integral in K = (k + k')/2, kappa = k' - k over a K window."""
    disp = state.dispersion
    lo, hi = state.domain()
    if window is None:
        if not disp.compact:
            raise ValueError("full-window correlators on this dispersion need a window")
        klo, khi = lo, hi
    else:
        klo, khi = max(window.lo, lo), min(window.hi, hi)
    if khi <= klo:
        return 0j
    vmax = state.max_velocity()
    edges = [klo, khi]
    if disp.compact and klo < 0 < khi:
        edges = [klo, 0.0, khi]
    nodes_K, w_K = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        kn, kw = _fourier_rule(a, b, 2 * abs(dt) * vmax + 1.0, max_width, order, phase_per_panel)
        nodes_K.append(kn)
        w_K.append(kw)
    K = np.concatenate(nodes_K)
    wK = np.concatenate(w_K)
    # kappa limits from k = K - kappa/2 in [lo, hi], and k' in [lo, hi] on compact domains
    kap_lo = 2 * (K - hi)
    kap_hi = 2 * (K - lo)
    if disp.compact or disp.family == "tabulated":
        kap_lo = np.maximum(kap_lo, 2 * (lo - K))
        kap_hi = np.minimum(kap_hi, 2 * (hi - K))
    span = float(np.max(kap_hi - kap_lo))
    rate = abs(dx) + abs(dt) * vmax + 1.0
    n_pan = max(int(np.ceil(span * rate / phase_per_panel)), int(np.ceil(span / max_width)), 8)
    x, w = quadrature.gauss_legendre(order)
    ref = (np.arange(n_pan)[:, None] + 0.5 * (1 + x[None, :])).ravel() / n_pan
    ref_w = np.tile(w / (2 * n_pan), n_pan)
    total = 0j
    chunk = max(1, int(2e6 // ref.size))
    for s in range(0, K.size, chunk):
        Ks = K[s:s + chunk, None]
        width = (kap_hi - kap_lo)[s:s + chunk, None]
        kap = kap_lo[s:s + chunk, None] + width * ref[None, :]
        wk = width * ref_w[None, :]
        k = Ks - 0.5 * kap
        kp = Ks + 0.5 * kap
        phase = dx * kap + dt * (disp.energy(k) - disp.energy(kp))
        amp = state.n(k) * (1 - state.n(kp))
        if which == "current":
            amp = amp * current_kernel(disp, k, kp) ** 2
        inner = np.sum(wk * amp * np.exp(1j * phase), axis=1)
        total += np.sum(wK[s:s + chunk] * inner)
    return complex(total / TWO_PI**2)


def _as_window(window) -> Optional[Window]:
    if window is None or isinstance(window, Window):
        return window
    center, width = window
    return Window(float(center), float(width))


def gge_density_density(state: GGEState, dx: float, dt: float = 0.0, window=None) -> complex:
    """Connected <q(x, t) q(0, 0)> of the density, or of a single-mode density.

    Parameters
    ----------
    state : GGEState
    dx, dt : float
        Separation. On the lattice dx is an integer number of sites.
    window : Window, (center, width) or None
        Restrict K = (k + k')/2 to a window; None is the full density.
    """
    window = _as_window(window)
    if window is None:
        return _full_window(state, dx, dt, "density")
    return _windowed(state, dx, dt, window, "density")


def gge_current_current(state: GGEState, dx: float, dt: float, window=None) -> complex:
    """Connected <j(x, t) j(0, 0)> with the family's current kernel."""
    window = _as_window(window)
    if window is None:
        return _full_window(state, dx, dt, "current")
    return _windowed(state, dx, dt, window, "current")


def quench_pairing_correlator(spec: QuenchSpec, dx: float, t: float, s: float) -> complex:
    """<b(x, t) b(y, s)> = -int dk/2pi e^{ik(x-y)} e^{-iE(k)(t+s)} g_k f_k^*, dx = x - y."""
    lo, hi = spec.domain()
    disp = spec.dispersion
    rate = abs(dx) + abs(t + s) * disp.max_velocity(spec.support) + 1.0
    k, w = _fourier_rule(lo, hi, rate)
    val = -np.sum(w * np.exp(1j * dx * k - 1j * (t + s) * disp.energy(k)) * spec.g(k) * np.conj(spec.f(k)))
    return complex(val / TWO_PI)


# quench correction ----------------------------------------------------------
@dataclass(frozen=True)
class CorrectionResult:
    """Pairing correction for each window centre, with a round-off floor."""

    theta0: np.ndarray
    values: np.ndarray
    floor: float


class _CumulativeB:
    """Cumulative integral of B on a uniform grid, evaluable at arbitrary points."""

    def __init__(self, B, lo: float, hi: float, h: float, order: int):
        self.B, self.lo, self.h = B, lo, h
        self.N = int(round((hi - lo) / h))
        self.hi = lo + self.N * h
        self.x, self.w = quadrature.gauss_legendre(order)
        cells = self._cell_integrals(np.arange(self.N), np.full(self.N, h))
        self.cum = np.concatenate([[0j], np.cumsum(cells)])
        self._partial: dict[float, np.ndarray] = {}

    def _cell_integrals(self, m, delta):
        start = self.lo + m * self.h
        nodes = start[:, None] + 0.5 * delta[:, None] * (1 + self.x[None, :])
        return (self.B(nodes.ravel()).reshape(nodes.shape) * self.w[None, :]).sum(1) * 0.5 * delta

    def __call__(self, u: np.ndarray) -> np.ndarray:
        u = np.clip(u, self.lo, self.hi)
        pos = (u - self.lo) / self.h
        m = np.clip(np.floor(pos + 1e-9).astype(int), 0, self.N)
        delta = u - (self.lo + m * self.h)
        out = self.cum[m].copy()
        part = np.abs(delta) > 1e-9 * self.h
        if np.any(part):
            out[part] += self._cell_integrals(m[part], delta[part])
        return out

    def shifted(self, c: float) -> np.ndarray:
        """Cum(c - k_j) on the grid k_j = lo + j h, reusing partial cells per offset."""
        j = np.arange(self.N + 1)
        pos = (c - 2 * self.lo) / self.h
        base = int(np.floor(pos + 1e-9))
        frac = pos - base
        m = base - j
        inside = (m >= 0) & (m <= self.N)
        out = np.where(m < 0, 0j, self.cum[-1])
        out[inside] = self.cum[m[inside]]
        if frac > 1e-9:
            key = round(frac, 9)
            if key not in self._partial:
                self._partial[key] = self._cell_integrals(np.arange(self.N), np.full(self.N, frac * self.h))
            ok = (m >= 0) & (m < self.N)
            out[ok] += self._partial[key][m[ok]]
        return out


def quench_correction_density(spec: QuenchSpec, theta0, eps: float, zeta: float, ell: float,
                              mode: str = "pair", phase_per_cell: float = 1.0,
                              order: int = 8) -> CorrectionResult:
    """Pairing correction to single-mode density correlations at (x, t) = (zeta ell, ell).

    Parameters
    ----------
    spec : QuenchSpec
    theta0 : float or array
        Window centres; every window has width ``eps``.
    zeta : float
        Ray x / t.
    ell : float
        Scale parameter, t = ell and x = zeta * ell.
    mode : {'pair', 'opposite', 'same'}
        'opposite' correlates q_theta with q_{-theta}; 'pair' is the pair
        mode q_theta + q_{-theta} with itself; 'same' correlates q_theta
        with itself, which only overlaps its mirror when theta0 < eps/2.

    Returns
    -------
    CorrectionResult
        ``floor`` is a conservative round-off level of the quadrature;
        values below it are not resolved.

    Notes
    -----
    The band k + k' in [c1, c2] is integrated as
    int dk A(k) [Cum(c2 - k) - Cum(c1 - k)], with Cum the cumulative
    integral of B on a uniform grid whose cells carry at most
    ``phase_per_cell`` radians. The outer integral is the trapezoid rule on
    the same grid; all amplitudes vanish at the domain ends.
    """
    theta0 = np.atleast_1d(np.asarray(theta0, dtype=float))
    disp = spec.dispersion
    x, t = zeta * ell, float(ell)
    lo, hi = spec.domain()
    vmax = disp.max_velocity(spec.support)
    rate = abs(x) + 2 * abs(t) * vmax + 1.0
    h = phase_per_cell / rate
    if disp.compact:
        N = int(np.ceil((hi - lo) / h))
        h = (hi - lo) / N
    else:
        # eps is a whole number of cells, so centres on the (m + 1/2) eps
        # lattice give band edges on grid nodes; the support is padded to match
        h = eps / np.ceil(eps / h)
        R = np.ceil(hi / h) * h
        lo, hi = -R, R
        N = int(round((hi - lo) / h))
    E = disp.energy

    def mask(k):
        return (k >= lo) & (k <= hi)

    def A(k):
        return np.where(mask(k), np.exp(-1j * x * k + 2j * t * E(k)) * np.conj(spec.g(k)) * spec.f(k), 0)

    def B(k):
        return np.where(mask(k), np.exp(1j * x * k - 2j * t * E(k)) * spec.g(k) * np.conj(spec.f(k)), 0)

    cum = _CumulativeB(B, lo, hi, h, order)
    k = lo + h * np.arange(N + 1)
    Ak = A(k)
    wt = np.full(N + 1, h)
    wt[[0, -1]] *= 0.5
    Aw = Ak * wt

    def band(c1: float, c2: float) -> complex:
        return complex(np.sum(Aw * (cum.shifted(c2) - cum.shifted(c1))))

    values = []
    for th in theta0:
        win = Window(th, eps)
        if mode == "opposite":
            bands = [(2 * win.lo, 2 * win.hi)]
        elif mode == "pair":
            bands = [(2 * win.lo, 2 * win.hi), (-2 * win.hi, -2 * win.lo)]
        elif mode == "same":
            lo2, hi2 = max(win.lo, -win.hi), min(win.hi, -win.lo)
            bands = [(2 * lo2, 2 * hi2)] if hi2 > lo2 else []
        else:
            raise ValueError("mode must be 'pair', 'opposite' or 'same'")
        values.append(sum((band(*b) for b in bands), 0j) / TWO_PI**2)
    scale = np.sum(np.abs(Ak) * wt) * np.sum(np.abs(B(k)) * wt) / TWO_PI**2
    return CorrectionResult(theta0, np.array(values), float(1e-13 * scale))


# decay fits -----------------------------------------------------------------
@dataclass(frozen=True)
class DecayFit:
    model: str
    exponent: float
    prefactor: float
    r2: float
    curvature: float
    curved: bool
    n_used: int
    n_unresolved: int


def decay_exponent_fit(x, y, model: str = "power", floor: float = 0.0,
                       min_samples: int = 6, min_resolved: int = 4,
                       curvature_tol: float = 0.1) -> DecayFit:
    """Least-squares decay law through positive samples.

    ``model='power'`` fits log y = log A + p log x; ``model='exponential'``
    fits log y = log A + p x. Samples with y <= floor are dropped as
    unresolved. The curvature is the quadratic coefficient of the same
    fit scaled by the squared half-range of the abscissa; a value above
    ``curvature_tol`` flags a non-power-law regime.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < min_samples:
        raise ValueError(f"need at least {min_samples} samples")
    keep = np.isfinite(y) & (y > max(floor, 0.0))
    if keep.sum() < min_resolved:
        raise InsufficientDataError(
            f"only {int(keep.sum())} of {x.size} samples above the floor {floor:.3g}", int(keep.sum()))
    if model == "power":
        if np.any(x[keep] <= 0):
            raise ValueError("power-law fit needs positive abscissae")
        X = np.log(x[keep])
    elif model == "exponential":
        X = x[keep]
    else:
        raise ValueError("model must be 'power' or 'exponential'")
    Y = np.log(y[keep])
    slope, icpt = np.polyfit(X, Y, 1)
    resid = Y - (slope * X + icpt)
    ss = np.sum((Y - Y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss if ss > 0 else 1.0
    c2 = np.polyfit(X, Y, 2)[0] if keep.sum() >= 3 else 0.0
    curvature = abs(c2) * (0.5 * (X.max() - X.min())) ** 2
    return DecayFit(model, float(slope), float(np.exp(icpt)), float(r2), float(curvature),
                    bool(curvature > curvature_tol), int(keep.sum()), int((~keep).sum()))


@dataclass
class LightConeScan:
    theta0: np.ndarray
    zeta: np.ndarray
    eps: float
    ells: np.ndarray
    exponent: np.ndarray
    predicted: np.ndarray
    boundary: np.ndarray
    in_threshold: float = -1.2
    out_threshold: float = -1.4
    values: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def observed_in(self) -> np.ndarray:
        return self.exponent >= self.in_threshold

    @property
    def observed_out(self) -> np.ndarray:
        return self.exponent <= self.out_threshold

    @property
    def agrees(self) -> np.ndarray:
        return np.where(self.predicted, self.observed_in, self.observed_out)

    @property
    def disagreements_off_boundary(self) -> int:
        return int(np.sum(~self.agrees & ~self.boundary))


def light_cone_scan(spec: QuenchSpec, theta0: Sequence[float], eps: float, zeta: Sequence[float],
                    ells: Sequence[float], mode: str = "pair", boundary_fraction: float = 0.25,
                    **fit_kwargs) -> LightConeScan:
    """Fit the ell-exponent of the pairing correction on a (theta0, zeta) grid.

    Cells whose samples drop below the round-off floor at large ell decay
    faster than any resolvable power and get exponent -inf. A cell is a
    boundary cell when zeta/2 lies within ``boundary_fraction`` of the
    window's velocity range from one of its edges.
    """
    theta0 = np.asarray(theta0, dtype=float)
    zeta = np.asarray(zeta, dtype=float)
    ells = np.asarray(ells, dtype=float)
    disp = spec.dispersion
    values = np.zeros((theta0.size, zeta.size, ells.size), dtype=complex)
    floors = np.zeros((zeta.size, ells.size))
    for j, z in enumerate(zeta):
        for m, L in enumerate(ells):
            res = quench_correction_density(spec, theta0, eps, z, L, mode=mode)
            values[:, j, m] = res.values
            floors[j, m] = res.floor
    exponent = np.zeros((theta0.size, zeta.size))
    predicted = np.zeros_like(exponent, dtype=bool)
    boundary = np.zeros_like(exponent, dtype=bool)
    for i, th in enumerate(theta0):
        v_lo, v_hi = disp.velocity(np.array([th - eps / 2, th + eps / 2]))
        band = abs(v_hi - v_lo)
        for j, z in enumerate(zeta):
            predicted[i, j] = in_light_cone(disp, th, eps, z)
            boundary[i, j] = min(abs(z / 2 - v_lo), abs(z / 2 - v_hi)) < boundary_fraction * band
            mags = np.abs(values[i, j])
            try:
                exponent[i, j] = decay_exponent_fit(ells, mags, floor=floors[j].max(), **fit_kwargs).exponent
            except InsufficientDataError:
                exponent[i, j] = -np.inf
    return LightConeScan(theta0, zeta, eps, ells, exponent, predicted, boundary, values=values)
