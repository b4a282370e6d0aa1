"""
Renyi and von Neumann entanglement entropies from sector SCGFs.

Theoretical Background
----------------------
The alpha-copy branch-point twist field of a free fermion factorises into
U(1) sectors labelled by p in I_alpha = {-alpha+1, -alpha+3, ..., alpha-1},
each a vertex operator with charge h_p = pi p / alpha. Its two-point
function on a ray is controlled by F_p(-i), the SCGF of the particle
number at lambda = -i with h = h_p (fixed time) or h = -h_p (fixed
position). For integer alpha the product over sectors collapses,

    prod_p (1 + e^{i h_p - w}) = 1 + e^{-alpha w},

so that

    sum_p F_p = int dtheta/(2 pi) [log(1 + e^{-alpha w}) - alpha log(1 + e^{-w})]
              = (1 - alpha) int dtheta/(2 pi) H_alpha(n),

with H_alpha(n) = log(n^alpha + (1-n)^alpha) / (1 - alpha). This gives
the entropy density of a stationary state (fixed time) and the growth rate
after a quench (fixed position, weighted by |v|). For an interval of
length x at time t after a pair-producing quench, particles slower than
x / (2 t) contribute through the time-like sector SCGF and faster ones
through the space-like one:

    S_alpha(x, t) = (1/(1-alpha)) [2 t sum_p F_dyn,p + x sum_p F_stat,p]
                  = int dtheta/(2 pi) min(x, 2 t |v|) H_alpha(n).

The von Neumann entropy alpha = 1 is the exact closed-form limit
H_1 = -n log n - (1-n) log(1-n), never a numerical continuation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import entr

from . import quadrature
from .bft_core import free_energy_shift, scgf
from .state import GGEState

TWO_PI = 2.0 * np.pi


def h_alpha(n, alpha: float):
    """Renyi entropy density H_alpha(n) of a single fermionic mode.

    Parameters
    ----------
    n : array_like
        Occupation in [0, 1].
    alpha : float
        Renyi index, alpha > 0. ``alpha == 1`` returns the von Neumann
        density with 0 log 0 := 0.

    Returns
    -------
    ndarray
        Non-negative, symmetric under n -> 1 - n.
    """
    n = np.asarray(n, dtype=float)
    if alpha <= 0:
        raise ValueError("Renyi index must be positive")
    if np.any((n < -1e-14) | (n > 1 + 1e-14)):
        raise ValueError("occupation outside [0, 1]")
    n = np.clip(n, 0.0, 1.0)
    if alpha == 1:
        return entr(n) + entr(1.0 - n)
    with np.errstate(divide="ignore"):
        ln, lm = np.log(n), np.log1p(-n)
    return np.logaddexp(alpha * ln, alpha * lm) / (1.0 - alpha)


def sector_momenta(alpha: int) -> np.ndarray:
    """I_alpha = {-alpha+1, -alpha+3, ..., alpha-1}."""
    if int(alpha) != alpha or alpha < 2:
        raise ValueError("sector decomposition needs an integer alpha >= 2")
    alpha = int(alpha)
    return np.arange(-alpha + 1, alpha, 2)


def sector_charges(alpha: int) -> np.ndarray:
    """h_p = pi p / alpha."""
    return np.pi * sector_momenta(alpha) / alpha


def _integrate(state: GGEState, fun, breakpoints=(), rtol=1e-12) -> float:
    lo, hi = state.domain()
    return quadrature.integrate(fun, lo, hi, breakpoints=breakpoints, rtol=rtol,
                                atol=1e-16).value.real


def renyi_rate_space(state: GGEState, alpha: float, rtol: float = 1e-12) -> float:
    """Entropy per unit length in the stationary state, int dtheta/2pi H_alpha."""
    return _integrate(state, lambda t: h_alpha(state.n(t), alpha) / TWO_PI, rtol=rtol)


def renyi_rate_time(state: GGEState, alpha: float, rtol: float = 1e-12) -> float:
    """Entropy growth per unit time of one boundary, int dtheta/2pi |v| H_alpha."""
    disp = state.dispersion
    return _integrate(state, lambda t: np.abs(disp.velocity(t)) * h_alpha(state.n(t), alpha) / TWO_PI,
                      disp.stationary_points(state.cutoff), rtol)


def renyi_profile(state: GGEState, alpha: float, x: float, t: float, rtol: float = 1e-12) -> float:
    """Quasiparticle profile int dtheta/2pi min(x, 2 t |v|) H_alpha(n)."""
    if x <= 0 or t < 0:
        raise ValueError("need x > 0 and t >= 0")
    if t == 0:
        return 0.0
    disp = state.dispersion
    pts = np.concatenate([disp.velocity_crossings(x / (2 * t), state.cutoff),
                          disp.stationary_points(state.cutoff)])
    fun = lambda th: (np.minimum(x, 2 * t * np.abs(disp.velocity(th)))
                      * h_alpha(state.n(th), alpha) / TWO_PI)
    return _integrate(state, fun, pts, rtol)


def sector_scgfs(state: GGEState, alpha: int, direction: str = "space",
                 rtol: float = 1e-12) -> np.ndarray:
    """F_p(-i) for every sector p in I_alpha.

    ``direction='space'`` evaluates the fixed-time ray (gamma = pi/2,
    h = h_p), ``'time'`` the fixed-position ray (gamma = 0, h = -h_p).
    """
    hp = sector_charges(alpha)
    if direction == "space":
        return np.array([scgf(state, h, -1j, np.pi / 2, rtol=rtol) for h in hp])
    if direction == "time":
        return np.array([scgf(state, -h, -1j, 0.0, rtol=rtol) for h in hp])
    raise ValueError("direction must be 'space' or 'time'")


def sector_scgf_sum(state: GGEState, alpha: int, direction: str = "space",
                    rtol: float = 1e-12) -> complex:
    return complex(np.sum(sector_scgfs(state, alpha, direction, rtol)))


@dataclass(frozen=True)
class IdentityCheck:
    lhs: complex
    rhs: float
    tol: float

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def ok(self) -> bool:
        return self.residual <= self.tol * (1 + abs(self.rhs))


def sector_identity_check(state: GGEState, alpha: int, direction: str = "space",
                          tol: float = 1e-9) -> IdentityCheck:
    """Compare sum_p F_p with (1 - alpha) times the closed-form rate."""
    lhs = sector_scgf_sum(state, alpha, direction)
    rate = renyi_rate_space(state, alpha) if direction == "space" else renyi_rate_time(state, alpha)
    return IdentityCheck(lhs, (1 - alpha) * rate, tol)


@dataclass(frozen=True)
class FCSSplit:
    """Sector SCGFs restricted to slow (|v| < xi/2) and fast (|v| > xi/2) modes."""

    xi: float
    dynamic: np.ndarray
    static: np.ndarray


def fcs_split(state: GGEState, alpha: int, xi: float, rtol: float = 1e-12) -> FCSSplit:
    """Split each sector into its time-like and space-like parts at velocity xi/2.

    F_dyn,p = int_{|v|<xi/2} dtheta/2pi |v| log((1 + e^{i h_p sgn(v) - w}) / (1 + e^{-w}))
    F_stat,p = int_{|v|>xi/2} dtheta/2pi log((1 + e^{i h_p - w}) / (1 + e^{-w}))
    """
    if xi < 0:
        raise ValueError("xi must be non-negative")
    disp = state.dispersion
    lo, hi = state.domain()
    pts = np.concatenate([disp.velocity_crossings(xi / 2, state.cutoff),
                          disp.stationary_points(state.cutoff)])
    dyn, stat = [], []
    for h in sector_charges(alpha):
        def fd(t, h=h):
            v = disp.velocity(t)
            w = state.w(t)
            slow = np.abs(v) < xi / 2
            val = -np.abs(v) * free_energy_shift(w - 1j * np.sign(v) * h, w)
            return np.where(slow, val, 0.0) / TWO_PI

        def fs(t, h=h):
            v = disp.velocity(t)
            w = state.w(t)
            val = -free_energy_shift(w - 1j * h, w)
            return np.where(np.abs(v) >= xi / 2, val, 0.0) / TWO_PI

        dyn.append(quadrature.integrate(fd, lo, hi, breakpoints=pts, rtol=rtol, atol=1e-16).value)
        stat.append(quadrature.integrate(fs, lo, hi, breakpoints=pts, rtol=rtol, atol=1e-16).value)
    return FCSSplit(float(xi), np.array(dyn), np.array(stat))


def fcs_profile_check(state: GGEState, alpha: int, x: float, t: float,
                     tol: float = 1e-8) -> IdentityCheck:
    """S_alpha from the split sector SCGFs at xi = x / t, against renyi_profile."""
    if x <= 0 or t <= 0:
        raise ValueError("need x > 0 and t > 0")
    split = fcs_split(state, alpha, x / t)
    lhs = (2 * t * split.dynamic.sum() + x * split.static.sum()) / (1 - alpha)
    return IdentityCheck(complex(lhs), renyi_profile(state, alpha, x, t), tol)
