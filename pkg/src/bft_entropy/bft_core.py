"""
Ballistic fluctuation theory for free fermions.

Theoretical Background
----------------------
For a charge with one-particle eigenvalue h(theta) measured along a
space-time ray of angle gamma (gamma = pi/2 is a fixed time slice,
gamma = 0 a fixed position), the flow of the pseudo-energy is

    eps_lambda(theta) = w(theta) + lambda * sgn(tan(gamma) - v(theta)) * h(theta),

and the scaled cumulant generating function (SCGF) is

    F(lambda; gamma) = -int dtheta/(2 pi) |v cos(gamma) - sin(gamma)|
                       * [f(eps_lambda) - f(w)],

with free energy density f(eps) = -log(1 + e^{-eps}) on the principal
branch. The sign sgn(tan(gamma) - v) is evaluated as
sgn(sin(gamma) - v cos(gamma)), which is the same thing for
cos(gamma) > 0 and stays defined at gamma = pi/2.

The integrand kinks where v(theta) = tan(gamma), so the domain is split
there before running the adaptive quadrature.
"""

from __future__ import annotations

from math import factorial
from typing import Callable, Sequence, Union

import numpy as np
from numpy.polynomial import Polynomial

from . import quadrature
from .state import GGEState

Charge = Union[float, complex, Callable[[np.ndarray], np.ndarray]]
TWO_PI = 2.0 * np.pi


def as_charge(h: Charge) -> Callable[[np.ndarray], np.ndarray]:
    """Wrap a scalar charge eigenvalue into a vectorised function."""
    if callable(h):
        return h
    value = h
    return lambda t: np.full(np.shape(t), value)


def free_energy_density(eps):
    """f(eps) = -log(1 + e^{-eps}) on the principal branch.

    Real input returns real output. For complex input with Re(eps) very
    negative the identity log(1 + z) = log z + log1p(1/z) is used and the
    imaginary part is wrapped back into (-pi, pi].
    """
    eps = np.asarray(eps)
    if np.isrealobj(eps):
        return -np.logaddexp(0.0, -eps.astype(float))
    eps = eps.astype(complex)
    out = np.empty_like(eps)
    safe = eps.real >= -30.0
    out[safe] = -np.log1p(np.exp(-eps[safe]))
    big = ~safe
    if np.any(big):
        val = -eps[big] + np.log1p(np.exp(eps[big]))
        im = np.pi - np.mod(np.pi - val.imag, 2 * np.pi)
        out[big] = -(val.real + 1j * im)
    return out


def free_energy_shift(eps, w):
    """f(eps) - f(w) for real w, as -log1p(n (e^{w - eps} - 1)) with n = 1/(1 + e^w).

    Dividing 1 + e^{-eps} by the positive number 1 + e^{-w} leaves its
    argument unchanged, so this is the difference of principal-branch
    values. It vanishes exactly at eps = w. Where Re(w - eps) > 30 the
    direct difference is used to avoid overflow.
    """
    eps = np.asarray(eps).astype(complex)
    w = np.broadcast_to(np.asarray(w, dtype=float), eps.shape)
    d = w - eps
    big = d.real > 30.0
    out = np.empty_like(eps)
    safe = ~big
    if np.any(safe):
        n = np.exp(-np.logaddexp(0.0, w[safe]))
        out[safe] = -np.log1p(n * np.expm1(d[safe]))
    if np.any(big):
        out[big] = free_energy_density(eps[big]) - free_energy_density(w[big])
    return out


def ray_factors(dispersion, theta, gamma: float):
    """Return (|v cos g - sin g|, sgn(sin g - v cos g)) on ``theta``."""
    v = dispersion.velocity(theta)
    c, s = np.cos(gamma), np.sin(gamma)
    if abs(c) < 1e-15:
        c = 0.0
    d = s - v * c
    return np.abs(d), np.sign(d)


def ray_breakpoints(state: GGEState, gamma: float) -> np.ndarray:
    """Rapidities where v = tan(gamma), the kinks of the ray weight."""
    c = np.cos(gamma)
    if abs(c) < 1e-15:
        return np.empty(0)
    return state.dispersion.kinks(np.tan(gamma), state.cutoff)


def epsilon_flow(state: GGEState, h: Charge, lam: complex, gamma: float, theta) -> np.ndarray:
    """eps_lambda(theta) along the ray of angle ``gamma``."""
    theta = np.asarray(theta, dtype=float)
    _, sgn = ray_factors(state.dispersion, theta, gamma)
    return state.w(theta) + lam * sgn * as_charge(h)(theta)


def scgf(state: GGEState, h: Charge, lam: complex, gamma: float,
         rtol: float = quadrature.DEFAULT_RTOL, breakpoints: Sequence[float] = (),
         atol: float = 1e-15) -> complex:
    """Scaled cumulant generating function F(lambda; gamma).

    Parameters
    ----------
    state : GGEState
    h : float, complex or callable
        One-particle charge eigenvalue h(theta).
    lam : complex
        Counting parameter. Imaginary values give the twist-field
        exponents used by the entanglement sectors.
    gamma : float
        Ray angle in [0, pi/2].
    rtol : float
        Relative tolerance of the adaptive quadrature.
    breakpoints : sequence of float
        Extra kinks of ``h`` to split at.

    Returns
    -------
    complex
    """
    hf = as_charge(h)
    disp = state.dispersion

    def integrand(t):
        weight, sgn = ray_factors(disp, t, gamma)
        w = state.w(t)
        eps = w + lam * sgn * hf(t)
        return -weight * free_energy_shift(eps, w) / TWO_PI

    lo, hi = state.domain()
    pts = np.concatenate([ray_breakpoints(state, gamma), np.asarray(breakpoints, dtype=float)])
    return quadrature.integrate(integrand, lo, hi, breakpoints=pts, rtol=rtol, atol=atol).value


def _derivative_polynomials(order: int) -> list[Polynomial]:
    """P_m with d^m f / d eps^m = P_m(n); P_1 = n, P_{m+1} = -n (1 - n) P_m'."""
    dn = Polynomial([0.0, -1.0, 1.0])  # dn/deps = -n (1 - n)
    polys = [Polynomial([0.0, 1.0])]
    for _ in range(order - 1):
        polys.append(polys[-1].deriv() * dn)
    return polys


def _central_weights(m: int, half: int) -> np.ndarray:
    offsets = np.arange(-half, half + 1, dtype=float)
    vander = np.vander(offsets, increasing=True).T
    rhs = np.zeros(offsets.size)
    rhs[m] = factorial(m)
    return np.linalg.solve(vander, rhs)


def scaled_cumulants(state: GGEState, h: Charge, gamma: float, order: int = 4,
                     method: str = "analytic", step: float = 1e-3,
                     rtol: float = 1e-13) -> np.ndarray:
    """Scaled cumulants c_1 ... c_order, the lambda-derivatives of F at 0.

    ``method='analytic'`` differentiates the integrand exactly through the
    polynomials P_m(n). ``method='finite-difference'`` uses central
    differences of F at real lambda with steps s_m and s_m/2 combined by
    one Richardson step, where s_m = step * 10^((m-1)/2) keeps round-off
    below truncation error at higher orders. The finite-difference path
    is kept as a cross-check of the analytic one.
    """
    if not 1 <= order <= 8:
        raise ValueError("order must be between 1 and 8")
    hf = as_charge(h)
    lo, hi = state.domain()
    pts = ray_breakpoints(state, gamma)
    if method == "analytic":
        polys = _derivative_polynomials(order)
        out = []
        for m, poly in enumerate(polys, start=1):
            def integrand(t, m=m, poly=poly):
                weight, sgn = ray_factors(state.dispersion, t, gamma)
                return -weight * (sgn * hf(t)) ** m * poly(state.n(t)) / TWO_PI
            out.append(quadrature.integrate(integrand, lo, hi, breakpoints=pts,
                                            rtol=rtol, atol=1e-16).value.real)
        return np.array(out)
    if method != "finite-difference":
        raise ValueError(f"unknown method {method!r}")
    out = []
    cache: dict[float, complex] = {}

    def F(lam: float) -> complex:
        if lam not in cache:
            cache[lam] = scgf(state, hf, lam, gamma, rtol=rtol, atol=1e-16)
        return cache[lam]

    for m in range(1, order + 1):
        half = (m + 1) // 2
        wts = _central_weights(m, half)
        def D(s):
            return sum(c * F(j * s) for c, j in zip(wts, range(-half, half + 1))) / s**m
        sm = step * 10 ** ((m - 1) / 2)
        out.append(((4 * D(sm / 2) - D(sm)) / 3).real)
    return np.array(out)
