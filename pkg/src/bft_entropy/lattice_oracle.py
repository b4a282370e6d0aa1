"""
Exact Gaussian-state oracle on a finite ring.

The quench state on a ring of L sites (periodic in the fermions, momenta
k_j = 2 pi j / L) is Gaussian, so the reduced state of ``ell`` contiguous
sites is fixed by the two-point matrices

    C_xy = <b^dag_x b_y> = (1/L) sum_k e^{-ik(x-y)} |g_k|^2,
    F_xy = <b_x b_y>     = -(1/L) sum_k e^{ik(x-y)} e^{-2i E_k t} g_k f_k^*.

The 2 ell x 2 ell block matrix [[C, F], [F^dag, 1 - C^T]] has eigenvalues
in pairs (nu, 1 - nu), and S_alpha = (1/2) sum_nu H_alpha(nu).

A brute-force Fock-space construction for very small rings is included
as an independent check of these formulas.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np
import scipy.linalg as sla

from .entropy import h_alpha
from .state import GGEState, QuenchSpec

Source = Union[QuenchSpec, GGEState]


class RevivalGuardError(ValueError):
    """Requested interval or time would be contaminated by finite-size revivals."""


def ring_momenta(L: int) -> np.ndarray:
    if L < 2 or L % 2:
        raise ValueError("ring size must be an even integer >= 2")
    return 2 * np.pi * np.arange(-L // 2, L // 2) / L


def _lattice_dispersion(source: Source):
    disp = source.dispersion
    if not disp.compact:
        raise ValueError("the lattice oracle needs a lattice dispersion")
    return disp


def _toeplitz_from_symbol(symbol: np.ndarray, k: np.ndarray, ell: int, sign: int) -> np.ndarray:
    """M_xy = (1/L) sum_k e^{sign * i k (x - y)} symbol(k) for 0 <= x, y < ell."""
    d = np.arange(-(ell - 1), ell)
    coeff = np.exp(sign * 1j * np.outer(d, k)) @ symbol / k.size
    col = coeff[ell - 1:]          # d = x - y >= 0, first column
    row = coeff[ell - 1::-1]       # d = x - y <= 0, first row
    return sla.toeplitz(col, row)


def correlation_matrices(source: Source, L: int, ell: int, t: float = 0.0,
                         antisymmetry_tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """Two-point matrices (C, F) of ``ell`` contiguous sites at time ``t``.

    A GGEState source returns F = 0 and ignores ``t``.
    """
    disp = _lattice_dispersion(source)
    if not 1 <= ell <= L:
        raise ValueError("need 1 <= ell <= L")
    k = ring_momenta(L)
    if isinstance(source, GGEState):
        C = _toeplitz_from_symbol(source.n(k).astype(complex), k, ell, -1)
        return C, np.zeros_like(C)
    g, f = source.g(k), source.f(k)
    C = _toeplitz_from_symbol(np.abs(g) ** 2 + 0j, k, ell, -1)
    pair = -np.exp(-2j * disp.energy(k) * t) * g * np.conj(f)
    F = _toeplitz_from_symbol(pair, k, ell, +1)
    if np.max(np.abs(F + F.T), initial=0.0) > antisymmetry_tol:
        raise ValueError("pairing matrix is not antisymmetric; g f^* must be odd in k")
    return C, F


def gge_correlation_matrix(state: GGEState, ell: int, points: int | None = None) -> np.ndarray:
    """C_xy = int dk/2pi e^{-ik(x-y)} n(k) on the infinite chain.

    The Fourier integral of the smooth periodic occupation is evaluated
    with the trapezoid rule on ``points`` nodes, which converges
    geometrically.
    """
    _lattice_dispersion(state)
    points = points or max(8192, 16 * ell)
    points += points % 2
    k = ring_momenta(points)
    return _toeplitz_from_symbol(state.n(k).astype(complex), k, ell, -1)


def block_correlation(C: np.ndarray, F: np.ndarray) -> np.ndarray:
    ell = C.shape[0]
    return np.block([[C, F], [F.conj().T, np.eye(ell) - C.T]])


def entanglement_spectrum(C: np.ndarray, F: np.ndarray, hermiticity_tol: float = 1e-12) -> np.ndarray:
    """Sorted eigenvalues of the block correlation matrix."""
    M = block_correlation(C, F)
    if np.max(np.abs(M - M.conj().T)) > hermiticity_tol:
        raise ValueError("block correlation matrix is not Hermitian")
    return np.linalg.eigvalsh(0.5 * (M + M.conj().T))


def renyi_exact(C: np.ndarray, F: np.ndarray, alpha: float) -> float:
    """S_alpha = (1/2) sum over the 2 ell eigenvalues of H_alpha(nu)."""
    nu = np.clip(entanglement_spectrum(C, F), 0.0, 1.0)
    return 0.5 * float(np.sum(h_alpha(nu, alpha)))


def fcs_determinant(C: np.ndarray, lam: complex) -> complex:
    """log det(I + (e^lam - 1) C) from a pivoted LU factorisation.

    The logarithm is the sum of principal logarithms of the pivots plus
    i pi per row interchange, a continuous branch in lam whenever no
    pivot crosses the negative real axis.
    """
    M = np.eye(C.shape[0]) + (np.exp(lam) - 1.0) * C
    lu, piv = sla.lu_factor(M)
    swaps = int(np.count_nonzero(piv != np.arange(piv.size)))
    return complex(np.sum(np.log(np.diag(lu).astype(complex))) + 1j * np.pi * (swaps % 2))


@dataclass(frozen=True)
class RateFit:
    intercept: complex
    slope: complex
    sizes: np.ndarray
    rates: np.ndarray


def fcs_rate_extrapolation(state: GGEState, lam: complex, sizes: Iterable[int]) -> RateFit:
    """Fit log det / ell = a + b / ell over ``sizes`` and return the intercept a."""
    sizes = np.asarray(list(sizes), dtype=int)
    if sizes.size < 2:
        raise ValueError("need at least two interval sizes")
    ell_max = int(sizes.max())
    C_full = gge_correlation_matrix(state, ell_max)
    rates = np.array([fcs_determinant(C_full[:m, :m], lam) / m for m in sizes])
    A = np.column_stack([np.ones(sizes.size), 1.0 / sizes])
    coef_re = np.linalg.lstsq(A, rates.real, rcond=None)[0]
    coef_im = np.linalg.lstsq(A, rates.imag, rcond=None)[0]
    return RateFit(complex(coef_re[0], coef_im[0]), complex(coef_re[1], coef_im[1]), sizes, rates)


def check_revival_guards(spec: QuenchSpec, L: int, ell: int, times) -> None:
    vmax = spec.dispersion.max_velocity()
    if ell > L / 4:
        raise RevivalGuardError(f"ell = {ell} exceeds L/4 = {L / 4:g}")
    tmax = L / (4 * vmax)
    bad = [t for t in np.atleast_1d(times) if t > tmax + 1e-12 or t < 0]
    if bad:
        raise RevivalGuardError(f"times {bad} outside [0, L/(4 v_max)] = [0, {tmax:g}]")


def quench_entropy_scan(spec: QuenchSpec, L: int, ell: int, alpha: float, times) -> np.ndarray:
    """Exact S_alpha(t) of ``ell`` contiguous sites after the quench.

    Guards: ell <= L/4 and t <= L / (4 v_max), beyond which quasiparticles
    wrapping around the ring contaminate the interval.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    check_revival_guards(spec, L, ell, times)
    return np.array([renyi_exact(*correlation_matrices(spec, L, ell, t), alpha) for t in times])


# brute force --------------------------------------------------------------
def _jordan_wigner(L: int) -> list[np.ndarray]:
    sz = np.diag([1.0, -1.0])
    lower = np.array([[0.0, 1.0], [0.0, 0.0]])
    ops = []
    for x in range(L):
        M = np.array([[1.0]])
        for y in range(L):
            M = np.kron(M, sz if y < x else lower if y == x else np.eye(2))
        ops.append(M)
    return ops


def brute_force_renyi(spec: QuenchSpec, L: int, ell: int, t: float, alpha: float) -> float:
    """S_alpha of the first ``ell`` sites from the full many-body state.

    The initial state is the common vacuum of a_k = f_k b_k - g_k b^dag_{-k},
    evolved with H = sum_k E_k b^dag_k b_k, and reduced by a partial trace.
    Exponential cost, meant for L <= 10.
    """
    if L > 12:
        raise ValueError("brute force is limited to L <= 12")
    disp = _lattice_dispersion(spec)
    k = ring_momenta(L)
    c = _jordan_wigner(L)
    x = np.arange(L)
    b = [sum(np.exp(-1j * kk * xx) * c[xx] for xx in x) / np.sqrt(L) for kk in k]
    minus = [int(np.argmin(np.abs(np.angle(np.exp(1j * (k + kk)))))) for kk in k]
    f, g = spec.f(k), spec.g(k)
    a = [f[i] * b[i] - g[i] * b[minus[i]].conj().T for i in range(L)]
    number = sum(ai.conj().T @ ai for ai in a)
    vals, vecs = np.linalg.eigh(number)
    if vals[0] > 1e-10 or vals[1] < 1e-6:
        raise ValueError("Bogoliubov modes do not define a unique vacuum")
    psi = vecs[:, 0]
    H = sum(e * bi.conj().T @ bi for e, bi in zip(disp.energy(k), b))
    psi = sla.expm(-1j * t * H) @ psi
    psi = psi.reshape(2**ell, 2 ** (L - ell))
    rho = psi @ psi.conj().T
    p = np.clip(np.linalg.eigvalsh(rho), 0.0, None)
    if alpha == 1:
        p = p[p > 0]
        return float(-np.sum(p * np.log(p)))
    return float(np.log(np.sum(p**alpha)) / (1 - alpha))


@dataclass(frozen=True)
class QuenchComparison:
    """Oracle entropies against the quasiparticle profile on a time grid."""

    times: np.ndarray
    exact: np.ndarray
    profile: np.ndarray
    slope: float
    slope_reference: float
    plateau: float
    plateau_reference: float

    @property
    def relative_gap(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            gap = np.abs(self.profile - self.exact) / np.abs(self.exact)
        return np.where(self.exact == 0, np.where(self.profile == 0, 0.0, np.inf), gap)

    @property
    def slope_error(self) -> float:
        return _rel(self.slope, self.slope_reference)

    @property
    def plateau_error(self) -> float:
        return _rel(self.plateau, self.plateau_reference)


def _rel(a: float, b: float) -> float:
    if b == 0:
        return 0.0 if a == 0 else float("inf")
    return abs(a - b) / abs(b)


def quench_comparison(spec: QuenchSpec, L: int, ell: int, alpha: float, times=None,
                      t_min: float = 4.0, allow_branch_risk: bool = False) -> QuenchComparison:
    """Exact S_alpha(t) against the quasiparticle profile.

    The early slope is a linear fit of the exact entropy over
    t in [t_min, 0.9 ell / (2 v_max)], where every mode is still in its
    linear regime, and is compared with 2 * renyi_rate_time. The plateau is
    the exact entropy at the last time, compared with ell * renyi_rate_space.
    The default time grid runs in steps of 2 up to the revival bound.
    """
    from .entropy import renyi_profile, renyi_rate_space, renyi_rate_time
    from .state import gge_from_quench

    state = gge_from_quench(spec, allow_branch_risk)
    vmax = spec.dispersion.max_velocity()
    if times is None:
        times = np.arange(0.0, L / (4 * vmax) + 1e-9, 2.0)
    times = np.unique(np.asarray(times, dtype=float))
    exact = quench_entropy_scan(spec, L, ell, alpha, times)
    profile = np.array([renyi_profile(state, alpha, ell, t) if t > 0 else 0.0 for t in times])
    early = (times >= t_min) & (times <= 0.9 * ell / (2 * vmax))
    slope = float(np.polyfit(times[early], exact[early], 1)[0]) if early.sum() >= 2 else float("nan")
    return QuenchComparison(times, exact, profile, slope, 2 * renyi_rate_time(state, alpha),
                            float(exact[-1]), ell * renyi_rate_space(state, alpha))
