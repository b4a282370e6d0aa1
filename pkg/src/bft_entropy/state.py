"""
Generalised Gibbs ensembles and pair-producing quench data.

A GGE of free fermions is fixed by its pseudo-energy w(theta) or,
equivalently, its occupation n = 1 / (1 + e^w). The weight w is the
stored primary field, with ``occupation`` derived from it.

A quench is fixed by the Bogoliubov pair (f, g) relating pre-quench
modes to post-quench modes. Consistency requires

    |f|^2 + |g|^2 = 1,    f(t) g(-t) + f(-t) g(t) = 0,    g(0) = 0,

and the stationary state is the GGE with n = |g|^2 and e^{-w} = |K|^2,
K = -g / f. The fermionic annihilators of the initial state are
a_k = f_k b_k - g_k b^dag_{-k}, so that <b_k b_{-k}> = -g_k f_k^*.

The validated regime of the sector sums is n <= 1/2 (w >= 0), where each
principal-branch logarithm stays within its first sheet. States outside
it are rejected unless the caller opts in explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import expit

from .dispersion import Dispersion

WEIGHT_CAP = 700.0
OCCUPATION_CUTOFF = 1e-14
AMPLITUDE_CUTOFF = 1e-16
QUENCH_TOL = 1e-10


class BranchRiskError(ValueError):
    """State leaves n <= 1/2, where the sector logarithms may change sheet."""


class QuenchValidationError(ValueError):
    """Bogoliubov data violate one of the consistency conditions."""


def occupation_from_weight(w):
    """n = 1 / (1 + e^w), overflow-safe."""
    return expit(-np.asarray(w, dtype=float))


def weight_from_occupation(n):
    """w = log((1 - n) / n) clipped to +-700, so n = 0 and n = 1 are allowed."""
    n = np.asarray(n, dtype=float)
    if np.any((n < 0) | (n > 1)):
        raise ValueError("occupations must lie in [0, 1]")
    with np.errstate(divide="ignore"):
        w = np.log1p(-n) - np.log(n)
    return np.clip(w, -WEIGHT_CAP, WEIGHT_CAP)


def find_cutoff(profile: Callable, threshold: float, start: float = 1.0,
                limit: float = 1e4, points: int = 4097) -> float:
    """Smallest Theta on a grid with profile(|theta|) < threshold beyond it.

    ``profile`` must be even and decay at large rapidity.
    """
    top = start
    while True:
        beyond = np.linspace(top, 2 * top, 257)
        if np.max(profile(beyond)) < threshold and np.max(profile(-beyond)) < threshold:
            break
        top *= 2
        if top > limit:
            raise ValueError("occupation does not decay; cannot truncate the continuum")
    grid = np.linspace(0.0, top, points)
    vals = np.maximum(profile(grid), profile(-grid))
    above = np.nonzero(vals >= threshold)[0]
    if above.size == 0:
        return float(grid[1])
    return float(grid[min(above[-1] + 1, points - 1)])


@dataclass(frozen=True)
class GGEState:
    """Free-fermion GGE on a given dispersion.

    Attributes
    ----------
    dispersion : Dispersion
    weight : callable
        Vectorised pseudo-energy w(theta).
    label : str
    cutoff : float or None
        Truncation Theta of continuum domains, where n < 1e-14.
    occupation_fn : callable or None
        Exact occupation, used instead of the round trip through w when
        available (quench states with n = 0 at isolated points).
    """

    dispersion: Dispersion
    weight: Callable = field(repr=False)
    label: str = "gge"
    cutoff: Optional[float] = None
    occupation_fn: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        if self.dispersion.domain is None and self.cutoff is None:
            object.__setattr__(self, "cutoff", find_cutoff(self.n, OCCUPATION_CUTOFF))

    def w(self, theta):
        theta = np.asarray(theta, dtype=float)
        return np.clip(np.broadcast_to(self.weight(theta), theta.shape).astype(float),
                       -WEIGHT_CAP, WEIGHT_CAP)

    def n(self, theta):
        theta = np.asarray(theta, dtype=float)
        if self.occupation_fn is not None:
            return np.broadcast_to(self.occupation_fn(theta), theta.shape).astype(float)
        return occupation_from_weight(self.w(theta))

    def domain(self) -> tuple[float, float]:
        return self.dispersion.resolve_domain(self.cutoff)

    def max_velocity(self) -> float:
        return self.dispersion.max_velocity(self.cutoff)

    def grid(self, points: int = 4097) -> np.ndarray:
        lo, hi = self.domain()
        return np.linspace(lo, hi, points)

    def in_validated_regime(self, points: int = 4097) -> bool:
        return bool(np.all(self.n(self.grid(points)) <= 0.5 + 1e-15))

    def validate(self, allow_branch_risk: bool = False) -> "GGEState":
        """Raise BranchRiskError when n > 1/2 somewhere, unless opted in."""
        n = self.n(self.grid())
        if np.any(~np.isfinite(n)):
            raise ValueError("occupation is not finite on the domain")
        if not allow_branch_risk and np.any(n > 0.5 + 1e-15):
            raise BranchRiskError(
                f"state {self.label!r} has max n = {n.max():.6g} > 1/2; "
                "pass allow_branch_risk to evaluate outside the validated regime")
        return self

    # constructors -----------------------------------------------------
    @classmethod
    def constant(cls, dispersion: Dispersion, w: float, cutoff: Optional[float] = None):
        """Rapidity-independent weight. Continuum domains need an explicit cutoff."""
        w = float(w)
        if dispersion.domain is None and cutoff is None:
            raise ValueError("a constant weight on the continuum needs an explicit cutoff")
        return cls(dispersion, lambda t: np.full(np.shape(t), w), f"constant(w={w:g})", cutoff)

    @classmethod
    def thermal(cls, dispersion: Dispersion, beta: float, mu: float = 0.0,
                cutoff: Optional[float] = None):
        """w = beta (E - mu)."""
        if beta <= 0:
            raise ValueError("beta must be positive")
        return cls(dispersion, lambda t: beta * (dispersion.energy(t) - mu),
                   f"thermal(beta={beta:g},mu={mu:g})", cutoff)

    @classmethod
    def from_occupation(cls, dispersion: Dispersion, n: Callable, label: str = "gge",
                        cutoff: Optional[float] = None):
        return cls(dispersion, lambda t: weight_from_occupation(n(t)), label, cutoff,
                   occupation_fn=lambda t: np.asarray(n(t), dtype=float))

    @classmethod
    def from_table(cls, dispersion: Dispersion, theta, n, label: str = "tabulated"):
        """Occupation tabulated on a grid, interpolated by a cubic spline in w."""
        theta = np.asarray(theta, dtype=float)
        w = weight_from_occupation(np.asarray(n, dtype=float))
        bc = "periodic" if dispersion.compact and np.isclose(theta[-1] - theta[0], 2 * np.pi) else "not-a-knot"
        spline = CubicSpline(theta, w, bc_type=bc)
        cutoff = None if dispersion.domain is not None else float(min(-theta[0], theta[-1]))
        return cls(dispersion, spline, label, cutoff)


@dataclass(frozen=True)
class QuenchReport:
    norm_residual: float
    pairing_residual: float
    g_at_zero: float
    threshold: float = QUENCH_TOL

    @property
    def ok(self) -> bool:
        return max(self.norm_residual, self.pairing_residual, self.g_at_zero) <= self.threshold


@dataclass(frozen=True)
class QuenchSpec:
    """Bogoliubov pair (f, g) of a pair-producing quench.

    Attributes
    ----------
    dispersion : Dispersion
        Post-quench dispersion.
    f, g : callable
        Vectorised complex amplitudes.
    label : str
    support : float or None
        On the continuum, |g f| < 1e-16 beyond this rapidity.
    """

    dispersion: Dispersion
    f: Callable = field(repr=False)
    g: Callable = field(repr=False)
    label: str = "quench"
    support: Optional[float] = None

    def __post_init__(self):
        if self.dispersion.domain is None and self.support is None:
            amp = lambda t: np.abs(self.f(t) * self.g(t))
            object.__setattr__(self, "support", find_cutoff(amp, AMPLITUDE_CUTOFF))

    def occupation(self, theta):
        return np.abs(self.g(np.asarray(theta, dtype=float))) ** 2

    def pair_ratio(self, theta):
        """K = -g / f."""
        theta = np.asarray(theta, dtype=float)
        return -self.g(theta) / self.f(theta)

    def domain(self) -> tuple[float, float]:
        return self.dispersion.resolve_domain(self.support)

    @classmethod
    def gamma_quench(cls, gamma: float, hopping: float = 1.0) -> "QuenchSpec":
        """Lattice reference quench f = 1/sqrt(1 + c^2 sin^2 k), g = i c sin k f."""
        disp = Dispersion.lattice_cosine(hopping)
        c = float(gamma)
        f = lambda k: (1.0 / np.sqrt(1 + c**2 * np.sin(k) ** 2)).astype(complex)
        g = lambda k: 1j * c * np.sin(k) / np.sqrt(1 + c**2 * np.sin(k) ** 2)
        return cls(disp, f, g, f"gamma-quench(gamma={c:g})")

    @classmethod
    def gaussian_quench(cls, gamma: float, mass: float = 1.0) -> "QuenchSpec":
        """Continuum quench with s = c theta exp(-theta^2/2), f = 1/sqrt(1+s^2), g = i s f."""
        disp = Dispersion.continuum_quadratic(mass)
        c = float(gamma)
        s = lambda t: c * t * np.exp(-0.5 * t**2)
        f = lambda t: (1.0 / np.sqrt(1 + s(t) ** 2)).astype(complex)
        g = lambda t: 1j * s(t) / np.sqrt(1 + s(t) ** 2)
        return cls(disp, f, g, f"gaussian-quench(gamma={c:g})")

    @classmethod
    def from_table(cls, dispersion: Dispersion, theta, f, g, label: str = "tabulated-quench"):
        """Amplitudes tabulated on a symmetric grid, splined in real and imaginary parts.

        The interpolants are rescaled pointwise to |f|^2 + |g|^2 = 1, which
        the spline only honours at the nodes. Pairing and g(0) = 0 are left
        to validation.
        """
        theta = np.asarray(theta, dtype=float)
        f = np.asarray(f, dtype=complex)
        g = np.asarray(g, dtype=complex)
        splines = [CubicSpline(theta, part) for part in (f.real, f.imag, g.real, g.imag)]
        raw_f = lambda t: splines[0](t) + 1j * splines[1](t)
        raw_g = lambda t: splines[2](t) + 1j * splines[3](t)
        norm = lambda t: np.sqrt(np.abs(raw_f(t)) ** 2 + np.abs(raw_g(t)) ** 2)
        ff = lambda t: raw_f(t) / norm(t)
        gg = lambda t: raw_g(t) / norm(t)
        support = None if dispersion.domain is not None else float(min(-theta[0], theta[-1]))
        return cls(dispersion, ff, gg, label, support)


def validate_quench(spec: QuenchSpec, points: int = 4097, threshold: float = QUENCH_TOL) -> QuenchReport:
    """Check the three Bogoliubov conditions on a uniform grid."""
    lo, hi = spec.domain()
    t = np.linspace(lo, hi, points)
    f, g = spec.f(t), spec.g(t)
    fm, gm = spec.f(-t), spec.g(-t)
    norm = float(np.max(np.abs(np.abs(f) ** 2 + np.abs(g) ** 2 - 1)))
    pair = float(np.max(np.abs(f * gm + fm * g)))
    g0 = float(np.abs(spec.g(np.array([0.0])))[0])
    return QuenchReport(norm, pair, g0, threshold)


def gge_from_quench(spec: QuenchSpec, allow_branch_risk: bool = False) -> GGEState:
    """Stationary GGE of a validated quench: n = |g|^2."""
    report = validate_quench(spec)
    if not report.ok:
        raise QuenchValidationError(
            f"quench {spec.label!r} fails validation: norm {report.norm_residual:.3g}, "
            f"pairing {report.pairing_residual:.3g}, g(0) {report.g_at_zero:.3g}")
    state = GGEState.from_occupation(spec.dispersion, spec.occupation, f"gge[{spec.label}]")
    return state.validate(allow_branch_risk)
