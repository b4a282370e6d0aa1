"""
Single-particle dispersion relations.

Three families are supported:

``lattice-cosine``
    E(k) = -J cos k on the Brillouin zone [-pi, pi), v(k) = J sin k.
``continuum-quadratic``
    E(theta) = theta^2 / (2 m) on the real line, v = theta / m. Integrals
    run over a finite window [-Theta, Theta] supplied by the state.
``tabulated``
    Cubic spline through user samples (theta_i, E_i). The table must be
    symmetric under theta -> -theta; it is then symmetrised exactly so that
    E is even and v = E' is odd to round-off.

Crossings of |v| with a level are located by a sign scan followed by
bracketed root finding, which is what the BFT integrals need to split
their domains at the kinks of |v cos(gamma) - sin(gamma)| and of
min(x, 2 t |v|).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

FAMILIES = ("lattice-cosine", "continuum-quadratic", "tabulated")
SCAN_POINTS = 4096
ROOT_XTOL = 1e-12


@dataclass(frozen=True)
class Dispersion:
    """Even dispersion E(theta) with odd velocity v = dE/dtheta.

    Use the ``lattice_cosine``, ``continuum_quadratic`` and ``tabulated``
    constructors rather than instantiating directly.
    """

    family: str
    params: dict = field(default_factory=dict)
    _spline: Optional[CubicSpline] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown dispersion family {self.family!r}")

    # construction -----------------------------------------------------
    @classmethod
    def lattice_cosine(cls, hopping: float = 1.0) -> "Dispersion":
        if hopping <= 0:
            raise ValueError("hopping must be positive")
        return cls("lattice-cosine", {"J": float(hopping)})

    @classmethod
    def continuum_quadratic(cls, mass: float = 1.0) -> "Dispersion":
        if mass <= 0:
            raise ValueError("mass must be positive")
        return cls("continuum-quadratic", {"m": float(mass)})

    @classmethod
    def tabulated(cls, theta, energy, periodic: bool = False,
                  symmetry_tol: float = 1e-10) -> "Dispersion":
        """Spline dispersion from samples on a grid symmetric about zero.

        With ``periodic=True`` the grid must span [-pi, pi] and the spline
        uses periodic boundary conditions.
        """
        theta = np.asarray(theta, dtype=float)
        energy = np.asarray(energy, dtype=float)
        if theta.ndim != 1 or theta.shape != energy.shape or theta.size < 5:
            raise ValueError("tabulated dispersion needs matching 1-D arrays of length >= 5")
        order = np.argsort(theta)
        theta, energy = theta[order], energy[order]
        if np.any(np.diff(theta) <= 0):
            raise ValueError("tabulated grid must be strictly increasing")
        if not np.allclose(theta, -theta[::-1], atol=symmetry_tol, rtol=0):
            raise ValueError("tabulated grid must be symmetric about theta = 0")
        scale = max(1.0, float(np.max(np.abs(energy))))
        if np.max(np.abs(energy - energy[::-1])) > symmetry_tol * scale:
            raise ValueError("tabulated dispersion is not even in theta")
        theta = 0.5 * (theta - theta[::-1])
        energy = 0.5 * (energy + energy[::-1])
        if periodic:
            if not np.isclose(theta[-1], np.pi, atol=1e-12):
                raise ValueError("periodic tabulated dispersion must span [-pi, pi]")
            spline = CubicSpline(theta, energy, bc_type="periodic")
        else:
            spline = CubicSpline(theta, energy, bc_type="not-a-knot")
        params = {"periodic": bool(periodic), "theta_max": float(theta[-1]), "n": int(theta.size)}
        return cls("tabulated", params, spline)

    @classmethod
    def from_csv(cls, path, periodic: bool = False) -> "Dispersion":
        data = np.loadtxt(Path(path), delimiter=",", comments="#", ndmin=2)
        if data.shape[1] < 2:
            raise ValueError("dispersion CSV needs two columns (theta, E)")
        return cls.tabulated(data[:, 0], data[:, 1], periodic=periodic)

    # evaluation -------------------------------------------------------
    @property
    def compact(self) -> bool:
        """True when the rapidity domain is a bounded Brillouin zone."""
        return self.family == "lattice-cosine" or (
            self.family == "tabulated" and self.params["periodic"])

    @property
    def domain(self) -> Optional[tuple[float, float]]:
        """Natural finite domain, or None for the real line."""
        if self.compact:
            return (-np.pi, np.pi)
        if self.family == "tabulated":
            t = self.params["theta_max"]
            return (-t, t)
        return None

    def energy(self, theta):
        theta = np.asarray(theta, dtype=float)
        if self.family == "lattice-cosine":
            return -self.params["J"] * np.cos(theta)
        if self.family == "continuum-quadratic":
            return theta**2 / (2.0 * self.params["m"])
        return self._spline(self._fold(theta))

    def velocity(self, theta):
        """Group velocity v = dE/dtheta."""
        theta = np.asarray(theta, dtype=float)
        if self.family == "lattice-cosine":
            return self.params["J"] * np.sin(theta)
        if self.family == "continuum-quadratic":
            return theta / self.params["m"]
        return self._spline(self._fold(theta), 1)

    def curvature(self, theta):
        theta = np.asarray(theta, dtype=float)
        if self.family == "lattice-cosine":
            return self.params["J"] * np.cos(theta)
        if self.family == "continuum-quadratic":
            return np.full_like(theta, 1.0 / self.params["m"])
        return self._spline(self._fold(theta), 2)

    def _fold(self, theta):
        if self.compact:
            return np.mod(theta + np.pi, 2 * np.pi) - np.pi
        t = self.params["theta_max"]
        if np.any(np.abs(theta) > t * (1 + 1e-12)):
            raise ValueError("rapidity outside the tabulated range")
        return theta

    def resolve_domain(self, cutoff: Optional[float] = None) -> tuple[float, float]:
        """Finite integration domain, using ``cutoff`` on the real line."""
        dom = self.domain
        if dom is not None:
            if cutoff is not None and not self.compact:
                return (max(dom[0], -cutoff), min(dom[1], cutoff))
            return dom
        if cutoff is None or not np.isfinite(cutoff) or cutoff <= 0:
            raise ValueError("continuum dispersions need a finite positive cutoff")
        return (-float(cutoff), float(cutoff))

    def max_velocity(self, cutoff: Optional[float] = None) -> float:
        lo, hi = self.resolve_domain(cutoff)
        if self.family == "lattice-cosine":
            return self.params["J"]
        if self.family == "continuum-quadratic":
            return hi / self.params["m"]
        grid = np.linspace(lo, hi, SCAN_POINTS + 1)
        return float(np.max(np.abs(self.velocity(grid))))

    # analysis ---------------------------------------------------------
    def velocity_crossings(self, level: float, cutoff: Optional[float] = None) -> np.ndarray:
        """Sorted rapidities in the domain where |v(theta)| = level.

        The analytic families use closed forms. Tabulated dispersions use a
        4096-point sign scan, and Brent's method refines each bracket to
        1e-12. Tangential touchings (such as |v| = v_max on the lattice)
        carry no sign change and are not reported.
        """
        lo, hi = self.resolve_domain(cutoff)
        if level < 0:
            raise ValueError("crossing level must be non-negative")
        if self.family == "lattice-cosine":
            J = self.params["J"]
            if level == 0 or level >= J:
                return np.empty(0)
            a = np.arcsin(level / J)
            return np.array([-np.pi + a, -a, a, np.pi - a])
        if self.family == "continuum-quadratic":
            r = level * self.params["m"]
            return np.array([-r, r]) if 0 < r < hi else np.empty(0)
        return self._scan_roots(lambda t: np.abs(self.velocity(t)) - level, lo, hi)

    def stationary_points(self, cutoff: Optional[float] = None) -> np.ndarray:
        """Zeros of v in the domain, where the time-direction weight |v| kinks."""
        if self.family == "lattice-cosine":
            return np.array([-np.pi, 0.0])
        if self.family == "continuum-quadratic":
            return np.array([0.0])
        lo, hi = self.resolve_domain(cutoff)
        roots = self._scan_roots(self.velocity, lo, hi)
        if self.compact:
            roots = np.unique(np.concatenate([roots, [-np.pi]]))
        return roots

    def kinks(self, level: float, cutoff: Optional[float] = None) -> np.ndarray:
        """Breakpoints where v(theta) = level, for a signed level.

        Superset of the kinks of |v - level|, combining crossings of |v|
        with |level| and, at level zero, the stationary points.
        """
        if level == 0:
            return self.stationary_points(cutoff)
        return self.velocity_crossings(abs(level), cutoff)

    @staticmethod
    def _scan_roots(fun, lo, hi) -> np.ndarray:
        grid = np.linspace(lo, hi, SCAN_POINTS + 1)
        vals = fun(grid)
        roots = list(grid[vals == 0.0])
        s = np.sign(vals)
        idx = np.nonzero(s[:-1] * s[1:] < 0)[0]
        for i in idx:
            roots.append(brentq(fun, grid[i], grid[i + 1], xtol=ROOT_XTOL))
        return np.unique(np.array(roots, dtype=float))
