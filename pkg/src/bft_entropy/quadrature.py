"""
Composite Gauss-Legendre quadrature used by every integral in the package.

Integrands here are smooth on each sub-interval between user-supplied
breakpoints (velocity crossings, window edges) but may carry kinks at
those points. The adaptive driver bisects panels until the estimated
error of each panel falls below its share of the global tolerance.

Error estimate
--------------
For a panel [a, b] the n-point rule Q_n[a, b] is compared with the sum of
the same rule on both halves. The difference is a conservative estimate
for the half-panel result, which is the one kept. The target never
drops below 1e-14 of int |f|, so integrals that cancel to round-off
terminate without an absolute tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

DEFAULT_ORDER = 32
DEFAULT_RTOL = 1e-10
DEFAULT_MAX_PANELS = 2**14
ROUNDOFF = 1e-14


class QuadratureError(RuntimeError):
    """Raised when the adaptive driver exhausts its panel budget."""

    def __init__(self, message: str, estimate: complex, error: float):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


@dataclass(frozen=True)
class QuadResult:
    value: complex
    error: float
    n_panels: int


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def composite_nodes(edges: np.ndarray, order: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Flattened nodes and weights of a fixed composite rule on ``edges``."""
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_legendre(order)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def oscillatory_edges(a: float, b: float, phase_rate: float,
                      phase_per_panel: float = 2.0, min_panels: int = 4) -> np.ndarray:
    """Uniform panel edges with a panel count proportional to the total phase.

    ``phase_rate`` bounds the derivative of the integrand phase on [a, b].
    """
    n = int(np.ceil(abs(b - a) * abs(phase_rate) / phase_per_panel))
    return np.linspace(a, b, max(n, min_panels) + 1)


def _panel_sums(fun, lo, hi, x, w):
    mid = 0.5 * (hi + lo)
    half = 0.5 * (hi - lo)
    nodes = mid[:, None] + half[:, None] * x[None, :]
    vals = np.asarray(fun(nodes.ravel())).reshape(nodes.shape)
    return (vals * w[None, :]).sum(axis=1) * half, (np.abs(vals) * w[None, :]).sum(axis=1) * half


def integrate(fun: Callable[[np.ndarray], np.ndarray], a: float, b: float,
              breakpoints: Sequence[float] = (), rtol: float = DEFAULT_RTOL,
              atol: float = 0.0, order: int = DEFAULT_ORDER,
              max_panels: int = DEFAULT_MAX_PANELS, initial_panels: int = 1,
              ) -> QuadResult:
    """Adaptive composite Gauss-Legendre integral of a vectorised function.

    Parameters
    ----------
    fun : callable
        Maps a 1-D float array of abscissae to real or complex values.
    a, b : float
        Finite integration limits with a < b.
    breakpoints : sequence of float
        Interior points where the integrand may be non-smooth. Points
        outside (a, b) are ignored.
    rtol, atol : float
        Target accuracy ``max(atol, rtol * |I|)`` on the total.
    order : int
        Points per panel.
    max_panels : int
        Budget on the number of accepted plus pending panels.
    initial_panels : int
        Uniform pre-split of every breakpoint interval, used for
        oscillatory integrands.

    Returns
    -------
    QuadResult

    Raises
    ------
    QuadratureError
        If the budget is exhausted before convergence.
    """
    if not (np.isfinite(a) and np.isfinite(b)) or b <= a:
        raise ValueError(f"invalid integration interval [{a}, {b}]")
    pts = sorted({float(p) for p in breakpoints if a < p < b})
    edges = np.array([a, *pts, b])
    if initial_panels > 1:
        edges = np.unique(np.concatenate(
            [np.linspace(lo, hi, initial_panels + 1) for lo, hi in zip(edges[:-1], edges[1:])]))
    lo, hi = edges[:-1], edges[1:]
    x, w = gauss_legendre(order)
    width = b - a

    whole, _ = _panel_sums(fun, lo, hi, x, w)
    accepted = 0.0 + 0.0j
    accepted_err = 0.0
    accepted_abs = 0.0
    n_accepted = 0
    while True:
        m = 0.5 * (lo + hi)
        left, left_abs = _panel_sums(fun, lo, m, x, w)
        right, right_abs = _panel_sums(fun, m, hi, x, w)
        refined = left + right
        err = np.abs(refined - whole)
        total = accepted + refined.sum()
        # errors at the round-off level of int |f| cannot be reduced by bisection
        mass = accepted_abs + float(np.sum(left_abs + right_abs))
        tol = max(atol, rtol * abs(total), ROUNDOFF * mass)
        share = tol * (hi - lo) / width
        ok = err <= np.maximum(share, ROUNDOFF * (left_abs + right_abs))
        # panels shrunk to round-off width cannot improve further
        ok |= (hi - lo) <= 64 * np.finfo(float).eps * max(abs(a), abs(b), 1.0)
        accepted += refined[ok].sum()
        accepted_abs += float(np.sum((left_abs + right_abs)[ok]))
        accepted_err += float(err[ok].sum())
        n_accepted += int(ok.sum())
        if ok.all():
            return QuadResult(complex(accepted), accepted_err, n_accepted)
        if accepted_err + float(err[~ok].sum()) <= tol:
            # the global error budget holds even though single panels missed their share
            accepted += refined[~ok].sum()
            return QuadResult(complex(accepted), accepted_err + float(err[~ok].sum()),
                              n_accepted + int((~ok).sum()))
        keep = ~ok
        pending = 2 * int(keep.sum())
        if n_accepted + pending > max_panels:
            estimate = accepted + refined[keep].sum()
            error = accepted_err + float(err[keep].sum())
            raise QuadratureError(
                f"quadrature did not converge within {max_panels} panels "
                f"(estimate {estimate:.6g}, error {error:.3g})", complex(estimate), error)
        lo, m, hi = lo[keep], m[keep], hi[keep]
        whole = np.concatenate([left[keep], right[keep]])
        lo, hi = np.concatenate([lo, m]), np.concatenate([m, hi])


def integrate_real(fun, a, b, **kwargs) -> float:
    """Convenience wrapper returning the real part only."""
    return integrate(fun, a, b, **kwargs).value.real
