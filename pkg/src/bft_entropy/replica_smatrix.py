"""
Two-particle S-matrix of alpha independent copies of an integrable model.

For a single-copy diagonal scattering amplitude S(theta, theta') the
alpha-copy amplitude on |theta, i; theta', i'> is

    D_{ii'} = delta_{ii'} S + sigma (1 - delta_{ii'}),

where sigma = +1 (-1) when fields on different copies commute
(anticommute). The matrix acts on the alpha^2 ordered copy pairs.

In the replica Fourier basis a_p = alpha^{-1/2} sum_i e^{i pi p i/alpha} a_i,
with anti-periodic labels p in {-alpha+1, -alpha+3, ..., alpha-1}, it reads

    M_{(p,p'),(k,k')} = sigma delta_{pk} delta_{p'k'}
                        + ((S - sigma) / alpha) delta_{mod 2 alpha}(p + p' - k - k'),

which is diagonal exactly when S = sigma. Free fermions in the
anticommuting basis (S = sigma = -1) are therefore diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .entropy import sector_momenta

Amplitude = Union[complex, float, Callable[[float, float], complex]]
CLOSED_FORM_TOL = 1e-12


class ReplicaConsistencyError(RuntimeError):
    """Fourier-basis matrix disagrees with its closed form."""


def _amplitude(S: Amplitude, theta: float, theta_p: float) -> complex:
    return complex(S(theta, theta_p) if callable(S) else S)


def _check(alpha: int, sigma: int) -> int:
    if int(alpha) != alpha or alpha < 2:
        raise ValueError("alpha must be an integer >= 2")
    if sigma not in (1, -1):
        raise ValueError("sigma must be +1 or -1")
    return int(alpha)


def replica_fourier_matrix(alpha: int) -> np.ndarray:
    """Unitary U_{p,i} = e^{i pi p i / alpha} / sqrt(alpha), rows p in I_alpha, i = 1..alpha."""
    p = sector_momenta(alpha)
    i = np.arange(1, alpha + 1)
    return np.exp(1j * np.pi * np.outer(p, i) / alpha) / np.sqrt(alpha)


def build_copy_basis(alpha: int, S: Amplitude, sigma: int, theta: float = 0.0,
                     theta_p: float = 0.0) -> np.ndarray:
    """alpha^2 x alpha^2 matrix in the copy basis, pair (i, i') at row i * alpha + i'."""
    alpha = _check(alpha, sigma)
    s = _amplitude(S, theta, theta_p)
    diag = np.where(np.eye(alpha, dtype=bool), s, complex(sigma)).ravel()
    return np.diag(diag)


def fourier_closed_form(alpha: int, S: complex, sigma: int) -> np.ndarray:
    alpha = _check(alpha, sigma)
    p = sector_momenta(alpha)
    tot = (p[:, None] + p[None, :]).ravel()
    band = np.mod(tot[:, None] - tot[None, :], 2 * alpha) == 0
    return sigma * np.eye(alpha**2) + (complex(S) - sigma) / alpha * band


def to_fourier(mat: np.ndarray, alpha: int, inverse: bool = False) -> np.ndarray:
    """Conjugate a pair-space matrix by U x U (or its inverse)."""
    U = replica_fourier_matrix(alpha)
    W = np.kron(U, U)
    if inverse:
        W = W.conj().T
    return W @ mat @ W.conj().T


def fourier_transform_smatrix(mat: np.ndarray, alpha: int, S: complex | None = None,
                              sigma: int | None = None, tol: float = CLOSED_FORM_TOL) -> np.ndarray:
    """Copy-basis matrix in the replica Fourier basis.

    When ``S`` and ``sigma`` are given the result is checked entrywise
    against the closed form and ReplicaConsistencyError is raised on a
    mismatch beyond ``tol``.
    """
    out = to_fourier(mat, alpha)
    if S is not None and sigma is not None:
        ref = fourier_closed_form(alpha, S, sigma)
        err = float(np.max(np.abs(out - ref)))
        if err > tol:
            raise ReplicaConsistencyError(f"Fourier S-matrix deviates from closed form by {err:.3g}")
    return out


def is_diagonal(mat: np.ndarray, tol: float = 1e-12) -> bool:
    return bool(np.max(np.abs(mat - np.diag(np.diag(mat))), initial=0.0) <= tol)


def unitarity_residual(mat: np.ndarray) -> float:
    return float(np.max(np.abs(mat @ mat.conj().T - np.eye(mat.shape[0]))))


@dataclass(frozen=True)
class ReplicaSMatrix:
    """alpha-copy S-matrix with base amplitude S(theta, theta') and copy sign sigma."""

    alpha: int
    S: Amplitude
    sigma: int
    basis: str = "fourier"

    def __post_init__(self):
        _check(self.alpha, self.sigma)
        if self.basis not in ("copy", "fourier"):
            raise ValueError("basis must be 'copy' or 'fourier'")

    def unitarity_samples(self, thetas) -> float:
        """max |(|S| - 1)| over sampled pairs."""
        thetas = np.asarray(thetas, dtype=float)
        return max(abs(abs(_amplitude(self.S, a, b)) - 1.0) for a in thetas for b in thetas)

    def matrix(self, theta: float, theta_p: float) -> np.ndarray:
        mat = build_copy_basis(self.alpha, self.S, self.sigma, theta, theta_p)
        if self.basis == "fourier":
            s = _amplitude(self.S, theta, theta_p)
            mat = fourier_transform_smatrix(mat, self.alpha, s, self.sigma)
        return mat


def _embed(mat: np.ndarray, alpha: int, a: int, b: int) -> np.ndarray:
    """Act with a pair-space matrix on tensor factors (a, b) of V^{x3}."""
    eye = np.eye(alpha)
    if (a, b) == (0, 1):
        return np.kron(mat, eye)
    if (a, b) == (1, 2):
        return np.kron(eye, mat)
    if (a, b) == (0, 2):
        swap23 = np.kron(eye, np.eye(alpha**2)[[(j % alpha) * alpha + j // alpha for j in range(alpha**2)]])
        return swap23 @ np.kron(mat, eye) @ swap23
    raise ValueError("factors must be (0,1), (0,2) or (1,2)")


def yang_baxter_residual(alpha: int, S: Amplitude, sigma: int, thetas, basis: str = "fourier") -> float:
    """max |S12 S13 S23 - S23 S13 S12| with S_ab = S^{(alpha)}(theta_a, theta_b)."""
    t1, t2, t3 = (float(t) for t in thetas)
    if len({t1, t2, t3}) < 3:
        raise ValueError("need three distinct rapidities")
    R = ReplicaSMatrix(alpha, S, sigma, basis)
    S12 = _embed(R.matrix(t1, t2), alpha, 0, 1)
    S13 = _embed(R.matrix(t1, t3), alpha, 0, 2)
    S23 = _embed(R.matrix(t2, t3), alpha, 1, 2)
    return float(np.max(np.abs(S12 @ S13 @ S23 - S23 @ S13 @ S12)))
