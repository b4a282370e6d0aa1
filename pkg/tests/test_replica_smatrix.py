import numpy as np
import pytest
from hypothesis import given, strategies as st

from bft_entropy import replica_smatrix as rs


def sinh_gordon(a=0.7):
    s = np.sin(a)
    return lambda t1, t2: (np.sinh(t1 - t2) - 1j * s) / (np.sinh(t1 - t2) + 1j * s)


def test_copy_basis_alpha2():
    assert np.allclose(np.diag(rs.build_copy_basis(2, 0.3j, 1)), [0.3j, 1, 1, 0.3j])
    assert np.allclose(rs.build_copy_basis(2, -1, -1), -np.eye(4))
    assert rs.build_copy_basis(3, -1, 1).shape == (9, 9)


def test_fourier_matrix_unitary():
    for a in (2, 3, 5):
        U = rs.replica_fourier_matrix(a)
        assert np.allclose(U @ U.conj().T, np.eye(a))


def test_free_fermions_diagonal_in_anticommuting_basis():
    mat = rs.fourier_transform_smatrix(rs.build_copy_basis(2, -1, -1), 2, -1, -1)
    assert rs.is_diagonal(mat)
    assert np.allclose(np.diag(mat), -1)


def test_commuting_free_fermions_mix_sectors():
    mat = rs.fourier_transform_smatrix(rs.build_copy_basis(2, -1, 1), 2, -1, 1)
    assert not rs.is_diagonal(mat)
    # all weight sits on pairs with p + p' = k + k' mod 4
    assert np.allclose(np.abs(mat), np.fliplr(np.eye(4)))


def test_closed_form_identity_case():
    assert np.allclose(rs.fourier_closed_form(3, 1.0, 1), np.eye(9))


def test_closed_form_mismatch_raises():
    with pytest.raises(rs.ReplicaConsistencyError):
        rs.fourier_transform_smatrix(rs.build_copy_basis(2, -1, 1), 2, -1, -1)


def test_invalid_arguments():
    with pytest.raises(ValueError):
        rs.build_copy_basis(1, -1, 1)
    with pytest.raises(ValueError):
        rs.build_copy_basis(2, -1, 0)
    with pytest.raises(ValueError):
        rs.ReplicaSMatrix(2, -1, 1, basis="momentum")
    with pytest.raises(ValueError):
        rs.yang_baxter_residual(2, -1, 1, (0.1, 0.1, 0.3))


@given(st.sampled_from([2, 3, 4]), st.sampled_from([1, -1]), st.floats(-np.pi, np.pi), st.floats(-2, 2), st.floats(-2, 2))
def test_diagonal_iff_amplitude_equals_sign(alpha, sigma, phi, t1, t2):
    S = np.exp(1j * phi)
    mat = rs.ReplicaSMatrix(alpha, S, sigma).matrix(t1, t2)
    assert rs.is_diagonal(mat, 1e-12) == (abs(S - sigma) < 1e-12)
    assert rs.unitarity_residual(mat) < 1e-12


@given(st.sampled_from([2, 3]), st.sampled_from([1, -1]), st.floats(-2, 2), st.floats(-2, 2))
def test_involution(alpha, sigma, t1, t2):
    R = rs.ReplicaSMatrix(alpha, sinh_gordon(), sigma)
    back = rs.to_fourier(R.matrix(t1, t2), alpha, inverse=True)
    assert np.allclose(back, rs.build_copy_basis(alpha, sinh_gordon(), sigma, t1, t2), atol=1e-12)


@pytest.mark.parametrize("S", [-1.0, np.exp(0.3j), sinh_gordon()], ids=["free", "phase", "sinh-gordon"])
@pytest.mark.parametrize("sigma", [1, -1])
@pytest.mark.parametrize("alpha", [2, 3])
def test_yang_baxter(S, sigma, alpha, rng):
    for _ in range(5):
        th = rng.uniform(-2, 2, 3)
        for basis in ("copy", "fourier"):
            assert rs.yang_baxter_residual(alpha, S, sigma, th, basis) < 1e-12


def test_unitarity_samples():
    R = rs.ReplicaSMatrix(2, sinh_gordon(), 1)
    assert R.unitarity_samples(np.linspace(-1, 1, 5)) < 1e-14


def test_embedding_detects_non_solution():
    # a generic non-commuting pair matrix must violate the triple relation
    rng = np.random.default_rng(0)
    M = rng.normal(size=(4, 4))
    A = rs._embed(M, 2, 0, 1) @ rs._embed(M, 2, 0, 2) @ rs._embed(M, 2, 1, 2)
    B = rs._embed(M, 2, 1, 2) @ rs._embed(M, 2, 0, 2) @ rs._embed(M, 2, 0, 1)
    assert np.max(np.abs(A - B)) > 1e-3
    P = rs._embed(np.kron(np.eye(2), np.diag([1.0, 2.0])), 2, 0, 2)
    assert np.allclose(np.diag(P), [1, 2, 1, 2, 1, 2, 1, 2])
