import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from crbeam.linalg import (
    InvalidBracket,
    RankDeficientChannel,
    compact_svd,
    hermitian_asymmetry,
    hermitian_eig,
    monotone_scalar_root,
    null_space_basis,
    positive_cubic_root,
)
from conftest import random_hermitian


class TestHermitianEig:
    def test_identity(self):
        values, vectors = hermitian_eig(np.eye(3, dtype=complex))
        assert np.allclose(values, 1.0)
        assert np.allclose(vectors.conj().T @ vectors, np.eye(3), atol=1e-12)

    def test_already_diagonal(self):
        values, vectors = hermitian_eig(np.diag([2.0, -1.0]).astype(complex))
        assert np.allclose(values, [2.0, -1.0])
        assert np.allclose(np.abs(vectors), np.eye(2), atol=1e-12)

    def test_reconstruction_random(self):
        rng = np.random.default_rng(42)
        m = random_hermitian(rng, 4)
        values, vectors = hermitian_eig(m)
        assert np.all(np.diff(values) <= 0)
        rebuilt = (vectors * values) @ vectors.conj().T
        assert np.linalg.norm(rebuilt - m) < 1e-9 * np.linalg.norm(m)

    @settings(deadline=None, max_examples=30)
    @given(dim=st.integers(1, 32), seed=st.integers(0, 2**31))
    def test_reconstruction_property(self, dim, seed):
        rng = np.random.default_rng(seed)
        m = random_hermitian(rng, dim)
        values, vectors = hermitian_eig(m)
        rebuilt = (vectors * values) @ vectors.conj().T
        assert np.linalg.norm(rebuilt - m) <= 1e-9 * max(np.linalg.norm(m), 1e-30)
        assert np.max(np.abs(vectors.conj().T @ vectors - np.eye(dim))) < 1e-10


class TestCompactSvd:
    def test_identity_columns(self):
        m = np.eye(6, dtype=complex)[:, :3]
        u, s, vh = compact_svd(m)
        assert np.allclose(s, 1.0)
        assert np.allclose(u @ np.diag(s) @ vh, m, atol=1e-12)
        # left basis spans the same columns
        assert np.linalg.norm(u @ u.conj().T @ m - m) < 1e-12

    def test_scaled_single_column(self):
        m = np.zeros((5, 1), dtype=complex)
        m[0, 0] = 2.0
        u, s, _ = compact_svd(m)
        assert abs(s[0] - 2.0) < 1e-14
        assert abs(abs(u[0, 0]) - 1.0) < 1e-14

    def test_orthonormal_columns_random(self):
        rng = np.random.default_rng(3)
        m = rng.standard_normal((8, 3)) + 1j * rng.standard_normal((8, 3))
        u, s, vh = compact_svd(m)
        assert np.max(np.abs(u.conj().T @ u - np.eye(3))) < 1e-10
        assert np.linalg.norm(u @ np.diag(s) @ vh - m) < 1e-9 * np.linalg.norm(m)

    def test_rank_deficient_raises(self):
        m = np.ones((6, 2), dtype=complex)
        with pytest.raises(RankDeficientChannel):
            compact_svd(m)


class TestNullSpaceBasis:
    def test_c2(self):
        m = np.array([[1.0], [0.0]], dtype=complex)
        basis = null_space_basis(m)
        assert basis.shape == (2, 1)
        assert abs(abs(basis[1, 0]) - 1.0) < 1e-14

    def test_identity_columns(self):
        m = np.eye(4, dtype=complex)[:, :2]
        basis = null_space_basis(m)
        assert basis.shape == (4, 2)
        span = basis @ basis.conj().T
        expect = np.zeros((4, 4))
        expect[2, 2] = expect[3, 3] = 1.0
        assert np.allclose(span, expect, atol=1e-12)

    def test_random(self):
        rng = np.random.default_rng(9)
        m = rng.standard_normal((6, 2)) + 1j * rng.standard_normal((6, 2))
        basis = null_space_basis(m)
        assert np.max(np.abs(basis.conj().T @ basis - np.eye(4))) < 1e-10
        assert np.max(np.abs(m.conj().T @ basis)) < 1e-10 * np.linalg.norm(m)


class TestPositiveCubicRoot:
    def test_pure_cube(self):
        assert abs(positive_cubic_root(0.0, 8.0) - 2.0) < 1e-12

    def test_known_root(self):
        # 27 - 2*9 - 9 = 0
        assert abs(positive_cubic_root(2.0, 9.0) - 3.0) < 1e-12

    def test_small_tau_limit(self):
        root = positive_cubic_root(5.0, 1e-9)
        assert root > 5.0
        assert abs(root - 5.0) < 1e-10

    def test_residual_many_random(self):
        rng = np.random.default_rng(7)
        sigma = rng.uniform(-10.0, 10.0, 1000)
        tau = 10.0 ** rng.uniform(-6.0, 3.0, 1000)
        x = positive_cubic_root(sigma, tau)
        residual = np.abs(x * x * (x - sigma) - tau)
        bound = 1e-12 * np.maximum(1.0, np.maximum(np.abs(sigma) ** 3, tau))
        assert np.all(residual <= bound)

    @settings(deadline=None, max_examples=200)
    @given(
        sigma=st.floats(-10.0, 10.0, allow_nan=False),
        tau=st.floats(1e-6, 1e3, allow_nan=False),
    )
    def test_residual_property(self, sigma, tau):
        x = positive_cubic_root(sigma, tau)
        assert x > 0
        bound = 1e-12 * max(1.0, abs(sigma) ** 3, tau)
        assert abs(x * x * (x - sigma) - tau) <= bound


class TestMonotoneScalarRoot:
    def test_linear(self):
        assert abs(monotone_scalar_root(lambda x: x - 1.0, 0.0, 2.0) - 1.0) < 1e-13

    def test_sqrt2(self):
        root = monotone_scalar_root(lambda x: x * x - 2.0, 1.0, 2.0)
        assert abs(root - np.sqrt(2.0)) < 1e-13

    def test_shrinkage_equation_shape(self):
        # lam * (P_T - 0)^2 - tau (Nt-K)^2 with P_T=2, Nt-K=2, tau=1: 4 lam - 4
        root = monotone_scalar_root(lambda lam: lam * 4.0 - 4.0, 0.0, 5.0)
        assert abs(root - 1.0) < 1e-13

    def test_invalid_bracket(self):
        with pytest.raises(InvalidBracket):
            monotone_scalar_root(lambda x: x + 10.0, 0.0, 1.0)


def test_hermitian_asymmetry_measure():
    a = np.array([[1.0, 2.0 + 1j], [2.0 - 1j, 3.0]])
    assert hermitian_asymmetry(a) == 0.0
    a[0, 1] += 1e-3
    assert hermitian_asymmetry(a) > 1e-5
