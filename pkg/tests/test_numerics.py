import numpy as np
import pytest

from macdmt.errors import ContractViolationError, NotPsdError
from macdmt.numerics import (
    RngStream,
    hermitian_eigenvalues,
    logdet_eye_plus_gram,
    psd_sqrt,
    rank_with_tol,
    sample_complex_gaussian,
)


def random_hermitian(rng, n, psd=False):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    if psd:
        return a @ a.conj().T / n
    return 0.5 * (a + a.conj().T)


class TestHermitianEigenvalues:
    def test_identity(self):
        w = hermitian_eigenvalues(np.eye(3))
        assert np.allclose(w, [1, 1, 1])

    def test_diagonal_sorted_ascending(self):
        w = hermitian_eigenvalues(np.diag([3.0, 1.0, 2.0]))
        assert np.allclose(w, [1, 2, 3])

    def test_rank_one_all_ones(self):
        w = hermitian_eigenvalues(np.ones((2, 2)))
        assert np.allclose(w, [0, 2], atol=1e-12)

    def test_rejects_non_square(self):
        with pytest.raises(ContractViolationError):
            hermitian_eigenvalues(np.ones((2, 3)))

    def test_rejects_non_hermitian(self):
        with pytest.raises(ContractViolationError):
            hermitian_eigenvalues(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_sum_matches_trace_and_product_matches_det(self):
        rng = np.random.default_rng(7)
        for n in (2, 5, 11):
            a = random_hermitian(rng, n) + 3 * n * np.eye(n)  # well conditioned
            w = hermitian_eigenvalues(a)
            assert np.isclose(w.sum(), np.trace(a).real, rtol=1e-9)
            assert np.isclose(np.prod(w), np.linalg.det(a).real, rtol=1e-8)


class TestPsdSqrt:
    def test_identity(self):
        assert np.allclose(psd_sqrt(np.eye(4)), np.eye(4), atol=1e-12)

    def test_diagonal(self):
        assert np.allclose(psd_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), atol=1e-12)

    def test_all_ones(self):
        s = psd_sqrt(np.ones((2, 2)))
        assert np.allclose(s, np.ones((2, 2)) / np.sqrt(2), atol=1e-12)
        assert np.allclose(s @ s, np.ones((2, 2)), atol=1e-12)

    def test_square_reproduces_input(self):
        rng = np.random.default_rng(11)
        for n in (2, 8, 32):
            a = random_hermitian(rng, n, psd=True)
            s = psd_sqrt(a)
            err = np.linalg.norm(s @ s - a) / np.linalg.norm(a)
            assert err < 1e-9
            assert np.allclose(s, s.conj().T, atol=1e-12)

    def test_clamps_tiny_negatives(self):
        a = np.diag([1.0, -5e-11])
        s = psd_sqrt(a)
        assert np.allclose(s, np.diag([1.0, 0.0]), atol=1e-5)

    def test_rejects_indefinite(self):
        with pytest.raises(NotPsdError):
            psd_sqrt(np.diag([1.0, -1e-6]))


class TestLogdet:
    def test_zero_snr(self):
        assert logdet_eye_plus_gram(0.0, np.ones((3, 2))) == 0.0

    def test_identity(self):
        assert np.isclose(logdet_eye_plus_gram(1.0, np.eye(2)), 2 * np.log(2.0))

    def test_diagonal_against_direct_determinant(self):
        h = np.array([[1.0, 0.0], [0.0, 2.0]])
        got = logdet_eye_plus_gram(3.0, h)
        direct = np.log(np.linalg.det(np.eye(2) + 3.0 * h @ h.conj().T)).real
        assert np.isclose(got, np.log(4.0) + np.log(13.0))
        assert np.isclose(got, direct, rtol=1e-12)

    def test_gram_side_invariance(self):
        rng = np.random.default_rng(3)
        h = rng.standard_normal((3, 7)) + 1j * rng.standard_normal((3, 7))
        assert np.isclose(
            logdet_eye_plus_gram(0.7, h),
            logdet_eye_plus_gram(0.7, h.conj().T),
            rtol=1e-9,
        )

    def test_nonnegative(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            h = rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))
            assert logdet_eye_plus_gram(0.3, h) >= 0.0

    def test_rejects_negative_scale(self):
        with pytest.raises(ContractViolationError):
            logdet_eye_plus_gram(-1.0, np.eye(2))


class TestRank:
    def test_identity(self):
        assert rank_with_tol(np.eye(5), 1e-9) == 5

    def test_all_ones(self):
        assert rank_with_tol(np.ones((4, 4)), 1e-9) == 1

    def test_thresholding(self):
        assert rank_with_tol(np.diag([1.0, 1e-15]), 1e-9) == 1

    def test_zero_matrix(self):
        assert rank_with_tol(np.zeros((3, 3)), 1e-9) == 0

    def test_rejects_bad_tol(self):
        with pytest.raises(ContractViolationError):
            rank_with_tol(np.eye(2), 0.0)


class TestRngStream:
    def test_deterministic(self):
        a = sample_complex_gaussian(RngStream(42, 7), 4, 5)
        b = sample_complex_gaussian(RngStream(42, 7), 4, 5)
        assert np.array_equal(a, b)

    def test_distinct_streams_differ(self):
        a = sample_complex_gaussian(RngStream(42, 7), 4, 5)
        b = sample_complex_gaussian(RngStream(42, 8), 4, 5)
        assert not np.array_equal(a, b)

    def test_blocks_are_disjoint(self):
        a = sample_complex_gaussian(RngStream(42, 7), 4, 5, block=0)
        b = sample_complex_gaussian(RngStream(42, 7), 4, 5, block=1)
        assert not np.array_equal(a, b)

    def test_moments(self):
        z = sample_complex_gaussian(RngStream(1, 0), 1000, 1000)
        assert abs(z.mean()) < 0.01
        assert abs(np.mean(np.abs(z) ** 2) - 1.0) < 0.01
        assert abs(np.var(z.real) - 0.5) < 0.01
        assert abs(np.var(z.imag) - 0.5) < 0.01

    def test_cross_stream_correlation(self):
        n = 100_000
        a = sample_complex_gaussian(RngStream(9, 0), n, 1).ravel()
        b = sample_complex_gaussian(RngStream(9, 1), n, 1).ravel()
        corr = abs(np.mean(a * b.conj()))
        assert corr < 0.01
