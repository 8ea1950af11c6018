"""Symmetric eigen-routines against full-decomposition and perturbation oracles."""

import numpy as np
import pytest

from amoo.core import NumericError, WeightVector
from amoo.linalg import (
    check_symmetric,
    jacobi_eigh,
    min_eigenpair,
    spectral_norm,
    weighted_hessian,
)

INV_SQRT2 = 1.0 / np.sqrt(2.0)


def random_symmetric(rng, n, scale=1.0):
    B = rng.normal(scale=scale, size=(n, n))
    return 0.5 * (B + B.T)


class TestMinEigenpair:
    def test_diagonal(self):
        lam, v = min_eigenpair(np.diag([2.0, 0.2]))
        assert lam == pytest.approx(0.2, abs=1e-12)
        np.testing.assert_allclose(np.abs(v), [0.0, 1.0], atol=1e-10)

    def test_two_by_two(self):
        # Characteristic polynomial (2-l)^2 - 1 has roots 1 and 3.
        lam, v = min_eigenpair([[2.0, 1.0], [1.0, 2.0]])
        assert lam == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(np.abs(v), [INV_SQRT2, INV_SQRT2], atol=1e-10)

    def test_identity(self):
        lam, v = min_eigenpair(np.eye(5))
        assert lam == pytest.approx(1.0, abs=1e-12)
        assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)

    def test_eigen_equation_postcondition(self):
        rng = np.random.default_rng(10)
        for _ in range(30):
            n = int(rng.integers(1, 9))
            A = random_symmetric(rng, n, scale=rng.uniform(0.1, 10.0))
            lam, v = min_eigenpair(A)
            tol = 1e-10 * (1.0 + np.linalg.norm(A, "fro"))
            assert np.linalg.norm(A @ v - lam * v) <= tol
            for _ in range(20):
                u = rng.normal(size=n)
                u /= np.linalg.norm(u)
                assert lam <= u @ A @ u + 1e-10

    def test_matches_full_decomposition_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            n = int(rng.integers(2, 9))
            A = random_symmetric(rng, n)
            lam, _ = min_eigenpair(A)
            assert lam == pytest.approx(np.linalg.eigvalsh(A)[0], abs=1e-8)

    def test_rejects_nonsymmetric(self):
        with pytest.raises(ValueError):
            min_eigenpair([[1.0, 2.0], [0.0, 1.0]])

    def test_rejects_bad_tol(self):
        with pytest.raises(ValueError):
            jacobi_eigh(np.eye(2), tol=0.0)

    def test_iteration_cap_carries_best_estimate(self):
        A = random_symmetric(np.random.default_rng(1), 6)
        with pytest.raises(NumericError) as err:
            jacobi_eigh(A, tol=1e-14, max_sweeps=0)
        assert err.value.payload is not None


class TestWeyl:
    def test_perturbation_bound(self):
        # |lambda_j(A) - lambda_j(A + D)| <= ||D||_2 for every j.
        rng = np.random.default_rng(12)
        for _ in range(100):
            n = int(rng.integers(2, 7))
            A = random_symmetric(rng, n, scale=rng.uniform(0.5, 5.0))
            D = random_symmetric(rng, n, scale=rng.uniform(0.01, 2.0))
            ev_a, _ = jacobi_eigh(A)
            ev_ad, _ = jacobi_eigh(A + D)
            assert np.max(np.abs(ev_a - ev_ad)) <= spectral_norm(D) + 1e-10


class TestWeightedHessian:
    def test_specification_example(self):
        H = weighted_hessian(
            [np.diag([1.8, 0.2]), np.diag([0.2, 1.8])], WeightVector([0.5, 0.5])
        )
        np.testing.assert_allclose(H, np.eye(2), atol=1e-15)

    def test_one_hot_selects(self):
        rng = np.random.default_rng(13)
        mats = [random_symmetric(rng, 3) for _ in range(3)]
        H = weighted_hessian(mats, WeightVector([0.0, 1.0, 0.0]))
        np.testing.assert_allclose(H, mats[1], atol=1e-15)

    def test_zero_weights(self):
        mats = [np.eye(2), np.diag([3.0, 4.0])]
        H = weighted_hessian(mats, WeightVector([0.0, 0.0]))
        np.testing.assert_allclose(H, 0.0, atol=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            weighted_hessian([np.eye(2)], WeightVector([0.5, 0.5]))
        with pytest.raises(ValueError):
            weighted_hessian([np.eye(2), np.eye(3)], WeightVector([0.5, 0.5]))

    def test_min_eig_concave_in_weights(self):
        rng = np.random.default_rng(14)
        mats = [random_symmetric(rng, 4) for _ in range(3)]
        for _ in range(50):
            w1 = rng.uniform(0, 1, size=3)
            w1 /= w1.sum()
            w2 = rng.uniform(0, 1, size=3)
            w2 /= w2.sum()
            t = rng.uniform()
            lam1, _ = min_eigenpair(weighted_hessian(mats, WeightVector(w1)))
            lam2, _ = min_eigenpair(weighted_hessian(mats, WeightVector(w2)))
            mix = WeightVector(t * w1 + (1 - t) * w2)
            lam_mix, _ = min_eigenpair(weighted_hessian(mats, mix))
            assert lam_mix >= t * lam1 + (1 - t) * lam2 - 1e-9


class TestSpectralNorm:
    def test_diagonal(self):
        assert spectral_norm(np.diag([-3.0, 2.0])) == pytest.approx(3.0, abs=1e-12)

    def test_off_diagonal(self):
        # Eigenvalues of the swap matrix are +1 and -1.
        assert spectral_norm([[0.0, 1.0], [1.0, 0.0]]) == pytest.approx(
            1.0, abs=1e-12
        )

    def test_zero_matrix(self):
        assert spectral_norm(np.zeros((3, 3))) == 0.0

    def test_matches_oracle(self):
        rng = np.random.default_rng(15)
        for _ in range(30):
            A = random_symmetric(rng, int(rng.integers(2, 7)))
            ref = float(np.max(np.abs(np.linalg.eigvalsh(A))))
            assert spectral_norm(A) == pytest.approx(ref, rel=1e-8, abs=1e-12)


class TestCheckSymmetric:
    def test_symmetrizes_tiny_noise(self):
        A = np.array([[1.0, 2.0], [2.0 + 1e-14, 1.0]])
        S = check_symmetric(A)
        assert np.abs(S - S.T).max() == 0.0

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            check_symmetric([[np.nan, 0.0], [0.0, 1.0]])
