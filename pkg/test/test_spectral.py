# -*- coding: utf-8 -*-
import math
import unittest
from unittest import mock

import numpy as np
from scipy import sparse

import meshcond


def laplacian_1d(n):
    mesh = meshcond.mesh.generate_uniform_mesh(1, n)
    return meshcond.assembly.assemble_stiffness(
        mesh, meshcond.diffusion.DiffusionField.identity(1))


def laplacian_eigenvalues(n):
    k = np.arange(1, n)
    return 4.0 * n * np.sin(k * np.pi / (2.0 * n)) ** 2


def spd_matrix(eigenvalues, seed):
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((len(eigenvalues),) * 2))
    matrix = (q * eigenvalues) @ q.T
    return 0.5 * (matrix + matrix.T)


class TestDenseOracle(unittest.TestCase):

    def test_diagonal(self):
        values = meshcond.spectral.dense_eigenvalues_oracle(
            np.diag([3.0, 1.0, 2.0]))
        self.assertEqual(values, [1.0, 2.0, 3.0])

    def test_laplacian(self):
        values = meshcond.spectral.dense_eigenvalues_oracle(laplacian_1d(8))
        np.testing.assert_allclose(values, laplacian_eigenvalues(8),
                                   rtol=1e-12)

    def test_tridiagonal_ql(self):
        n = 50
        values = meshcond.spectral.tridiagonal_ql(np.full(n - 1, 2.0 * n),
                                                  np.full(n - 2, -1.0 * n))
        np.testing.assert_allclose(values, laplacian_eigenvalues(n),
                                   rtol=1e-11)

    def test_single_entry(self):
        self.assertEqual(
            meshcond.spectral.dense_eigenvalues_oracle([[2.5]]), [2.5])

    def test_against_lapack(self):
        rng = np.random.default_rng(1)
        for order in (2, 5, 30):
            matrix = rng.standard_normal((order, order))
            matrix = matrix + matrix.T
            ql = meshcond.spectral.dense_eigenvalues_oracle(matrix)
            lapack = meshcond.spectral.dense_eigenvalues_oracle(
                matrix, method='lapack')
            scale = np.max(np.abs(lapack))
            np.testing.assert_allclose(ql, lapack, atol=1e-11 * scale)

    def test_householder_preserves_spectrum(self):
        matrix = spd_matrix(np.geomspace(1.0, 1e3, 12), 4)
        diagonal, offdiagonal = meshcond.spectral.householder_tridiagonal(
            matrix)
        self.assertEqual((diagonal.size, offdiagonal.size), (12, 11))
        tridiagonal = np.diag(diagonal) + np.diag(offdiagonal, 1) \
            + np.diag(offdiagonal, -1)
        np.testing.assert_allclose(np.linalg.eigvalsh(tridiagonal),
                                   np.geomspace(1.0, 1e3, 12), rtol=1e-9)

    def test_errors(self):
        with self.assertRaises(ValueError):
            meshcond.spectral.dense_eigenvalues_oracle(np.ones((2, 3)))
        with self.assertRaises(ValueError):
            meshcond.spectral.dense_eigenvalues_oracle(np.eye(2),
                                                       method='jacobi')


class TestExtremeEigenvalues(unittest.TestCase):

    def test_small_laplacian(self):
        result = meshcond.spectral.extreme_eigenvalues(laplacian_1d(4))
        self.assertAlmostEqual(result.lambda_min,
                               8.0 * (1.0 - math.sqrt(2.0) / 2), places=12)
        self.assertAlmostEqual(result.lambda_max,
                               8.0 * (1.0 + math.sqrt(2.0) / 2), places=12)
        self.assertAlmostEqual(result.kappa, 5.82842712474619, places=10)

    def test_dense_laplacian(self):
        result = meshcond.spectral.extreme_eigenvalues(laplacian_1d(64))
        expected = laplacian_eigenvalues(64)
        self.assertAlmostEqual(result.lambda_min / expected[0], 1.0,
                               places=10)
        self.assertAlmostEqual(result.lambda_max / expected[-1], 1.0,
                               places=10)

    def test_lanczos_laplacian(self):
        n = 256
        result = meshcond.spectral.extreme_eigenvalues(laplacian_1d(n))
        expected = laplacian_eigenvalues(n)
        np.testing.assert_allclose(result.lambda_min, expected[0], rtol=1e-8)
        np.testing.assert_allclose(result.lambda_max, expected[-1],
                                   rtol=1e-8)
        np.testing.assert_allclose(result.kappa,
                                   1.0 / math.tan(math.pi / (2 * n)) ** 2,
                                   rtol=1e-8)

    def test_mass(self):
        for n in (4, 200):
            mesh = meshcond.mesh.generate_uniform_mesh(1, n)
            result = meshcond.spectral.extreme_eigenvalues(
                meshcond.assembly.assemble_mass(mesh))
            c = math.cos(math.pi / n)
            self.assertAlmostEqual(result.kappa, (2 + c) / (2 - c), places=6)

    def test_random_spd(self):
        eigenvalues = np.geomspace(1.0, 1e6, 100)
        result = meshcond.spectral.extreme_eigenvalues(
            spd_matrix(eigenvalues, 9))
        np.testing.assert_allclose(result.lambda_min, 1.0, rtol=1e-6)
        np.testing.assert_allclose(result.lambda_max, 1e6, rtol=1e-6)
        self.assertLessEqual(result.rel_tol_achieved, 1e-6)

    def test_random_spd_against_oracle(self):
        rng = np.random.default_rng(2024)
        for seed, order in enumerate(np.linspace(65, 200, 50).astype(int)):
            eigenvalues = np.geomspace(1.0, 10.0 ** rng.uniform(1.0, 4.0),
                                       order) * rng.uniform(0.1, 10.0)
            matrix = spd_matrix(eigenvalues, seed)
            result = meshcond.spectral.extreme_eigenvalues(matrix, 1e-8)
            oracle = meshcond.spectral.dense_eigenvalues_oracle(matrix)
            np.testing.assert_allclose(result.lambda_min, oracle[0],
                                       rtol=1e-8)
            np.testing.assert_allclose(result.lambda_max, oracle[-1],
                                       rtol=1e-8)
            self.assertLessEqual(result.rel_tol_achieved, 1e-8)

    def test_long_laplacian(self):
        n = 1024
        result = meshcond.spectral.extreme_eigenvalues(laplacian_1d(n), 1e-8)
        expected = laplacian_eigenvalues(n)
        np.testing.assert_allclose(result.lambda_min, expected[0], rtol=1e-8)
        np.testing.assert_allclose(result.lambda_max, expected[-1],
                                   rtol=1e-8)

    def test_skew_mesh_against_oracle(self):
        mesh = meshcond.mesh.generate_skew_mesh_2d(40, 125.0)
        for field in (meshcond.diffusion.DiffusionField.identity(2),
                      meshcond.diffusion.DiffusionField.rotated()):
            disc = meshcond.assembly.Discretization(mesh, field)
            self.assertEqual(disc.stiffness.order, 1521)
            for matrix in (disc.scaled_stiffness, disc.stiffness):
                result = meshcond.spectral.extreme_eigenvalues(matrix, 1e-8)
                oracle = meshcond.spectral.dense_eigenvalues_oracle(
                    matrix, method='lapack')
                np.testing.assert_allclose(result.lambda_max, oracle[-1],
                                           rtol=1e-8)
                # The dense lambda_min of the unscaled rotated matrix only
                # carries about eps * kappa ~ 1e-8 relative accuracy.
                if matrix is disc.scaled_stiffness or \
                        field.kind == 'identity':
                    np.testing.assert_allclose(result.lambda_min, oracle[0],
                                               rtol=1e-8)

    def test_residual_above_tolerance(self):
        matrix = sparse.diags(np.arange(1.0, 101.0))
        with mock.patch('meshcond.spectral._arpack',
                        side_effect=[(100.0, 1e-3), (1.0, 1e-3)]):
            with self.assertRaises(meshcond.ConvergenceError) as context:
                meshcond.spectral.extreme_eigenvalues(matrix, 1e-8)
        self.assertEqual(context.exception.residual, 1e-3)
        self.assertIn('above tolerance', str(context.exception))

    def test_scalar_multiple(self):
        matrix = laplacian_1d(100).tocsr()
        first = meshcond.spectral.extreme_eigenvalues(matrix)
        second = meshcond.spectral.extreme_eigenvalues(3.0 * matrix)
        np.testing.assert_allclose(second.kappa, first.kappa, rtol=1e-6)
        np.testing.assert_allclose(second.lambda_max, 3 * first.lambda_max,
                                   rtol=1e-6)

    def test_not_positive_definite(self):
        with self.assertRaises(ValueError):
            meshcond.spectral.extreme_eigenvalues(np.diag([1.0, -1.0]))
        with self.assertRaises(ValueError):
            meshcond.spectral.extreme_eigenvalues(np.zeros((0, 0)))

    def test_tolerance_range(self):
        for tol in (0.0, -1e-8, 1e-3):
            with self.assertRaises(ValueError):
                meshcond.spectral.extreme_eigenvalues(np.eye(3), tol)


class TestConjugateGradient(unittest.TestCase):

    def test_identity(self):
        self.assertEqual(
            meshcond.spectral.cg_iteration_count(sparse.eye(10),
                                                 np.ones(10)), 1)

    def test_zero_rhs(self):
        self.assertEqual(
            meshcond.spectral.cg_iteration_count(np.eye(3), np.zeros(3)), 0)

    def test_finite_termination(self):
        matrix = spd_matrix(np.linspace(1.0, 10.0, 20), 3)
        count = meshcond.spectral.cg_iteration_count(matrix, np.ones(20))
        self.assertLessEqual(count, 25)

    def test_jacobi_preconditioning(self):
        order = 200
        tridiagonal = sparse.diags([-0.25, 1.0, -0.25], [-1, 0, 1],
                                   shape=(order, order))
        root = sparse.diags(np.sqrt(np.geomspace(1.0, 1e6, order)))
        matrix = meshcond.assembly.SymmetricMatrix(root @ tridiagonal @ root)
        rhs = np.ones(order)
        scaling = meshcond.assembly.jacobi_scaling(matrix)
        preconditioned = meshcond.spectral.cg_iteration_count(
            matrix, rhs, 1e-6, scaling)
        plain = meshcond.spectral.cg_iteration_count(matrix, rhs, 1e-6)
        self.assertLess(preconditioned, 40)
        self.assertLess(preconditioned, plain)

    def test_iteration_cap(self):
        with self.assertRaises(meshcond.ConvergenceError) as context:
            meshcond.spectral.cg_iteration_count(laplacian_1d(20),
                                                 np.ones(19), maxiter=1)
        self.assertGreater(context.exception.residual, 1e-8)

    def test_size_mismatch(self):
        with self.assertRaises(ValueError):
            meshcond.spectral.cg_iteration_count(np.eye(3), np.ones(2))
