# -*- coding: utf-8 -*-
import math
import unittest

import numpy as np

import meshcond


class TestDiffusionField(unittest.TestCase):

    def test_identity(self):
        field = meshcond.diffusion.DiffusionField.identity(3)
        np.testing.assert_array_equal(
            meshcond.diffusion.evaluate_field(field, [0.2, 0.4, 0.6]),
            np.eye(3))
        self.assertEqual(field.spectral_bounds(), (1.0, 1.0))
        self.assertTrue(field.is_constant)

    def test_constant(self):
        field = meshcond.diffusion.DiffusionField.constant([[2.0, 1.0],
                                                            [1.0, 2.0]])
        np.testing.assert_array_equal(
            meshcond.diffusion.evaluate_field(field, [0.9, 0.1]),
            [[2.0, 1.0], [1.0, 2.0]])
        d_min, d_max = field.spectral_bounds()
        self.assertAlmostEqual(d_min, 1.0, places=14)
        self.assertAlmostEqual(d_max, 3.0, places=14)

    def test_constant_not_spd(self):
        with self.assertRaises(meshcond.FieldError):
            meshcond.diffusion.DiffusionField.constant([[1.0, 2.0],
                                                        [2.0, 1.0]])
        with self.assertRaises(meshcond.FieldError):
            meshcond.diffusion.DiffusionField.constant([[1.0, 0.5],
                                                        [0.0, 1.0]])
        with self.assertRaises(meshcond.FieldError):
            meshcond.diffusion.DiffusionField.constant([[float('nan')]])

    def test_rotated_origin(self):
        # psi(0, 0) = 0, the principal axes are the coordinate axes.
        field = meshcond.diffusion.DiffusionField.rotated()
        np.testing.assert_allclose(
            meshcond.diffusion.evaluate_field(field, [0.0, 0.0]),
            [[1000.0, 0.0], [0.0, 1.0]], atol=1e-12)

    def test_rotated_quarter_turn(self):
        # psi = pi / 2 swaps the two eigen directions.
        field = meshcond.diffusion.DiffusionField.rotated()
        x = math.asin(0.5)
        value = meshcond.diffusion.evaluate_field(field, [x, 0.0])
        np.testing.assert_allclose(value, [[1.0, 0.0], [0.0, 1000.0]],
                                   atol=1e-10)

    def test_rotated_half_turn(self):
        # psi = pi brings the principal axes back onto the coordinate axes.
        field = meshcond.diffusion.DiffusionField.rotated()
        value = meshcond.diffusion.evaluate_field(field, [math.pi / 2, 0.0])
        np.testing.assert_allclose(value, [[1000.0, 0.0], [0.0, 1.0]],
                                   atol=1e-10)

    def test_rotated_invariants(self):
        field = meshcond.diffusion.DiffusionField.rotated()
        rng = np.random.default_rng(11)
        values = field.evaluate(rng.uniform(0.0, 1.0, (200, 2)))
        np.testing.assert_allclose(np.linalg.det(values), 1000.0, rtol=1e-10)
        np.testing.assert_allclose(np.trace(values, axis1=1, axis2=2), 1001.0,
                                   rtol=1e-13)
        np.testing.assert_array_equal(values, np.swapaxes(values, 1, 2))
        self.assertEqual(field.spectral_bounds(), (1.0, 1000.0))
        self.assertFalse(field.is_constant)

    def test_rotated_dimension(self):
        with self.assertRaises(meshcond.FieldError):
            meshcond.diffusion.DiffusionField(3, meshcond.diffusion.ROTATED,
                                              eigenvalues=(2.0, 1.0))
        with self.assertRaises(meshcond.FieldError):
            meshcond.diffusion.DiffusionField.rotated(-1.0, 1.0)

    def test_evaluate_bad_point(self):
        field = meshcond.diffusion.DiffusionField.identity(2)
        with self.assertRaises(meshcond.FieldError):
            meshcond.diffusion.evaluate_field(field, [0.5])
        with self.assertRaises(meshcond.FieldError):
            meshcond.diffusion.evaluate_field(field, [0.5, float('inf')])

    def test_equality(self):
        self.assertEqual(meshcond.diffusion.parse_field('rotated'),
                         meshcond.diffusion.DiffusionField.rotated())
        self.assertNotEqual(meshcond.diffusion.DiffusionField.identity(2),
                            meshcond.diffusion.DiffusionField.identity(3))
        self.assertEqual(len({meshcond.diffusion.DiffusionField.identity(2),
                              meshcond.diffusion.parse_field('identity', 2)}),
                         1)


class TestElementAverages(unittest.TestCase):

    def test_constant(self):
        mesh = meshcond.mesh.generate_uniform_mesh(2, 3)
        matrix = [[3.0, 0.5], [0.5, 1.0]]
        field = meshcond.diffusion.DiffusionField.constant(matrix)
        averages = meshcond.diffusion.element_averages(field, mesh)
        self.assertEqual(averages.shape, (mesh.n_elements, 2, 2))
        np.testing.assert_array_equal(averages[5], matrix)

    def test_rotated_barycenter(self):
        mesh = meshcond.mesh.generate_uniform_mesh(2, 4)
        field = meshcond.diffusion.DiffusionField.rotated()
        averages = meshcond.diffusion.element_averages(field, mesh)
        for k in (0, 7, 31):
            barycenter = mesh.vertices[mesh.elements[k]].mean(axis=0)
            np.testing.assert_allclose(
                averages[k],
                meshcond.diffusion.evaluate_field(field, barycenter),
                rtol=1e-12, atol=1e-9)
            average = meshcond.diffusion.element_average(field, mesh, k)
            np.testing.assert_allclose(average.matrix, averages[k],
                                       rtol=1e-12, atol=1e-9)
            self.assertAlmostEqual(average.determinant, 1000.0, places=8)

    def test_dimension_mismatch(self):
        mesh = meshcond.mesh.generate_uniform_mesh(1, 4)
        field = meshcond.diffusion.DiffusionField.identity(2)
        with self.assertRaises(meshcond.FieldError):
            meshcond.diffusion.element_averages(field, mesh)
        with self.assertRaises(meshcond.FieldError):
            meshcond.diffusion.field_spectral_bounds(field, mesh)

    def test_element_out_of_range(self):
        mesh = meshcond.mesh.generate_uniform_mesh(1, 4)
        field = meshcond.diffusion.DiffusionField.identity(1)
        with self.assertRaises(meshcond.FieldError):
            meshcond.diffusion.element_average(field, mesh, -1)


class TestParseField(unittest.TestCase):

    def test_identity(self):
        field = meshcond.diffusion.parse_field('identity', 3)
        self.assertEqual(field.dim, 3)
        self.assertEqual(field.spec, 'identity')
        with self.assertRaises(meshcond.FieldError):
            meshcond.diffusion.parse_field('identity')

    def test_constant(self):
        field = meshcond.diffusion.parse_field('const:4,1,1,2')
        self.assertEqual(field.dim, 2)
        self.assertEqual(field.spec, 'const:4,1,1,2')
        field = meshcond.diffusion.parse_field('const:0.5', 1)
        self.assertEqual(field.spectral_bounds(), (0.5, 0.5))

    def test_rotated(self):
        field = meshcond.diffusion.parse_field('rotated:100,1')
        self.assertEqual(field.spectral_bounds(), (1.0, 100.0))
        self.assertEqual(meshcond.diffusion.parse_field('rotated').spec,
                         'rotated:1000,1')

    def test_errors(self):
        for text in ('', 'const', 'const:1,2', 'const:1,0,0,1', 'rotated:1',
                     'rotated:a,b', 'constant:1', 'identity:1',
                     'const:1,2,2,1'):
            with self.assertRaises(meshcond.FieldError):
                meshcond.diffusion.parse_field(text, 3)
        with self.assertRaises(meshcond.FieldError):
            meshcond.diffusion.parse_field('rotated', 3)
