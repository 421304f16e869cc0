# -*- coding: utf-8 -*-
import math
import unittest

import numpy as np

import meshcond


class TestFunction(unittest.TestCase):

    def test_format_float(self):
        for value in (0.0, 1.0, 0.1, 1.0 / 3.0, math.pi * 1e-300, -2.5e17,
                      0.5 * (1.0 - math.cos(math.pi / 126.0))):
            text = meshcond.utils.format_float(value)
            self.assertEqual(float(text), value)
        self.assertEqual(meshcond.utils.format_float(0.5), '0.5')
        self.assertEqual(meshcond.utils.format_float(1.0), '1')

    def test_parse_numbers(self):
        self.assertEqual(meshcond.utils.parse_numbers('4, 8,16'),
                         [4.0, 8.0, 16.0])
        self.assertEqual(meshcond.utils.parse_numbers('1e-3'), [0.001])

        with self.assertRaises(ValueError):
            meshcond.utils.parse_numbers('1,,2')
        with self.assertRaises(ValueError):
            meshcond.utils.parse_numbers('')
        with self.assertRaises(ValueError):
            meshcond.utils.parse_numbers('1, two')

    def test_symmetric_part(self):
        matrix = np.array([[1.0, 2.0], [4.0, 3.0]])
        result = meshcond.utils.symmetric_part(matrix)
        np.testing.assert_array_equal(result, [[1.0, 3.0], [3.0, 3.0]])

        stack = np.stack([matrix, matrix.T])
        self.assertEqual(meshcond.utils.symmetric_part(stack).shape,
                         (2, 2, 2))

    def test_spectral_norms(self):
        stack = np.array([np.diag([1.0, 4.0]),
                          [[2.0, 1.0], [1.0, 2.0]],
                          np.eye(2)])
        np.testing.assert_allclose(meshcond.utils.spectral_norms(stack),
                                   [4.0, 3.0, 1.0], rtol=1e-14)
