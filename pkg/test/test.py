# -*- coding: utf-8 -*-
import contextlib
import io
import math
import os
import shutil
import tempfile
import unittest
from unittest import mock

import meshcond
from meshcond import cli


DATA = os.path.join(os.path.dirname(__file__), '_data')


class TestFunction(unittest.TestCase):
    mesh_path = '_data/square.msh'

    def test_version(self):
        self.assertEqual(meshcond.__version__, '0.1.0')

    def test_open(self):
        test_path = os.path.join(os.path.dirname(__file__), self.mesh_path)
        mesh = meshcond.open_mesh(test_path)

        self.assertIsInstance(mesh, meshcond.mesh.SimplicialMesh)
        self.assertEqual(mesh.dim, 2)
        self.assertEqual(mesh.n_elements, 8)
        self.assertEqual(mesh.n_interior, 1)

    def test_exceptions(self):
        self.assertTrue(issubclass(meshcond.DegenerateElementError,
                                   meshcond.MeshError))
        self.assertTrue(issubclass(meshcond.MeshFormatError,
                                   meshcond.MeshError))
        for error in (meshcond.MeshError, meshcond.FieldError,
                      meshcond.AssemblyError, meshcond.CalibrationError,
                      meshcond.StudyConfigError):
            self.assertTrue(issubclass(error, ValueError))
        self.assertTrue(issubclass(meshcond.ConvergenceError, RuntimeError))


class TestCommandLine(unittest.TestCase):

    def setUp(self):
        self.directory = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.directory)

    def path(self, name):
        return os.path.join(self.directory, name)

    def run_main(self, *argv):
        out, err = io.StringIO(), io.StringIO()
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
            try:
                code = cli.main(list(argv))
            except SystemExit as error:
                code = error.code
        return code, out.getvalue(), err.getvalue()

    def test_generate(self):
        code, _, _ = self.run_main('generate', '--case', 'uniform',
                                   '--dim', '2', '--n', '2',
                                   '-o', self.path('square.msh'))
        self.assertEqual(code, cli.EXIT_OK)
        with open(self.path('square.msh')) as f:
            generated = f.read()
        with open(os.path.join(DATA, 'square.msh')) as f:
            self.assertEqual(generated, f.read())

        code, _, _ = self.run_main('generate', '--case', 'skew2d',
                                   '--n', '8', '--aspect', '10',
                                   '-o', self.path('skew.msh'))
        self.assertEqual(code, cli.EXIT_OK)
        self.assertEqual(
            meshcond.open_mesh(self.path('skew.msh')).n_elements, 128)

    def test_generate_errors(self):
        code, _, err = self.run_main('generate', '--case', 'chebyshev',
                                     '--n', '2', '-o', self.path('c.msh'))
        self.assertEqual(code, cli.EXIT_ERROR)
        self.assertIn('meshcond: error:', err)
        code, _, _ = self.run_main('generate', '--case', 'hexagon',
                                   '--n', '4', '-o', self.path('c.msh'))
        self.assertEqual(code, cli.EXIT_ERROR)
        code, _, _ = self.run_main('generate', '--n', '4')
        self.assertEqual(code, cli.EXIT_ERROR)

    def test_analyze(self):
        code, out, _ = self.run_main(
            'analyze', '--mesh', os.path.join(DATA, 'square.msh'),
            '--calibration', os.path.join(DATA, 'calibration_2d.json'),
            '--csv', self.path('out.csv'),
            '--dump-matrix', self.path('stiffness.txt'))
        self.assertEqual(code, cli.EXIT_OK)
        self.assertIn('kappa(A)', out)
        with open(self.path('out.csv')) as f:
            lines = f.read().splitlines()
        self.assertEqual(len(lines), 2)
        self.assertEqual(lines[0].split(','), meshcond.experiments.COLUMNS)
        with open(self.path('stiffness.txt')) as f:
            self.assertEqual(f.read(), '%%sym 1 1\n0 0 4\n')

    def test_analyze_violation(self):
        with mock.patch.object(meshcond.bounds.ConditionBoundReport,
                               'violations',
                               return_value=['lambda_max=9 above 8']):
            code, _, err = self.run_main(
                'analyze', '--mesh', os.path.join(DATA, 'square.msh'),
                '--calibration', os.path.join(DATA, 'calibration_2d.json'))
        self.assertEqual(code, cli.EXIT_VIOLATION)
        self.assertIn('violation: lambda_max=9 above 8', err)

    def test_analyze_errors(self):
        code, _, _ = self.run_main('analyze', '--mesh',
                                   self.path('missing.msh'))
        self.assertEqual(code, cli.EXIT_ERROR)
        code, _, _ = self.run_main('analyze', '--mesh',
                                   os.path.join(DATA, 'bad_index.msh'))
        self.assertEqual(code, cli.EXIT_ERROR)
        code, _, err = self.run_main(
            'analyze', '--mesh', os.path.join(DATA, 'square.msh'),
            '--field', 'const:1,2', '--calibration',
            os.path.join(DATA, 'calibration_2d.json'))
        self.assertEqual(code, cli.EXIT_ERROR)
        self.assertIn('const:1,2', err)

    def test_calibrate(self):
        code, out, _ = self.run_main('calibrate', '--dim', '1',
                                     '--n-ref', '64',
                                     '-o', self.path('c.json'))
        self.assertEqual(code, cli.EXIT_OK)
        self.assertTrue(out.startswith('C = '))
        calibration = meshcond.bounds.CalibrationConstant.load(
            self.path('c.json'))
        expected = 4.0 * 64 * 63 * math.sin(math.pi / 128) ** 2
        self.assertAlmostEqual(calibration.c / expected, 1.0, places=8)
        self.assertEqual(calibration.n_ref, 64)

    def test_study(self):
        meshcond.bounds.CalibrationConstant(9.8, 1).save(self.path('c.json'))
        with open(self.path('study.cfg'), 'w') as f:
            f.write('[study]\ncase = chebyshev\nvalues = 16, 32, 64\n'
                    'calibration = %s\n' % self.path('c.json'))
        code, out, _ = self.run_main('study', '--config',
                                     self.path('study.cfg'),
                                     '--csv', self.path('study.csv'),
                                     '--jobs', '2')
        self.assertEqual(code, cli.EXIT_OK)
        self.assertIn('slope kappa_scaled', out)
        with open(self.path('study.csv')) as f:
            self.assertEqual(len(f.read().splitlines()), 4)

    def test_study_missing_config(self):
        code, _, _ = self.run_main('study', '--config', self.path('no.cfg'),
                                   '--csv', self.path('study.csv'))
        self.assertEqual(code, cli.EXIT_ERROR)
