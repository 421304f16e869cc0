# -*- coding: utf-8 -*-
"""
Mesh-family studies: sweep a family of meshes, compare every exact extreme
eigenvalue and condition number with its estimate, and write one CSV row per
mesh.

A study is described by an INI file with a single ``[study]`` section::

    [study]
    case = skew2d-aspect
    values = 4, 8, 16, 32
    n = 100
    field = identity
    tol = 1e-8
    calibration = auto
    jobs = 2
    dense_check = no
"""
import configparser
import csv
import logging
import warnings
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from meshcond.assembly import Discretization
from meshcond.bounds import CalibrationConstant, calibrate_constant, \
    condition_bounds
from meshcond.diffusion import parse_field
from meshcond.mesh import (generate_chebyshev_mesh, generate_skew_mesh_2d,
                           generate_skew_mesh_3d, generate_uniform_mesh)
from meshcond.spectral import (DEFAULT_TOL, ConvergenceError,
                               dense_eigenvalues_oracle)
from meshcond.utils import parse_numbers


logger = logging.getLogger(__name__)

SECTION = 'study'
AUTO = 'auto'
AUTO_CALIBRATION_MAX_UNKNOWNS = 2000
DENSE_CHECK_MAX_UNKNOWNS = 3000

# case: (dimension, swept parameter, default of the fixed parameter)
CASES = {
    'chebyshev': (1, 'n', None),
    'skew2d-n': (2, 'n', 125.0),
    'skew2d-aspect': (2, 'aspect', 100),
    'skew3d-n': (3, 'n', 25.0),
    'skew3d-aspect': (3, 'aspect', 8),
    'uniform': (None, 'n', None),
}

COLUMNS = [
    'case', 'n', 'aspect', 'N', 'N_vi',
    'lambda_min', 'lambda_max', 'kappa',
    'lambda_min_scaled', 'lambda_max_scaled', 'kappa_scaled',
    'kappa_mass', 'kappa_mass_scaled',
    'est_lambda_min', 'est_lambda_max_lower', 'est_lambda_max_upper',
    'est_kappa',
    'est_lambda_min_scaled', 'est_lambda_max_scaled_upper',
    'est_kappa_scaled', 'est_kappa_standard',
    'est_kappa_mass_lower', 'est_kappa_mass_upper',
    'factor_base', 'factor_diffusion', 'factor_diffusion_scaled',
    'factor_volume',
    'lambda_min_bound_ok', 'dense_rel_error', 'converged', 'violations',
]


class StudyConfigError(ValueError):
    pass


def auto_reference_n(dim):
    """Largest n whose uniform mesh has at most 2000 interior vertices."""
    n = 2
    while n ** dim <= AUTO_CALIBRATION_MAX_UNKNOWNS:
        n += 1
    return n


class StudyConfig(object):

    def __init__(self, case, values, field='identity', n=None, aspect=None,
                 dim=None, tol=DEFAULT_TOL, calibration=AUTO, jobs=1,
                 dense_check=False):
        if case not in CASES:
            raise StudyConfigError('Unknown case %r, expected one of %s.'
                                   % (case, ', '.join(sorted(CASES))))
        case_dim, sweep, fixed = CASES[case]
        if case == 'uniform':
            case_dim = 2 if dim is None else int(dim)
            if case_dim not in (1, 2, 3):
                raise StudyConfigError('Uniform study dimension must be 1, 2 '
                                       'or 3, got %r.' % (dim,))
        elif dim is not None and int(dim) != case_dim:
            raise StudyConfigError('Case %s is %dD, got dim=%r.'
                                   % (case, case_dim, dim))

        values = [float(x) for x in values]
        if not values:
            raise StudyConfigError('The sweep list is empty.')
        if any(b <= a for a, b in zip(values, values[1:])):
            raise StudyConfigError('The sweep list must be strictly '
                                   'increasing.')
        if sweep == 'n':
            if any(x != int(x) for x in values):
                raise StudyConfigError('Subdivision counts must be integers.')
            values = [int(x) for x in values]
            if aspect is None:
                aspect = fixed
        elif n is None:
            n = fixed

        if not 0.0 < float(tol) <= 1e-4:
            raise StudyConfigError('Eigenvalue tolerance must be in '
                                   '(0, 1e-4], got %r.' % (tol,))
        if int(jobs) < 1:
            raise StudyConfigError('jobs must be at least 1.')
        try:
            field = parse_field(field, case_dim) if isinstance(field, str) \
                else field
        except ValueError as error:
            raise StudyConfigError(str(error))
        if field.dim != case_dim:
            raise StudyConfigError('Field dimension %d does not match the %dD '
                                   'case.' % (field.dim, case_dim))

        self.case = case
        self.dim = case_dim
        self.sweep = sweep
        self.values = values
        self.n = None if n is None else int(n)
        self.aspect = None if aspect is None else float(aspect)
        self.field = field
        self.tol = float(tol)
        self.calibration = calibration
        self.jobs = int(jobs)
        self.dense_check = bool(dense_check)

    @classmethod
    def from_string(cls, text):
        parser = configparser.ConfigParser()
        try:
            parser.read_string(text)
        except configparser.Error as error:
            raise StudyConfigError('Malformed study configuration: %s'
                                   % error)
        if not parser.has_section(SECTION):
            raise StudyConfigError('Missing [%s] section.' % SECTION)
        section = parser[SECTION]
        try:
            case = section['case']
            values = parse_numbers(section['values'])
        except KeyError as error:
            raise StudyConfigError('Missing key %s.' % error)
        except ValueError as error:
            raise StudyConfigError(str(error))
        try:
            return cls(case, values,
                       field=section.get('field', 'identity'),
                       n=section.getint('n'),
                       aspect=section.getfloat('aspect'),
                       dim=section.getint('dim'),
                       tol=section.getfloat('tol', DEFAULT_TOL),
                       calibration=section.get('calibration', AUTO),
                       jobs=section.getint('jobs', 1),
                       dense_check=section.getboolean('dense_check', False))
        except ValueError as error:
            if isinstance(error, StudyConfigError):
                raise
            raise StudyConfigError(str(error))

    @classmethod
    def from_file(cls, path):
        with open(path, 'r') as f:
            return cls.from_string(f.read())

    def parameters(self, value):
        """(n, aspect) of the mesh for one sweep value."""
        if self.sweep == 'n':
            return value, self.aspect
        return self.n, value

    def mesh_for(self, value):
        n, aspect = self.parameters(value)
        if self.case == 'chebyshev':
            return generate_chebyshev_mesh(n)
        if self.case == 'uniform':
            return generate_uniform_mesh(self.dim, n)
        if self.case.startswith('skew2d'):
            return generate_skew_mesh_2d(n, aspect)
        return generate_skew_mesh_3d(n, aspect)

    def load_calibration(self):
        if self.calibration == AUTO:
            return calibrate_constant('uniform', self.field,
                                      auto_reference_n(self.dim), self.tol)
        calibration = CalibrationConstant.load(self.calibration)
        if calibration.dim != self.dim:
            raise StudyConfigError('Calibration file %s is %dD, the study is '
                                   '%dD.' % (self.calibration,
                                             calibration.dim, self.dim))
        return calibration


class StudyRow(object):
    """One mesh of a study: its parameters and the condition report."""

    def __init__(self, case, n, aspect, report=None, dense_rel_error=None,
                 error=None):
        self.case = case
        self.n = n
        self.aspect = aspect
        self.report = report
        self.dense_rel_error = dense_rel_error
        self.error = error

    @property
    def converged(self):
        return self.report is not None

    @property
    def violations(self):
        return self.report.violations() if self.report is not None else []

    def get(self, column):
        return self.as_dict().get(column)

    def as_dict(self):
        row = dict.fromkeys(COLUMNS, '')
        row.update(case=self.case, n=self.n,
                   aspect='' if self.aspect is None else self.aspect,
                   converged=int(self.converged))
        if self.report is not None:
            row.update(self.report.as_row())
            row['lambda_min_bound_ok'] = int(
                self.report.lambda_min_bound_holds)
            row['violations'] = '; '.join(self.violations)
        if self.dense_rel_error is not None:
            row['dense_rel_error'] = self.dense_rel_error
        return row


def _dense_rel_error(disc, report):
    values = dense_eigenvalues_oracle(disc.stiffness)
    return max(abs(values[0] - report.exact.lambda_min) / values[0],
               abs(values[-1] - report.exact.lambda_max) / values[-1])


def _study_row(config, calibration, value):
    n, aspect = config.parameters(value)
    mesh = config.mesh_for(value)
    disc = Discretization(mesh, config.field)
    try:
        report = condition_bounds(mesh, config.field, calibration, config.tol,
                                  disc)
    except ConvergenceError as error:
        warnings.warn('%s %s=%r: %s' % (config.case, config.sweep, value,
                                        error), RuntimeWarning)
        return StudyRow(config.case, n, aspect, error=error)

    dense_error = None
    if config.dense_check and mesh.n_interior <= DENSE_CHECK_MAX_UNKNOWNS:
        dense_error = _dense_rel_error(disc, report)
    row = StudyRow(config.case, n, aspect, report, dense_error)
    for violation in row.violations:
        logger.warning('%s %s=%r: %s', config.case, config.sweep, value,
                       violation)
    logger.info('%s %s=%r: N=%d kappa=%.6g kappa_scaled=%.6g', config.case,
                config.sweep, value, mesh.n_elements, report.exact.kappa,
                report.exact_scaled.kappa)
    return row


def run_study(config, calibration=None):
    """Compute the rows of a study, in sweep order."""
    if calibration is None:
        calibration = config.load_calibration()
    logger.info('study %s over %s=%s with C=%.10g', config.case, config.sweep,
                config.values, calibration.c)
    with ThreadPoolExecutor(max_workers=config.jobs) as pool:
        return list(pool.map(lambda value: _study_row(config, calibration,
                                                      value),
                             config.values))


def write_csv(rows, f):
    """Write study rows to an open text file, columns in COLUMNS order."""
    writer = csv.DictWriter(f, fieldnames=COLUMNS, lineterminator='\n')
    writer.writeheader()
    for row in rows:
        writer.writerow(row.as_dict())


def fit_loglog_slope(xs, ys):
    """Least-squares slope of ln(y) against ln(x)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError('Need two sequences of the same length.')
    if xs.size < 3:
        raise ValueError('A slope fit needs at least 3 points, got %d.'
                         % xs.size)
    if np.any(xs <= 0.0) or np.any(ys <= 0.0):
        raise ValueError('Log-log fit needs positive values.')
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


SLOPE_COLUMNS = ('kappa', 'kappa_scaled', 'est_kappa', 'est_kappa_scaled')


def study_slopes(rows, sweep='n'):
    """Log-log slopes of the condition number columns.

    Against the element count N for subdivision sweeps, against the aspect
    ratio for aspect sweeps. Rows without a converged solve are skipped.
    """
    rows = [row for row in rows if row.converged]
    if sweep == 'n':
        xs = [row.report.n_elements for row in rows]
    else:
        xs = [row.aspect for row in rows]
    slopes = {}
    for column in SLOPE_COLUMNS:
        ys = [row.get(column) for row in rows]
        slopes[column] = fit_loglog_slope(xs, ys)
    return slopes
