# -*- coding: utf-8 -*-
"""Command line interface: ``meshcond generate|analyze|study|calibrate``."""
import argparse
import logging
import sys

from meshcond import __version__
from meshcond.assembly import AssemblyError, Discretization
from meshcond.bounds import (CalibrationConstant, CalibrationError,
                             calibrate_constant, condition_bounds)
from meshcond.diffusion import FieldError, parse_field
from meshcond.experiments import (StudyConfig, StudyConfigError,
                                  StudyRow, auto_reference_n, run_study,
                                  study_slopes, write_csv)
from meshcond.mesh import (MeshError, generate_chebyshev_mesh,
                           generate_skew_mesh_2d, generate_skew_mesh_3d,
                           generate_uniform_mesh, read_mesh, write_mesh)
from meshcond.spectral import DEFAULT_TOL, ConvergenceError


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VIOLATION = 2

ERRORS = (MeshError, FieldError, AssemblyError, CalibrationError,
          StudyConfigError, ConvergenceError, ValueError, OSError)


class ArgumentParser(argparse.ArgumentParser):

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, '%s: error: %s\n' % (self.prog, message))


def _generate(args):
    if args.case == 'uniform':
        mesh = generate_uniform_mesh(args.dim, args.n)
    elif args.case == 'chebyshev':
        mesh = generate_chebyshev_mesh(args.n)
    elif args.case == 'skew2d':
        mesh = generate_skew_mesh_2d(args.n, args.aspect)
    else:
        mesh = generate_skew_mesh_3d(args.n, args.aspect)
    write_mesh(mesh, args.output)
    logger.info('wrote %r to %s', mesh, args.output)
    return EXIT_OK


def _analyze(args):
    mesh = read_mesh(args.mesh)
    field = parse_field(args.field, mesh.dim)
    if args.calibration:
        calibration = CalibrationConstant.load(args.calibration)
    else:
        calibration = calibrate_constant('uniform', field,
                                         auto_reference_n(mesh.dim), args.tol)
    disc = Discretization(mesh, field)
    report = condition_bounds(mesh, field, calibration, args.tol, disc)
    if args.dump_matrix:
        disc.stiffness.dump(args.dump_matrix)

    row = StudyRow('mesh', None, None, report)
    if args.csv:
        with open(args.csv, 'w', newline='') as f:
            write_csv([row], f)
    print('kappa(A)          %.6g  (estimate %.6g)' % (report.exact.kappa,
                                                       report.est_kappa))
    print('kappa(S^-1AS^-1)  %.6g  (estimate %.6g)' % (
        report.exact_scaled.kappa, report.est_kappa_scaled))
    print('kappa(B)          %.6g  (bounds %.6g, %.6g)' % (
        (report.exact_mass.kappa,) + tuple(report.mass_bounds.two_sided)))
    for violation in row.violations:
        print('violation: %s' % violation, file=sys.stderr)
    return EXIT_VIOLATION if row.violations else EXIT_OK


def _study(args):
    config = StudyConfig.from_file(args.config)
    if args.jobs:
        config.jobs = args.jobs
    rows = run_study(config)
    with open(args.csv, 'w', newline='') as f:
        write_csv(rows, f)
    converged = [row for row in rows if row.converged]
    if len(converged) >= 3:
        for column, slope in sorted(study_slopes(rows, config.sweep).items()):
            print('slope %-18s %.4f' % (column, slope))
    violations = [v for row in rows for v in row.violations]
    for violation in violations:
        print('violation: %s' % violation, file=sys.stderr)
    return EXIT_VIOLATION if violations else EXIT_OK


def _calibrate(args):
    field = parse_field(args.field, args.dim)
    calibration = calibrate_constant('uniform', field, args.n_ref, args.tol)
    calibration.save(args.output)
    print('C = %.10g' % calibration.c)
    return EXIT_OK


def build_parser():
    parser = ArgumentParser(
        prog='meshcond',
        description='Conditioning of finite element stiffness and mass '
                    'matrices on simplicial meshes.')
    parser.add_argument('--version', action='version',
                        version='%(prog)s ' + __version__)
    parser.add_argument('-v', '--verbose', action='store_true')
    commands = parser.add_subparsers(dest='command', metavar='command')
    commands.required = True

    generate = commands.add_parser('generate', help='write a mesh file')
    generate.add_argument('--case', required=True,
                          choices=('uniform', 'chebyshev', 'skew2d', 'skew3d'))
    generate.add_argument('--n', type=int, required=True)
    generate.add_argument('--aspect', type=float, default=1.0)
    generate.add_argument('--dim', type=int, default=2, choices=(1, 2, 3))
    generate.add_argument('-o', '--output', required=True)
    generate.set_defaults(run=_generate)

    analyze = commands.add_parser('analyze',
                                  help='exact values and estimates of a mesh')
    analyze.add_argument('--mesh', required=True)
    analyze.add_argument('--field', default='identity')
    analyze.add_argument('--calibration')
    analyze.add_argument('--tol', type=float, default=DEFAULT_TOL)
    analyze.add_argument('--csv')
    analyze.add_argument('--dump-matrix')
    analyze.set_defaults(run=_analyze)

    study = commands.add_parser('study', help='run a mesh-family study')
    study.add_argument('--config', required=True)
    study.add_argument('--csv', required=True)
    study.add_argument('--jobs', type=int)
    study.set_defaults(run=_study)

    calibrate = commands.add_parser('calibrate',
                                    help='fit the lower bound constant')
    calibrate.add_argument('--dim', type=int, required=True, choices=(1, 2, 3))
    calibrate.add_argument('--field', default='identity')
    calibrate.add_argument('--n-ref', type=int, required=True)
    calibrate.add_argument('--tol', type=float, default=DEFAULT_TOL)
    calibrate.add_argument('-o', '--output', required=True)
    calibrate.set_defaults(run=_calibrate)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format='%(levelname)s %(name)s: %(message)s')
    try:
        return args.run(args)
    except ERRORS as error:
        print('meshcond: error: %s' % error, file=sys.stderr)
        return EXIT_ERROR


if __name__ == '__main__':
    sys.exit(main())
