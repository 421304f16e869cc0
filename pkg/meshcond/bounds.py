# -*- coding: utf-8 -*-
"""
Estimates of the extreme eigenvalues and condition numbers of the mass and
stiffness matrices, with and without Jacobi scaling.

All estimates are functions of the mesh geometry and of the element averages
D_K of the diffusion field. The lower bounds on the smallest eigenvalue carry
one generic constant C per dimension, fitted once on uniform meshes by
`calibrate_constant`.

Notation used below: N is the element count, k_bar = |Omega| / N the average
element volume, and M_K = (F'_K)^-1 D_K (F'_K)^-T the diffusion tensor pulled
back to the reference element.
"""
import json
import logging
import math

import numpy as np

from meshcond.assembly import Discretization, patch_sums
from meshcond.diffusion import FieldError
from meshcond.mesh import (generate_uniform_mesh, mesh_statistics,
                           reference_gradient_constant)
from meshcond.spectral import DEFAULT_TOL, extreme_eigenvalues
from meshcond.utils import symmetric_part


logger = logging.getLogger(__name__)

# Relative slack when comparing an exact value with a two-sided estimate.
ENVELOPE_RTOL = 1e-7
MIN_CALIBRATION_UNKNOWNS = 3
CALIBRATION_FAMILIES = ('uniform',)


class CalibrationError(ValueError):
    pass


def _discretization(mesh, field, discretization):
    if discretization is not None:
        return discretization
    if field.dim != mesh.dim:
        raise FieldError('Field of dimension %d on a mesh of dimension %d.'
                         % (field.dim, mesh.dim))
    return Discretization(mesh, field)


def _check_calibration(calibration, mesh):
    if calibration.dim != mesh.dim:
        raise CalibrationError('Constant calibrated in %dD used on a %dD mesh.'
                               % (calibration.dim, mesh.dim))
    return calibration.c


class QualityMeasures(object):
    """Alignment and equidistribution of the mesh in the metric D^-1."""

    def __init__(self, q_ali, q_eq, sigma_h, dk_norm):
        self.q_ali = q_ali
        self.q_eq = q_eq
        self.sigma_h = sigma_h
        self.dk_norm = dk_norm


class CalibrationConstant(object):
    """The generic constant C of the lower bounds, with its provenance."""

    def __init__(self, c, dim, field=None, n_ref=None, family='uniform',
                 n_elements=None):
        if not (isinstance(c, (int, float)) and math.isfinite(c) and c > 0):
            raise CalibrationError('Calibrated constant must be positive and '
                                   'finite, got %r.' % (c,))
        if dim not in (1, 2, 3):
            raise CalibrationError('Dimension must be 1, 2 or 3, got %r.'
                                   % (dim,))
        self.c = float(c)
        self.dim = dim
        self.field = field
        self.n_ref = n_ref
        self.family = family
        self.n_elements = n_elements

    def __repr__(self):
        return '<CalibrationConstant c=%.10g dim=%d>' % (self.c, self.dim)

    def as_dict(self):
        return {'dim': self.dim, 'c': self.c, 'field': self.field,
                'n_ref': self.n_ref, 'family': self.family,
                'n_elements': self.n_elements}

    @classmethod
    def from_dict(cls, values):
        try:
            return cls(c=values['c'], dim=values['dim'],
                       field=values.get('field'), n_ref=values.get('n_ref'),
                       family=values.get('family', 'uniform'),
                       n_elements=values.get('n_elements'))
        except (KeyError, TypeError, AttributeError) as error:
            raise CalibrationError('Malformed calibration: %r' % (error,))

    def save(self, path):
        with open(path, 'w') as f:
            json.dump(self.as_dict(), f, indent=2, sort_keys=True)
            f.write('\n')

    @classmethod
    def load(cls, path):
        with open(path, 'r') as f:
            try:
                values = json.load(f)
            except ValueError as error:
                raise CalibrationError('Malformed calibration file %s: %s'
                                       % (path, error))
        return cls.from_dict(values)


class MassConditionBounds(object):

    def __init__(self, dim, two_sided, patch_form, fried, standard):
        self.two_sided = two_sided
        self.patch_form = patch_form
        self.fried = fried
        self.standard = standard
        self.scaled_upper = float(dim + 2)


def mass_condition_bounds(mesh, discretization=None):
    """Bounds on kappa(B) from the diagonal, the patches and the elements."""
    d = mesh.dim
    stats = mesh_statistics(mesh)
    if discretization is not None:
        diagonal = discretization.mass.diagonal()
    else:
        diagonal = 2.0 * mesh.patch_volumes[mesh.interior] \
            / ((d + 1) * (d + 2))
    r = float(diagonal.max() / diagonal.min())
    big_r = stats.omega_max / stats.omega_min
    return MassConditionBounds(
        d,
        two_sided=(r, (d + 2) * r),
        patch_form=(big_r, (d + 2) * big_r),
        fried=(d + 2) * stats.p_max * stats.k_max / stats.k_min,
        standard=(d + 2) * stats.p_max * stats.h_ratio ** d)


def lambda_max_bounds(diagonal, dim, scaled=False):
    """[lower, upper] for the largest eigenvalue from the matrix diagonal."""
    if scaled:
        return 1.0, float(dim + 1)
    top = float(np.max(diagonal))
    return top, (dim + 1) * top


class GeometricLambdaMaxBounds(object):

    def __init__(self, patchwise, quality_form, elementwise):
        self.patchwise = patchwise
        self.quality_form = quality_form
        self.elementwise = elementwise


def quality_measures(mesh, field, discretization=None):
    """Per-element Q_ali and Q_eq, sigma_h and ||M_K||_2."""
    disc = _discretization(mesh, field, discretization)
    d = mesh.dim
    metric = disc.metric_matrices
    averages = disc.element_diffusion
    volumes = mesh.volumes

    if d == 1:
        q_ali = np.ones(mesh.n_elements)
    else:
        trace = np.trace(metric, axis1=1, axis2=2) / d
        det = np.linalg.det(metric)
        q_ali = (trace / det ** (1.0 / d)) ** (d / (2.0 * (d - 1)))

    metric_volumes = volumes / np.sqrt(np.linalg.det(averages))
    sigma_h = float(np.sum(metric_volumes))
    q_eq = (sigma_h / mesh.n_elements) / metric_volumes
    return QualityMeasures(q_ali=q_ali, q_eq=q_eq, sigma_h=sigma_h,
                           dk_norm=disc.metric_norms)


def lambda_max_geometric_bound(mesh, field, discretization=None):
    """Upper bounds on lambda_max(A) from the element geometry.

    `patchwise` sums |K| ||M_K||_2 over each patch, `quality_form` rewrites
    ||M_K||_2 with the quality measures, `elementwise` takes the largest
    element only.
    """
    disc = _discretization(mesh, field, discretization)
    d = mesh.dim
    c_phi = reference_gradient_constant(d)
    weighted = mesh.volumes * disc.metric_norms
    patchwise = (d + 1) * c_phi * float(np.max(patch_sums(mesh, weighted)))

    quality = quality_measures(mesh, field, disc)
    combined = (quality.q_ali ** (d - 1) * quality.q_eq) ** (2.0 / d)
    quality_form = (d + 1) * d * c_phi \
        * (mesh.n_elements / quality.sigma_h) ** (2.0 / d) \
        * float(np.max(patch_sums(mesh, mesh.volumes * combined)))

    stats = mesh_statistics(mesh)
    elementwise = stats.p_max * (d + 1) * c_phi * float(np.max(weighted))
    return GeometricLambdaMaxBounds(patchwise, quality_form, elementwise)


def volume_factor(mesh):
    """The volume-nonuniformity bracket of the unscaled bounds."""
    d = mesh.dim
    volumes = mesh.volumes
    k_bar = mesh.measure / mesh.n_elements
    if d == 1:
        return 1.0
    if d == 2:
        return 1.0 + math.log(k_bar / float(volumes.min()))
    return float(np.mean((k_bar / volumes) ** ((d - 2) / 2.0))) ** (2.0 / d)


def diffusion_factor(disc, scaled=False):
    """The D-nonuniformity factor of the condition number estimates."""
    mesh = disc.mesh
    d = mesh.dim
    n = mesh.n_elements
    d_min = disc.field.d_min
    volumes = mesh.volumes
    norms = disc.metric_norms
    if not scaled:
        return n ** (1.0 - 2.0 / d) / d_min \
            * float(np.max(patch_sums(mesh, volumes * norms)))
    if d == 1:
        k_bar = mesh.measure / n
        return float(np.sum(disc.element_diffusion[:, 0, 0] * k_bar
                            / volumes)) / (n * d_min)
    return (float(np.sum(volumes * norms ** (d / 2.0)))
            / (n * d_min ** (d / 2.0))) ** (2.0 / d)


def scaled_log_factor(disc):
    """1 + |ln(max ||M_K|| / sum |K| ||M_K||)|, for the scaled 2D bound."""
    norms = disc.metric_norms
    ratio = float(np.max(norms)) / float(np.sum(disc.mesh.volumes * norms))
    return 1.0 + abs(math.log(ratio))


def _lambda_min_shape(disc, scaled):
    """The lower bound on lambda_min for C = 1."""
    mesh = disc.mesh
    d = mesh.dim
    n = mesh.n_elements
    d_min = disc.field.d_min
    if not scaled:
        return d_min / n / volume_factor(mesh)
    if d == 1:
        # Vertex-sum form of the 1D bound: sum_j s_j^2 <= 2 sum_K D_K / |K|.
        return d_min / float(np.sum(disc.stiffness_scaling.entries ** 2))
    bound = n ** (-2.0 / d) / diffusion_factor(disc, scaled=True)
    if d == 2:
        bound /= scaled_log_factor(disc)
    return bound


def lambda_min_bound(mesh, field, calibration, scaled=False,
                     discretization=None):
    """Lower bound on lambda_min(A), or on lambda_min(S^-1 A S^-1)."""
    c = _check_calibration(calibration, mesh)
    disc = _discretization(mesh, field, discretization)
    return c * _lambda_min_shape(disc, scaled)


def standard_lambda_min_bound(mesh, field, calibration, discretization=None):
    """The classical lower bound proportional to |K_min|."""
    c = _check_calibration(calibration, mesh)
    k_bar = mesh.measure / mesh.n_elements
    return c * field.d_min / mesh.n_elements * float(mesh.volumes.min()) \
        / k_bar


def _envelope_violation(name, value, lower, upper):
    slack = ENVELOPE_RTOL * max(abs(lower), abs(upper))
    if value < lower - slack:
        return '%s=%.10g below %.10g' % (name, value, lower)
    if value > upper + slack:
        return '%s=%.10g above %.10g' % (name, value, upper)
    return None


class ConditionBoundReport(object):
    """Exact extreme eigenvalues of A, S^-1 A S^-1, B and S^-1 B S^-1 next to
    their estimates."""

    def __init__(self, dim, n_elements, n_interior, exact, exact_scaled,
                 exact_mass, exact_mass_scaled, est_lambda_max,
                 est_lambda_max_scaled, est_lambda_min, est_lambda_min_scaled,
                 est_lambda_min_standard, mass_bounds, factors):
        self.dim = dim
        self.n_elements = n_elements
        self.n_interior = n_interior
        self.exact = exact
        self.exact_scaled = exact_scaled
        self.exact_mass = exact_mass
        self.exact_mass_scaled = exact_mass_scaled
        self.est_lambda_max = est_lambda_max
        self.est_lambda_max_scaled = est_lambda_max_scaled
        self.est_lambda_min = est_lambda_min
        self.est_lambda_min_scaled = est_lambda_min_scaled
        self.est_lambda_min_standard = est_lambda_min_standard
        self.mass_bounds = mass_bounds
        self.factors = factors

    @property
    def est_kappa(self):
        return self.est_lambda_max[1] / self.est_lambda_min

    @property
    def est_kappa_scaled(self):
        return self.est_lambda_max_scaled[1] / self.est_lambda_min_scaled

    @property
    def est_kappa_standard(self):
        return self.est_lambda_max[1] / self.est_lambda_min_standard

    @property
    def lambda_min_bound_holds(self):
        """Whether both calibrated lower bounds are below the exact values.

        The constant is fitted with equality on one mesh, so this is
        reported and not treated as a violation.
        """
        return self.est_lambda_min <= self.exact.lambda_min \
            and self.est_lambda_min_scaled <= self.exact_scaled.lambda_min

    def violations(self):
        """List the exact values outside their two-sided estimates."""
        checks = [
            ('lambda_max', self.exact.lambda_max) + tuple(self.est_lambda_max),
            ('lambda_max_scaled', self.exact_scaled.lambda_max)
            + tuple(self.est_lambda_max_scaled),
            ('kappa_mass', self.exact_mass.kappa)
            + tuple(self.mass_bounds.two_sided),
            ('kappa_mass_scaled', self.exact_mass_scaled.kappa, 1.0,
             self.mass_bounds.scaled_upper),
        ]
        found = [_envelope_violation(*check) for check in checks]
        return [message for message in found if message is not None]

    def as_row(self):
        return {
            'N': self.n_elements,
            'N_vi': self.n_interior,
            'lambda_min': self.exact.lambda_min,
            'lambda_max': self.exact.lambda_max,
            'kappa': self.exact.kappa,
            'lambda_min_scaled': self.exact_scaled.lambda_min,
            'lambda_max_scaled': self.exact_scaled.lambda_max,
            'kappa_scaled': self.exact_scaled.kappa,
            'kappa_mass': self.exact_mass.kappa,
            'kappa_mass_scaled': self.exact_mass_scaled.kappa,
            'est_lambda_min': self.est_lambda_min,
            'est_lambda_max_lower': self.est_lambda_max[0],
            'est_lambda_max_upper': self.est_lambda_max[1],
            'est_kappa': self.est_kappa,
            'est_lambda_min_scaled': self.est_lambda_min_scaled,
            'est_lambda_max_scaled_upper': self.est_lambda_max_scaled[1],
            'est_kappa_scaled': self.est_kappa_scaled,
            'est_kappa_standard': self.est_kappa_standard,
            'est_kappa_mass_lower': self.mass_bounds.two_sided[0],
            'est_kappa_mass_upper': self.mass_bounds.two_sided[1],
            'factor_base': self.factors['base'],
            'factor_diffusion': self.factors['diffusion'],
            'factor_diffusion_scaled': self.factors['diffusion_scaled'],
            'factor_volume': self.factors['volume'],
        }


def condition_bounds(mesh, field, calibration, rel_tol=DEFAULT_TOL,
                     discretization=None):
    """Compute every exact value and estimate for one mesh and field."""
    c = _check_calibration(calibration, mesh)
    disc = _discretization(mesh, field, discretization)
    d = mesh.dim

    exact = extreme_eigenvalues(disc.stiffness, rel_tol)
    exact_scaled = extreme_eigenvalues(disc.scaled_stiffness, rel_tol)
    exact_mass = extreme_eigenvalues(disc.mass, rel_tol)
    exact_mass_scaled = extreme_eigenvalues(disc.scaled_mass, rel_tol)

    factors = {
        'base': mesh.n_elements ** (2.0 / d),
        'diffusion': diffusion_factor(disc),
        'diffusion_scaled': diffusion_factor(disc, scaled=True),
        'volume': volume_factor(mesh),
    }
    report = ConditionBoundReport(
        dim=d, n_elements=mesh.n_elements, n_interior=mesh.n_interior,
        exact=exact, exact_scaled=exact_scaled, exact_mass=exact_mass,
        exact_mass_scaled=exact_mass_scaled,
        est_lambda_max=lambda_max_bounds(disc.stiffness.diagonal(), d),
        est_lambda_max_scaled=lambda_max_bounds(None, d, scaled=True),
        est_lambda_min=c * _lambda_min_shape(disc, scaled=False),
        est_lambda_min_scaled=c * _lambda_min_shape(disc, scaled=True),
        est_lambda_min_standard=standard_lambda_min_bound(
            mesh, disc.field, calibration),
        mass_bounds=mass_condition_bounds(mesh, disc),
        factors=factors)
    logger.debug('N=%d kappa=%.6g (estimate %.6g), scaled kappa=%.6g '
                 '(estimate %.6g)', mesh.n_elements, exact.kappa,
                 report.est_kappa, exact_scaled.kappa, report.est_kappa_scaled)
    return report


def metric_from_field(field, mesh, kind='inverse-diffusion',
                      discretization=None):
    """Per-element metric tensors M_K: the identity or D_K^-1."""
    if kind == 'identity':
        return np.broadcast_to(np.eye(mesh.dim),
                               (mesh.n_elements, mesh.dim, mesh.dim)).copy()
    if kind == 'inverse-diffusion':
        disc = _discretization(mesh, field, discretization)
        return symmetric_part(np.linalg.inv(disc.element_diffusion))
    raise ValueError('Unknown metric kind %r.' % (kind,))


def m_uniform_bound(mesh, field, metric, calibration, discretization=None):
    """Upper bound on kappa(S^-1 A S^-1) for a mesh uniform in the metric.

    `metric` is an (N, d, d) array of SPD tensors, or a kind accepted by
    `metric_from_field`.
    """
    c = _check_calibration(calibration, mesh)
    disc = _discretization(mesh, field, discretization)
    if isinstance(metric, str):
        metric = metric_from_field(field, mesh, metric, disc)
    metric = np.asarray(metric, dtype=float)
    if metric.shape != (mesh.n_elements, mesh.dim, mesh.dim):
        raise ValueError('Need one %dx%d metric tensor per element.'
                         % (mesh.dim, mesh.dim))
    d = mesh.dim
    volumes = mesh.volumes
    sigma = float(np.sum(volumes * np.sqrt(np.linalg.det(metric))))
    product = metric @ disc.element_diffusion
    norms = np.linalg.norm(product, ord=2, axis=(1, 2))
    weighted = float(np.sum(volumes * norms ** (d / 2.0))) ** (2.0 / d)
    return c / field.d_min * (mesh.n_elements / sigma) ** (2.0 / d) * weighted


class SpecialCaseBounds(object):
    """Condition number bounds for particular classes of meshes."""

    def __init__(self, uniform, isotropic, coefficient_adaptive,
                 coefficient_adaptive_unscaled, aligned, diffusion_sum,
                 alignment_sum):
        self.uniform = uniform
        self.isotropic = isotropic
        self.coefficient_adaptive = coefficient_adaptive
        self.coefficient_adaptive_unscaled = coefficient_adaptive_unscaled
        self.aligned = aligned
        self.diffusion_sum = diffusion_sum
        self.alignment_sum = alignment_sum


def special_case_bounds(mesh, field, calibration, discretization=None):
    """Evaluate the reduced bounds valid for uniform, isotropic,
    coefficient-adaptive and D-aligned meshes.

    `diffusion_sum` is sum |K| ||M_K||^(d/2) and `alignment_sum` the
    quality-measure expression d^(d/2) sum Q_ali^(d-1) det(D_K)^(1/2) that
    bounds it from above.
    """
    c = _check_calibration(calibration, mesh)
    disc = _discretization(mesh, field, discretization)
    d = mesh.dim
    n = mesh.n_elements
    d_min = field.d_min
    stats = mesh_statistics(mesh)
    log_factor = volume_factor(mesh) if d == 2 else 1.0
    quality = quality_measures(mesh, field, disc)
    det_root = np.sqrt(np.linalg.det(disc.element_diffusion))

    base = c * n ** (2.0 / d)
    adaptive = c / d_min * (n / quality.sigma_h) ** (2.0 / d)
    return SpecialCaseBounds(
        uniform=base,
        isotropic=base * log_factor,
        coefficient_adaptive=adaptive,
        coefficient_adaptive_unscaled=adaptive * n * stats.omega_max
        * volume_factor(mesh),
        aligned=base / d_min * float(np.mean(det_root)) ** (2.0 / d)
        * log_factor,
        diffusion_sum=float(np.sum(mesh.volumes
                                   * disc.metric_norms ** (d / 2.0))),
        alignment_sum=d ** (d / 2.0)
        * float(np.sum(quality.q_ali ** (d - 1) * det_root)))


def calibrate_constant(family, field, n_ref, rel_tol=DEFAULT_TOL):
    """Fit C so that the scaled lambda_min bound is exact on the reference
    mesh of `family` with `n_ref` subdivisions per axis."""
    if family not in CALIBRATION_FAMILIES:
        raise CalibrationError('Unknown calibration family %r.' % (family,))
    try:
        mesh = generate_uniform_mesh(field.dim, n_ref)
    except ValueError as error:
        raise CalibrationError('Cannot build the reference mesh: %s' % error)
    if mesh.n_interior < MIN_CALIBRATION_UNKNOWNS:
        raise CalibrationError('Reference mesh has %d interior vertices, at '
                               'least %d are needed.'
                               % (mesh.n_interior, MIN_CALIBRATION_UNKNOWNS))
    disc = Discretization(mesh, field)
    exact = extreme_eigenvalues(disc.scaled_stiffness, rel_tol)
    c = exact.lambda_min / _lambda_min_shape(disc, scaled=True)
    logger.info('calibrated C=%.10g in %dD on %s n=%d (N=%d)', c, field.dim,
                family, n_ref, mesh.n_elements)
    return CalibrationConstant(c, field.dim, field=field.spec, n_ref=n_ref,
                               family=family, n_elements=mesh.n_elements)

