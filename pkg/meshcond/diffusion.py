# -*- coding: utf-8 -*-
"""
Symmetric positive definite diffusion tensor fields D(x).

Three closed-form kinds are supported: the identity, a constant SPD matrix,
and the 2D anisotropic field rotated by the angle psi(x, y) = pi sin x cos y.
"""
import numpy as np

from meshcond.utils import format_float, parse_numbers


IDENTITY = 'identity'
CONSTANT = 'const'
ROTATED = 'rotated'

DEFAULT_ROTATED_EIGENVALUES = (1000.0, 1.0)
SYMMETRY_RTOL = 1e-14


class FieldError(ValueError):
    pass


def _check_spd(matrix, what='Diffusion matrix'):
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] \
            or matrix.shape[0] not in (1, 2, 3):
        raise FieldError('%s must be a square d x d matrix, d in 1..3.' % what)
    if not np.all(np.isfinite(matrix)):
        raise FieldError('%s must be finite.' % what)
    scale = np.max(np.abs(matrix))
    if np.max(np.abs(matrix - matrix.T)) > SYMMETRY_RTOL * scale:
        raise FieldError('%s is not symmetric.' % what)
    if np.linalg.eigvalsh(matrix)[0] <= 0.0:
        raise FieldError('%s is not positive definite.' % what)
    return 0.5 * (matrix + matrix.T)


class DiffusionField(object):
    """A closed-form SPD tensor field on the unit domain.

    Build instances with `identity`, `constant` or `rotated`; the object is
    immutable once created.
    """

    def __init__(self, dim, kind, matrix=None, eigenvalues=None):
        if dim not in (1, 2, 3):
            raise FieldError('Dimension must be 1, 2 or 3, got %r.' % (dim,))
        if kind not in (IDENTITY, CONSTANT, ROTATED):
            raise FieldError('Unknown field kind %r.' % (kind,))
        if kind == CONSTANT:
            matrix = _check_spd(matrix)
            if matrix.shape[0] != dim:
                raise FieldError('Constant field of dimension %d given a '
                                 '%dx%d matrix.' % ((dim,) + matrix.shape))
            matrix.setflags(write=False)
        if kind == ROTATED:
            if dim != 2:
                raise FieldError('The rotated field is two-dimensional.')
            eigenvalues = tuple(float(x) for x in eigenvalues)
            if len(eigenvalues) != 2 or not all(
                    np.isfinite(x) and x > 0.0 for x in eigenvalues):
                raise FieldError('The rotated field needs two positive '
                                 'eigenvalues, got %r.' % (eigenvalues,))
        self._dim = dim
        self._kind = kind
        self._matrix = matrix
        self._eigenvalues = eigenvalues

    @classmethod
    def identity(cls, dim):
        return cls(dim, IDENTITY)

    @classmethod
    def constant(cls, matrix):
        matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        return cls(matrix.shape[0], CONSTANT, matrix=matrix)

    @classmethod
    def rotated(cls, lambda1=DEFAULT_ROTATED_EIGENVALUES[0],
                lambda2=DEFAULT_ROTATED_EIGENVALUES[1]):
        return cls(2, ROTATED, eigenvalues=(lambda1, lambda2))

    def __repr__(self):
        return '<DiffusionField %s dim=%d>' % (self.spec, self._dim)

    def __eq__(self, other):
        return isinstance(other, DiffusionField) and self.spec == other.spec \
            and self._dim == other._dim

    def __hash__(self):
        return hash((self._dim, self.spec))

    @property
    def dim(self):
        return self._dim

    @property
    def kind(self):
        return self._kind

    @property
    def is_constant(self):
        return self._kind != ROTATED

    @property
    def spec(self):
        """The field as a command line string (see `parse_field`)."""
        if self._kind == IDENTITY:
            return IDENTITY
        if self._kind == CONSTANT:
            values = self._matrix.ravel()
        else:
            values = self._eigenvalues
        return '%s:%s' % (self._kind,
                          ','.join(format_float(x) for x in values))

    @property
    def d_min(self):
        return self.spectral_bounds()[0]

    @property
    def d_max(self):
        return self.spectral_bounds()[1]

    def spectral_bounds(self):
        if self._kind == IDENTITY:
            return 1.0, 1.0
        if self._kind == CONSTANT:
            values = np.linalg.eigvalsh(self._matrix)
            return float(values[0]), float(values[-1])
        return min(self._eigenvalues), max(self._eigenvalues)

    def evaluate(self, points):
        """Evaluate D at an (M, d) array of points, returns (M, d, d)."""
        points = np.asarray(points, dtype=float).reshape(-1, self._dim)
        count = points.shape[0]
        if self._kind == IDENTITY:
            return np.broadcast_to(np.eye(self._dim),
                                   (count, self._dim, self._dim)).copy()
        if self._kind == CONSTANT:
            return np.broadcast_to(self._matrix,
                                   (count, self._dim, self._dim)).copy()
        psi = np.pi * np.sin(points[:, 0]) * np.cos(points[:, 1])
        c, s = np.cos(psi), np.sin(psi)
        l1, l2 = self._eigenvalues
        values = np.empty((count, 2, 2))
        values[:, 0, 0] = l1 * c * c + l2 * s * s
        values[:, 1, 1] = l1 * s * s + l2 * c * c
        values[:, 0, 1] = values[:, 1, 0] = (l1 - l2) * c * s
        return values


class ElementDiffusion(object):
    """The average D_K of the diffusion field over one element."""

    def __init__(self, matrix):
        self.matrix = matrix

    @property
    def determinant(self):
        return float(np.linalg.det(self.matrix))


def evaluate_field(field, x):
    x = np.asarray(x, dtype=float).ravel()
    if x.size != field.dim:
        raise FieldError('Point of dimension %d for a field of dimension %d.'
                         % (x.size, field.dim))
    if not np.all(np.isfinite(x)):
        raise FieldError('Cannot evaluate the field at a non-finite point.')
    return field.evaluate(x)[0]


def _check_mesh(field, mesh):
    if field.dim != mesh.dim:
        raise FieldError('Field of dimension %d on a mesh of dimension %d.'
                         % (field.dim, mesh.dim))


def element_averages(field, mesh):
    """D_K for every element, as an (N, d, d) array.

    The average is the one-point (barycenter) quadrature, exact for the
    constant kinds.
    """
    _check_mesh(field, mesh)
    if field.is_constant:
        return field.evaluate(np.zeros((mesh.n_elements, mesh.dim)))
    barycenters = mesh.vertices[mesh.elements].mean(axis=1)
    values = field.evaluate(barycenters)
    smallest = np.linalg.eigvalsh(values)[:, 0]
    bad = np.flatnonzero(smallest <= 0.0)
    if bad.size:
        raise FieldError('Diffusion average on element %d is not positive '
                         'definite.' % bad[0])
    return values


def element_average(field, mesh, k):
    _check_mesh(field, mesh)
    if not 0 <= k < mesh.n_elements:
        raise FieldError('Element index %r out of range.' % (k,))
    barycenter = mesh.vertices[mesh.elements[k]].mean(axis=0)
    return ElementDiffusion(_check_spd(field.evaluate(barycenter)[0],
                                       'Diffusion average on element %d' % k))


def field_spectral_bounds(field, mesh=None):
    """Return (d_min, d_max) of the field over the domain."""
    if mesh is not None:
        _check_mesh(field, mesh)
    return field.spectral_bounds()


def parse_field(text, dim=None):
    """Build a DiffusionField from `identity`, `const:<m11>,<m12>,...` or
    `rotated:<l1>,<l2>`.

    `identity` needs `dim`; for the other kinds `dim` is checked if given.
    """
    kind, sep, arguments = text.strip().partition(':')
    try:
        values = parse_numbers(arguments) if sep else []
    except ValueError as error:
        raise FieldError('Bad field "%s": %s' % (text, error))

    if kind == IDENTITY and not sep:
        if dim is None:
            raise FieldError('The identity field needs a dimension.')
        field = DiffusionField.identity(dim)
    elif kind == CONSTANT and sep:
        order = int(round(len(values) ** 0.5))
        if order * order != len(values) or order not in (1, 2, 3):
            raise FieldError('Bad field "%s": expected 1, 4 or 9 entries.'
                             % text)
        field = DiffusionField.constant(np.reshape(values, (order, order)))
    elif kind == ROTATED:
        if not sep:
            values = list(DEFAULT_ROTATED_EIGENVALUES)
        if len(values) != 2:
            raise FieldError('Bad field "%s": expected two eigenvalues.'
                             % text)
        field = DiffusionField.rotated(*values)
    else:
        raise FieldError('Unknown field "%s".' % text)

    if dim is not None and field.dim != dim:
        raise FieldError('Field "%s" has dimension %d, expected %d.'
                         % (text, field.dim, dim))
    return field
