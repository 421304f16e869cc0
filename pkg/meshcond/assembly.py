# -*- coding: utf-8 -*-
"""
Assembly of the stiffness and mass matrices of linear finite elements, and
symmetric diagonal scalings.

Matrices are indexed by the interior vertices only (in increasing vertex
order); the Dirichlet rows and columns are never assembled.
"""
import numpy as np
from scipy import sparse

from meshcond.diffusion import element_averages
from meshcond.mesh import DegenerateElementError
from meshcond.utils import format_float, spectral_norms, symmetric_part


MATRIX_MAGIC = '%%sym'


class AssemblyError(ValueError):
    pass


class SymmetricMatrix(object):
    """A sparse symmetric matrix stored as compressed rows of the full
    pattern."""

    def __init__(self, matrix):
        matrix = sparse.csr_matrix(matrix, dtype=float)
        if matrix.shape[0] != matrix.shape[1]:
            raise AssemblyError('A symmetric matrix must be square.')
        matrix.sum_duplicates()
        matrix.sort_indices()
        self._matrix = matrix

    def __repr__(self):
        return '<SymmetricMatrix order=%d nnz=%d>' % (self.order,
                                                      self._matrix.nnz)

    @property
    def order(self):
        return self._matrix.shape[0]

    @property
    def indptr(self):
        return self._matrix.indptr

    @property
    def indices(self):
        return self._matrix.indices

    @property
    def data(self):
        return self._matrix.data

    @property
    def nnz(self):
        return self._matrix.nnz

    def diagonal(self):
        return self._matrix.diagonal()

    def tocsr(self):
        return self._matrix

    def toarray(self):
        return self._matrix.toarray()

    def __matmul__(self, vector):
        return self._matrix @ vector

    def row_sums(self):
        return np.asarray(self._matrix.sum(axis=1)).ravel()

    def as_text(self):
        """Coordinate text, `%%sym n nnz` then `i j value` with i <= j."""
        upper = sparse.triu(self._matrix, format='coo')
        lines = ['%s %d %d' % (MATRIX_MAGIC, self.order, upper.nnz)]
        for i, j, value in zip(upper.row, upper.col, upper.data):
            lines.append('%d %d %s' % (i, j, format_float(value)))
        return '\n'.join(lines) + '\n'

    def dump(self, path):
        with open(path, 'w') as f:
            f.write(self.as_text())


def parse_matrix(text):
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise AssemblyError('Empty matrix text.')
    header = lines[0].split()
    try:
        if len(header) != 3 or header[0] != MATRIX_MAGIC:
            raise ValueError
        order, nnz = int(header[1]), int(header[2])
    except ValueError:
        raise AssemblyError('Malformed matrix header "%s".' % lines[0])
    if len(lines) != nnz + 1:
        raise AssemblyError('Expected %d entries, found %d.'
                            % (nnz, len(lines) - 1))
    rows = np.empty(nnz, dtype=np.intp)
    cols = np.empty(nnz, dtype=np.intp)
    values = np.empty(nnz)
    for k, line in enumerate(lines[1:]):
        fields = line.split()
        try:
            rows[k], cols[k], values[k] = int(fields[0]), int(fields[1]), \
                float(fields[2])
        except (IndexError, ValueError):
            raise AssemblyError('Malformed matrix entry "%s".' % line)
        if not 0 <= rows[k] <= cols[k] < order:
            raise AssemblyError('Matrix entry "%s" is not in the upper '
                                'triangle.' % line)
    upper = sparse.coo_matrix((values, (rows, cols)), shape=(order, order))
    strict = sparse.triu(upper, k=1)
    return SymmetricMatrix(upper + strict.T)


def load_matrix(path):
    with open(path, 'r') as f:
        return parse_matrix(f.read())


class DiagonalScaling(object):
    """The diagonal matrix S of a symmetric scaling S^-1 M S^-1."""

    def __init__(self, entries):
        entries = np.array(entries, dtype=float).ravel()
        if not np.all(np.isfinite(entries)) or np.any(entries <= 0.0):
            raise AssemblyError('Scaling entries must be positive and '
                                'finite.')
        entries.setflags(write=False)
        self._entries = entries

    @classmethod
    def identity(cls, order):
        return cls(np.ones(order))

    @property
    def entries(self):
        return self._entries

    def __len__(self):
        return self._entries.size


def _check_geometry(mesh):
    try:
        mesh.check_elements()
    except DegenerateElementError as error:
        raise AssemblyError('Cannot assemble: element %d is degenerate.'
                            % error.element)


def _assemble(mesh, local):
    """Sum (N, d+1, d+1) element matrices into the interior-only matrix."""
    index = mesh.interior_index[mesh.elements]
    size = index.shape[1]
    rows = np.repeat(index, size, axis=1).ravel()
    cols = np.tile(index, (1, size)).ravel()
    data = local.reshape(-1)
    keep = (rows >= 0) & (cols >= 0)
    order = mesh.n_interior
    matrix = sparse.coo_matrix((data[keep], (rows[keep], cols[keep])),
                               shape=(order, order))
    return SymmetricMatrix(matrix.tocsr())


def transformed_diffusion(mesh, averages):
    """Per-element M_K = (F'_K)^-1 D_K (F'_K)^-T, shape (N, d, d).

    This is the matrix acting between reference gradients in the stiffness
    entries, so |K| grad_i . D_K grad_j = |K| g_i . M_K g_j.
    """
    _check_geometry(mesh)
    inverse = np.linalg.inv(mesh.jacobians)
    return symmetric_part(
        inverse @ averages @ np.swapaxes(inverse, -1, -2))


def assemble_stiffness(mesh, field):
    _check_geometry(mesh)
    averages = element_averages(field, mesh)
    gradients = mesh.gradients
    local = np.einsum('kia,kab,kjb->kij', gradients, averages, gradients)
    local = symmetric_part(local) * mesh.volumes[:, None, None]
    return _assemble(mesh, local)


def _mass_element(dim):
    return (np.ones((dim + 1, dim + 1)) + np.eye(dim + 1)) \
        / ((dim + 1) * (dim + 2))


def assemble_mass(mesh):
    _check_geometry(mesh)
    local = mesh.volumes[:, None, None] * _mass_element(mesh.dim)[None]
    return _assemble(mesh, local)


def assemble_lumped_mass(mesh):
    """Diagonal (row-sum) mass matrix, entries |omega_j| / (d+1)."""
    _check_geometry(mesh)
    lumped = mesh.patch_volumes[mesh.interior] / (mesh.dim + 1)
    return SymmetricMatrix(sparse.diags(lumped, format='csr'))


def jacobi_scaling(matrix):
    """S with s_j = sqrt(M_jj)."""
    diagonal = matrix.diagonal()
    bad = np.flatnonzero(~(diagonal > 0.0))
    if bad.size:
        raise AssemblyError('Diagonal entry %d is not positive (%r).'
                            % (bad[0], diagonal[bad[0]]))
    return DiagonalScaling(np.sqrt(diagonal))


def patch_sums(mesh, values):
    """Sum per-element values over the patch of every interior vertex."""
    return mesh.incidence[mesh.interior] @ values


def alt_scaling(mesh, field):
    """S with s_j^2 = sum over the patch of |K| ||M_K||_2."""
    norms = spectral_norms(transformed_diffusion(mesh,
                                                 element_averages(field, mesh)))
    return DiagonalScaling(np.sqrt(patch_sums(mesh, mesh.volumes * norms)))


def apply_symmetric_scaling(matrix, scaling):
    """Return S^-1 M S^-1."""
    if len(scaling) != matrix.order:
        raise AssemblyError('Scaling of order %d for a matrix of order %d.'
                            % (len(scaling), matrix.order))
    csr = matrix.tocsr()
    s = scaling.entries
    rows = np.repeat(np.arange(matrix.order), np.diff(csr.indptr))
    data = csr.data / (s[rows] * s[csr.indices])
    return SymmetricMatrix(sparse.csr_matrix(
        (data, csr.indices.copy(), csr.indptr.copy()), shape=csr.shape))


class Discretization(object):
    """Matrices of one mesh and diffusion field, assembled on first use."""

    def __init__(self, mesh, field):
        self.mesh = mesh
        self.field = field
        self._cache = {}

    def _cached(self, key, compute):
        if key not in self._cache:
            self._cache[key] = compute()
        return self._cache[key]

    @property
    def element_diffusion(self):
        return self._cached('averages',
                            lambda: element_averages(self.field, self.mesh))

    @property
    def metric_matrices(self):
        return self._cached('metric', lambda: transformed_diffusion(
            self.mesh, self.element_diffusion))

    @property
    def metric_norms(self):
        return self._cached('norms',
                            lambda: spectral_norms(self.metric_matrices))

    @property
    def stiffness(self):
        return self._cached('stiffness', lambda: assemble_stiffness(
            self.mesh, self.field))

    @property
    def mass(self):
        return self._cached('mass', lambda: assemble_mass(self.mesh))

    @property
    def stiffness_scaling(self):
        return self._cached('stiffness_scaling',
                            lambda: jacobi_scaling(self.stiffness))

    @property
    def mass_scaling(self):
        return self._cached('mass_scaling', lambda: jacobi_scaling(self.mass))

    @property
    def scaled_stiffness(self):
        return self._cached('scaled_stiffness', lambda: apply_symmetric_scaling(
            self.stiffness, self.stiffness_scaling))

    @property
    def scaled_mass(self):
        return self._cached('scaled_mass', lambda: apply_symmetric_scaling(
            self.mass, self.mass_scaling))
