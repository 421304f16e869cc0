# -*- coding: utf-8 -*-
"""
Simplicial meshes of the unit interval, square and cube.

A mesh is made of vertices (coordinates), elements (d+1 vertex indices each)
and one boundary flag per vertex. Only interior vertices carry unknowns: the
Dirichlet vertices never enter the assembled matrices.

The affine map of an element K starts from the regular reference simplex of
unit volume, so that |K| = |det F'_K|.
"""
import functools
import itertools
import math
import warnings

import numpy as np
from scipy import sparse

from meshcond.utils import format_float


FORMAT_MAGIC = 'meshcond'
FORMAT_VERSION = 'v1'

# An element is degenerate when its volume is below this fraction of the
# volume of the regular simplex built on its longest edge.
DEGENERATE_RTOL = 1e-13


class MeshError(ValueError):
    pass


class DegenerateElementError(MeshError):

    def __init__(self, element, message=None):
        self.element = element
        if message is None:
            message = 'Element %d is degenerate (zero volume).' % element
        super(DegenerateElementError, self).__init__(message)


class MeshFormatError(MeshError):

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = 'line %d: %s' % (lineno, message)
        super(MeshFormatError, self).__init__(message)


@functools.lru_cache(maxsize=None)
def reference_simplex(dim):
    """Return the (d+1, d) vertices of the regular simplex of unit volume.

    The first vertex is the origin. Edge vectors are the columns of the
    Cholesky factor of the Gram matrix of a regular simplex, then the whole
    simplex is scaled to unit volume.
    """
    if dim < 1:
        raise MeshError('Dimension must be positive, got %r.' % dim)
    gram = np.full((dim, dim), 0.5) + 0.5 * np.eye(dim)
    edges = np.linalg.cholesky(gram).T
    volume = abs(np.linalg.det(edges)) / math.factorial(dim)
    edges = edges / volume ** (1.0 / dim)
    vertices = np.vstack([np.zeros(dim), edges.T])
    vertices.setflags(write=False)
    return vertices


@functools.lru_cache(maxsize=None)
def reference_gradient_constant(dim):
    """Return C_phi, the largest squared norm of a reference basis gradient.

    It equals 1 in 1D, 1/sqrt(3) in 2D and about 0.3600 in 3D.
    """
    gradients = _barycentric_gradients(
        _edge_matrices(reference_simplex(dim),
                       np.arange(dim + 1)[None, :]))
    return float(np.max(np.sum(gradients ** 2, axis=-1)))


def _edge_matrices(vertices, elements):
    """Return the (N, d, d) matrices whose columns are x_i - x_0."""
    points = vertices[elements]
    return np.swapaxes(points[:, 1:, :] - points[:, :1, :], 1, 2)


def _barycentric_gradients(edges):
    """Return the (N, d+1, d) gradients of the element basis functions."""
    inverse = np.linalg.inv(edges)
    gradients = np.empty((edges.shape[0], edges.shape[1] + 1, edges.shape[1]))
    gradients[:, 1:, :] = inverse
    gradients[:, 0, :] = -inverse.sum(axis=1)
    return gradients


def _read_only(array):
    array.setflags(write=False)
    return array


class SimplicialMesh(object):
    """Represent a conforming simplicial mesh in 1, 2 or 3 dimensions.

    The mesh is immutable: all arrays are read-only, and derived geometric
    quantities are computed once, on first access.
    """

    def __init__(self, vertices, elements, boundary):
        vertices = np.array(vertices, dtype=float)
        if vertices.ndim == 1:
            vertices = vertices[:, None]
        elements = np.array(elements, dtype=np.intp)
        boundary = np.array(boundary, dtype=bool)

        if vertices.ndim != 2 or vertices.shape[1] not in (1, 2, 3):
            raise MeshError('Vertices must be an (Nv, d) array, d in 1..3.')
        dim = vertices.shape[1]
        if elements.ndim != 2 or elements.shape[1] != dim + 1:
            raise MeshError('Elements must be an (N, %d) array.' % (dim + 1))
        if boundary.shape != (vertices.shape[0],):
            raise MeshError('One boundary flag per vertex is required.')
        if not np.all(np.isfinite(vertices)):
            raise MeshError('Vertex coordinates must be finite.')
        if elements.size and (elements.min() < 0 or
                              elements.max() >= vertices.shape[0]):
            raise MeshError('Element vertex index out of range.')

        used = np.zeros(vertices.shape[0], dtype=bool)
        used[elements.ravel()] = True
        orphans = np.flatnonzero(~boundary & ~used)
        if orphans.size:
            raise MeshError('Interior vertex %d belongs to no element.'
                            % orphans[0])

        self._vertices = _read_only(vertices)
        self._elements = _read_only(elements)
        self._boundary = _read_only(boundary)
        self._cache = {}

    def __repr__(self):
        return '<SimplicialMesh dim=%d nv=%d ne=%d>' % (
            self.dim, self.n_vertices, self.n_elements)

    def _cached(self, key, compute):
        if key not in self._cache:
            value = compute()
            if isinstance(value, np.ndarray):
                value.setflags(write=False)
            self._cache[key] = value
        return self._cache[key]

    @property
    def dim(self):
        return self._vertices.shape[1]

    @property
    def vertices(self):
        return self._vertices

    @property
    def elements(self):
        return self._elements

    @property
    def boundary(self):
        return self._boundary

    @property
    def n_vertices(self):
        return self._vertices.shape[0]

    @property
    def n_elements(self):
        return self._elements.shape[0]

    @property
    def interior(self):
        """Indices of the interior vertices, in increasing order."""
        return self._cached('interior',
                            lambda: np.flatnonzero(~self._boundary))

    @property
    def n_interior(self):
        return self.interior.size

    @property
    def interior_index(self):
        """Map a vertex index to its unknown number, -1 for boundary ones."""
        def compute():
            index = np.full(self.n_vertices, -1, dtype=np.intp)
            index[self.interior] = np.arange(self.n_interior)
            return index
        return self._cached('interior_index', compute)

    @property
    def edge_matrices(self):
        return self._cached(
            'edges', lambda: _edge_matrices(self._vertices, self._elements))

    @property
    def signed_volumes(self):
        return self._cached(
            'signed_volumes',
            lambda: np.linalg.det(self.edge_matrices)
            / math.factorial(self.dim))

    @property
    def volumes(self):
        return self._cached('volumes', lambda: np.abs(self.signed_volumes))

    @property
    def measure(self):
        """|Omega|, the sum of the element volumes."""
        return float(np.sum(self.volumes))

    @property
    def diameters(self):
        """Longest edge of each element (h_K)."""
        def compute():
            points = self._vertices[self._elements]
            lengths = [np.linalg.norm(points[:, i] - points[:, j], axis=-1)
                       for i, j in itertools.combinations(range(self.dim + 1),
                                                          2)]
            return np.max(lengths, axis=0)
        return self._cached('diameters', compute)

    @property
    def jacobians(self):
        """F'_K, mapping the regular unit-volume reference simplex onto K."""
        def compute():
            self.check_elements()
            reference = _edge_matrices(
                reference_simplex(self.dim),
                np.arange(self.dim + 1)[None, :])[0]
            return self.edge_matrices @ np.linalg.inv(reference)
        return self._cached('jacobians', compute)

    @property
    def gradients(self):
        """Gradients of the d+1 local basis functions, shape (N, d+1, d)."""
        def compute():
            self.check_elements()
            return _barycentric_gradients(self.edge_matrices)
        return self._cached('gradients', compute)

    @property
    def in_diameters(self):
        """Diameter of the inscribed ball, 2 / sum_i |grad phi_i|."""
        return self._cached(
            'in_diameters',
            lambda: 2.0 / np.sum(np.linalg.norm(self.gradients, axis=-1),
                                 axis=-1))

    @property
    def incidence(self):
        """Sparse (Nv, N) vertex-element incidence matrix."""
        def compute():
            rows = self._elements.ravel()
            cols = np.repeat(np.arange(self.n_elements), self.dim + 1)
            data = np.ones(rows.size)
            return sparse.csr_matrix((data, (rows, cols)),
                                     shape=(self.n_vertices, self.n_elements))
        return self._cached('incidence', compute)

    @property
    def patch_volumes(self):
        """|omega_j| for every vertex."""
        return self._cached('patch_volumes',
                            lambda: self.incidence @ self.volumes)

    @property
    def patch_sizes(self):
        """Number of elements having each vertex."""
        return self._cached(
            'patch_sizes',
            lambda: np.bincount(self._elements.ravel(),
                                minlength=self.n_vertices))

    def check_elements(self):
        """Raise DegenerateElementError for the first zero-volume element."""
        def compute():
            regular = self.diameters ** self.dim * math.sqrt(self.dim + 1) \
                / (math.factorial(self.dim) * 2 ** (self.dim / 2.0))
            bad = np.flatnonzero(self.volumes <= DEGENERATE_RTOL * regular)
            return int(bad[0]) if bad.size else -1
        first = self._cached('first_degenerate', compute)
        if first >= 0:
            raise DegenerateElementError(first)

    def as_text(self):
        """Return the mesh in the plain text `meshcond v1` format."""
        lines = ['%s %s dim=%d nv=%d ne=%d' % (
            FORMAT_MAGIC, FORMAT_VERSION,
            self.dim, self.n_vertices, self.n_elements)]
        for point, flag in zip(self._vertices, self._boundary):
            lines.append(' '.join([format_float(x) for x in point]
                                  + ['1' if flag else '0']))
        for element in self._elements:
            lines.append(' '.join('%d' % i for i in element))
        return '\n'.join(lines) + '\n'


class ElementGeometry(object):
    """Geometry of one element: affine map, volume and size measures.

    Two shape ratios are available. `aspect` is h_bar_K / h_min,K, the
    average size over the in-diameter. `elongation` is h_K / h_min,K, the
    longest edge over the in-diameter; the `aspect` argument of the skew
    generators sets this second ratio for the thin elements (about `aspect`
    in 2D, within a factor 2 of it in 3D), while their `aspect` property
    only grows like its square root.
    """

    def __init__(self, jacobian, volume, in_diameter, diameter):
        self.jacobian = jacobian
        self.volume = volume
        self.in_diameter = in_diameter
        self.diameter = diameter
        self.avg_size = volume ** (1.0 / jacobian.shape[0])

    @property
    def aspect(self):
        """Average size over in-diameter, h_bar_K / h_min,K."""
        return self.avg_size / self.in_diameter

    @property
    def elongation(self):
        """Longest edge over in-diameter, h_K / h_min,K."""
        return self.diameter / self.in_diameter


def element_geometry(mesh, k):
    if not 0 <= k < mesh.n_elements:
        raise MeshError('Element index %r out of range.' % (k,))
    if mesh.volumes[k] <= 0.0:
        raise DegenerateElementError(k)
    try:
        mesh.check_elements()
    except DegenerateElementError as error:
        if error.element == k:
            raise
        # Another element is degenerate: compute this one on its own.
        single = SimplicialMesh(mesh.vertices, mesh.elements[k:k + 1],
                                np.ones(mesh.n_vertices, dtype=bool))
        return element_geometry(single, 0)
    return ElementGeometry(jacobian=mesh.jacobians[k].copy(),
                           volume=float(mesh.volumes[k]),
                           in_diameter=float(mesh.in_diameters[k]),
                           diameter=float(mesh.diameters[k]))


class VertexPatch(object):
    """The elements sharing an interior vertex, and their total volume."""

    def __init__(self, vertex, elements, volume):
        self.vertex = vertex
        self.elements = elements
        self.volume = volume

    def __repr__(self):
        return '<VertexPatch vertex=%d elements=%d volume=%r>' % (
            self.vertex, len(self.elements), self.volume)


def vertex_patches(mesh):
    """Return the list of VertexPatch of the interior vertices."""
    incidence = mesh.incidence.tocsr()
    patches = []
    for j in mesh.interior:
        start, stop = incidence.indptr[j], incidence.indptr[j + 1]
        elements = np.sort(incidence.indices[start:stop])
        patches.append(VertexPatch(int(j), elements.tolist(),
                                   float(mesh.patch_volumes[j])))
    return patches


class MeshStatistics(object):
    """Element and patch volume statistics of a mesh."""

    def __init__(self, n_elements, n_interior, k_min, k_max, k_bar,
                 omega_min, omega_max, p_max, h_ratio):
        self.n_elements = n_elements
        self.n_interior = n_interior
        self.k_min = k_min
        self.k_max = k_max
        self.k_bar = k_bar
        self.omega_min = omega_min
        self.omega_max = omega_max
        self.p_max = p_max
        self.h_ratio = h_ratio


def mesh_statistics(mesh):
    volumes = mesh.volumes
    interior = mesh.interior
    if interior.size:
        omegas = mesh.patch_volumes[interior]
        omega_min, omega_max = float(omegas.min()), float(omegas.max())
        p_max = int(mesh.patch_sizes[interior].max())
    else:
        omega_min = omega_max = float('nan')
        p_max = 0
    diameters = mesh.diameters
    return MeshStatistics(n_elements=mesh.n_elements,
                          n_interior=mesh.n_interior,
                          k_min=float(volumes.min()),
                          k_max=float(volumes.max()),
                          k_bar=mesh.measure / mesh.n_elements,
                          omega_min=omega_min,
                          omega_max=omega_max,
                          p_max=p_max,
                          h_ratio=float(diameters.max() / diameters.min()))


def _kuhn_paths(dim):
    """Corner offsets of the d! simplices of the Kuhn split of a unit cell."""
    paths = []
    for permutation in itertools.permutations(range(dim)):
        offset = [0] * dim
        path = [tuple(offset)]
        for axis in permutation:
            offset[axis] = 1
            path.append(tuple(offset))
        paths.append(path)
    return paths


def _orient(vertices, elements):
    """Swap two vertices of each negatively oriented element."""
    elements = elements.copy()
    negative = np.linalg.det(_edge_matrices(vertices, elements)) < 0.0
    elements[negative, -2:] = elements[negative, -2:][:, ::-1]
    return elements


def tensor_mesh(axes):
    """Build the Kuhn triangulation of the grid given by per-axis nodes.

    `axes` is a list of d strictly increasing coordinate arrays; each grid
    cell is split into d! simplices sharing its main diagonal. Vertices are
    numbered with the first axis running fastest.
    """
    axes = [np.asarray(axis, dtype=float) for axis in axes]
    for axis in axes:
        if axis.size < 2 or np.any(np.diff(axis) <= 0.0):
            raise MeshError('Grid nodes must be strictly increasing.')
    shape = tuple(axis.size for axis in axes)
    grids = np.meshgrid(*axes, indexing='ij')
    vertices = np.stack([grid.ravel(order='F') for grid in grids], axis=1)
    index = np.arange(vertices.shape[0]).reshape(shape, order='F')

    boundary = np.zeros(shape, dtype=bool)
    for axis in range(len(shape)):
        lower = [slice(None)] * len(shape)
        upper = [slice(None)] * len(shape)
        lower[axis], upper[axis] = 0, -1
        boundary[tuple(lower)] = True
        boundary[tuple(upper)] = True

    def corner(offset):
        window = tuple(slice(o, o + size - 1) for o, size in zip(offset, shape))
        return index[window].ravel(order='F')

    blocks = []
    for path in _kuhn_paths(len(shape)):
        blocks.append(np.stack([corner(offset) for offset in path], axis=1))
    elements = np.concatenate(blocks, axis=0)
    return SimplicialMesh(vertices, _orient(vertices, elements),
                          boundary.ravel(order='F'))


def _check_subdivisions(n, minimum):
    if int(n) != n or n < minimum:
        raise MeshError('Number of subdivisions must be an integer >= %d, '
                        'got %r.' % (minimum, n))
    return int(n)


def _check_aspect(aspect):
    if not math.isfinite(aspect) or aspect < 1.0:
        raise MeshError('Aspect ratio must be finite and >= 1, got %r.'
                        % (aspect,))
    return float(aspect)


def generate_uniform_mesh(dim, n):
    """Triangulate the unit interval, square or cube with n cells per axis.

    In 2D each cell is split in 2 triangles, in 3D in 6 tetrahedra.
    """
    if dim not in (1, 2, 3):
        raise MeshError('Dimension must be 1, 2 or 3, got %r.' % (dim,))
    n = _check_subdivisions(n, 2)
    return tensor_mesh([np.linspace(0.0, 1.0, n + 1)] * dim)


def chebyshev_nodes(n):
    """Interior nodes x_i = (1 - cos((2i-1) pi / (2(N-1)))) / 2, i=1..N-1."""
    i = np.arange(1, n)
    return 0.5 * (1.0 - np.cos((2 * i - 1) * np.pi / (2.0 * (n - 1))))


def generate_chebyshev_mesh(n):
    """Mesh of [0, 1] with N elements built on Chebyshev nodes."""
    n = _check_subdivisions(n, 3)
    nodes = np.concatenate([[0.0], chebyshev_nodes(n), [1.0]])
    return tensor_mesh([nodes])


def _skew_axis(n, aspect):
    """Uniform nodes on [0, 1] with the node nearest 0.5 moved down so that
    the cell below it has height (1/n)/aspect."""
    nodes = np.linspace(0.0, 1.0, n + 1)
    k = min(max(int(round(0.5 * n)), 1), n - 1)
    nodes[k] = nodes[k - 1] + (1.0 / n) / aspect
    if not nodes[k - 1] < nodes[k] < nodes[k + 1]:
        raise MeshError('Aspect ratio %r moves grid line %d across its '
                        'neighbours.' % (aspect, k))
    return nodes


def generate_skew_mesh_2d(n, aspect):
    """Unit square mesh with one row of 2n thin triangles near y = 0.5.

    The thin triangles have an `elongation` close to `aspect`.
    """
    n = _check_subdivisions(n, 4)
    aspect = _check_aspect(aspect)
    uniform = np.linspace(0.0, 1.0, n + 1)
    return tensor_mesh([uniform, _skew_axis(n, aspect)])


def generate_skew_mesh_3d(n, aspect):
    """Unit cube mesh with one layer of 6n^2 thin tetrahedra near z = 0.5.

    The thin tetrahedra have an `elongation` within a factor 2 of `aspect`.
    """
    n = _check_subdivisions(n, 4)
    aspect = _check_aspect(aspect)
    uniform = np.linspace(0.0, 1.0, n + 1)
    return tensor_mesh([uniform, uniform, _skew_axis(n, aspect)])


def _parse_header(line):
    fields = line.split()
    if len(fields) != 5 or fields[0] != FORMAT_MAGIC \
            or fields[1] != FORMAT_VERSION:
        raise MeshFormatError('malformed header "%s"' % line.strip(), 1)
    values = {}
    for field in fields[2:]:
        key, sep, value = field.partition('=')
        if not sep or key not in ('dim', 'nv', 'ne') or key in values:
            raise MeshFormatError('malformed header "%s"' % line.strip(), 1)
        try:
            values[key] = int(value)
        except ValueError:
            raise MeshFormatError('malformed header "%s"' % line.strip(), 1)
    if values['dim'] not in (1, 2, 3) or values['nv'] < 0 or values['ne'] < 0:
        raise MeshFormatError('malformed header "%s"' % line.strip(), 1)
    return values['dim'], values['nv'], values['ne']


def parse_mesh(text):
    """Inspect a `meshcond v1` text and return a SimplicialMesh."""
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise MeshFormatError('missing header', 1)
    dim, nv, ne = _parse_header(lines[0])
    if len(lines) < 1 + nv + ne:
        raise MeshFormatError('expected %d vertex and %d element lines, '
                              'file ends early' % (nv, ne), len(lines) + 1)
    extra = [i for i in range(1 + nv + ne, len(lines)) if lines[i].strip()]
    if extra:
        raise MeshFormatError('unexpected content after the elements',
                              extra[0] + 1)

    vertices = np.empty((nv, dim))
    boundary = np.empty(nv, dtype=bool)
    for i in range(nv):
        lineno = i + 2
        fields = lines[i + 1].split()
        if len(fields) != dim + 1:
            raise MeshFormatError('expected %d coordinates and a boundary '
                                  'flag' % dim, lineno)
        try:
            point = [float(x) for x in fields[:dim]]
        except ValueError:
            raise MeshFormatError('invalid coordinate', lineno)
        if not all(math.isfinite(x) for x in point):
            raise MeshFormatError('non-finite coordinate', lineno)
        if fields[dim] not in ('0', '1'):
            raise MeshFormatError('boundary flag must be 0 or 1', lineno)
        vertices[i] = point
        boundary[i] = fields[dim] == '1'

    elements = np.empty((ne, dim + 1), dtype=np.intp)
    for k in range(ne):
        lineno = k + nv + 2
        fields = lines[k + nv + 1].split()
        if len(fields) != dim + 1:
            raise MeshFormatError('expected %d vertex indices' % (dim + 1),
                                  lineno)
        try:
            indices = [int(x) for x in fields]
        except ValueError:
            raise MeshFormatError('invalid vertex index', lineno)
        for index in indices:
            if not 0 <= index < nv:
                raise MeshFormatError('vertex index %d out of range' % index,
                                      lineno)
        elements[k] = indices

    used = np.zeros(nv, dtype=bool)
    used[elements.ravel()] = True
    if np.any(boundary & ~used):
        warnings.warn('The mesh has boundary vertices used by no element',
                      SyntaxWarning)
    try:
        return SimplicialMesh(vertices, elements, boundary)
    except MeshError as error:
        raise MeshFormatError(str(error))


def read_mesh(path):
    with open(path, 'r') as f:
        return parse_mesh(f.read())


def write_mesh(mesh, path):
    with open(path, 'w') as f:
        f.write(mesh.as_text())
