# -*- coding: utf-8 -*-
"""
Extreme eigenvalues and condition numbers of sparse SPD matrices.

The largest eigenvalue comes from ARPACK Lanczos on the matrix, the smallest
from shift-invert Lanczos with a sparse LU factorization. Small matrices, and
the verification oracle, go through an in-repo dense eigensolver: Householder
tridiagonalization followed by implicitly shifted QL sweeps.
"""
import logging
import math

import numpy as np
import scipy.linalg
from scipy import sparse
from scipy.sparse import linalg as splinalg


logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8
MAX_REL_TOL = 1e-4
# Orders up to this size are solved densely.
DENSE_CUTOFF = 64
DENSE_MAX_ORDER = 4000
ITERATIONS_PER_UNKNOWN = 50
MAX_QL_ITERATIONS = 60
CG_ITERATIONS_PER_UNKNOWN = 10
START_VECTOR_SEED = 20020


class ConvergenceError(RuntimeError):

    def __init__(self, message, residual=None):
        self.residual = residual
        if residual is not None:
            message = '%s (residual %.3g)' % (message, residual)
        super(ConvergenceError, self).__init__(message)


class SpectralResult(object):
    """Extreme eigenvalues of an SPD matrix."""

    def __init__(self, lambda_min, lambda_max, rel_tol_achieved):
        self.lambda_min = lambda_min
        self.lambda_max = lambda_max
        self.rel_tol_achieved = rel_tol_achieved

    @property
    def kappa(self):
        return self.lambda_max / self.lambda_min

    def __repr__(self):
        return '<SpectralResult min=%.6g max=%.6g kappa=%.6g>' % (
            self.lambda_min, self.lambda_max, self.kappa)


def _as_csr(matrix):
    if hasattr(matrix, 'tocsr'):
        matrix = matrix.tocsr()
    return sparse.csr_matrix(matrix, dtype=float)


def _as_dense(matrix):
    if hasattr(matrix, 'toarray'):
        return matrix.toarray()
    return np.array(matrix, dtype=float)


def householder_tridiagonal(a):
    """Reduce a symmetric matrix to tridiagonal form by Householder
    reflections. Returns the diagonal and the off-diagonal."""
    a = np.array(a, dtype=float)
    n = a.shape[0]
    for k in range(n - 2):
        u = a[k + 1:, k].copy()
        alpha = math.sqrt(np.dot(u, u))
        if alpha == 0.0:
            continue
        if u[0] < 0.0:
            alpha = -alpha
        u[0] += alpha
        h = np.dot(u, u) / 2.0
        v = np.dot(a[k + 1:, k + 1:], u) / h
        g = np.dot(u, v) / (2.0 * h)
        v -= g * u
        a[k + 1:, k + 1:] -= np.outer(v, u) + np.outer(u, v)
        a[k, k + 1] = -alpha
    if n < 2:
        return np.diagonal(a).copy(), np.zeros(0)
    return np.diagonal(a).copy(), np.diagonal(a, 1).copy()


def tridiagonal_ql(diagonal, offdiagonal):
    """Eigenvalues of a symmetric tridiagonal matrix by implicit QL.

    `offdiagonal[i]` couples rows i and i+1. Returns the sorted eigenvalues.
    """
    d = [float(x) for x in diagonal]
    n = len(d)
    e = [float(x) for x in offdiagonal] + [0.0]
    for l in range(n):
        iterations = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) + dd == dd:
                    break
                m += 1
            if m == l:
                break
            iterations += 1
            if iterations > MAX_QL_ITERATIONS:
                raise ConvergenceError('QL sweep did not converge for '
                                       'eigenvalue %d' % l, abs(e[l]))
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return sorted(d)


def dense_eigenvalues_oracle(matrix, method='ql'):
    """All eigenvalues of a symmetric matrix, sorted ascending.

    `method` is 'ql' (in-repo tridiagonalization and QL) or 'lapack'.
    """
    a = _as_dense(matrix)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError('The oracle needs a square matrix.')
    if a.shape[0] > DENSE_MAX_ORDER:
        raise ValueError('Order %d is above the dense limit %d.'
                         % (a.shape[0], DENSE_MAX_ORDER))
    if method == 'lapack':
        return scipy.linalg.eigvalsh(a).tolist()
    if method != 'ql':
        raise ValueError('Unknown oracle method %r.' % (method,))
    return tridiagonal_ql(*householder_tridiagonal(a))


def _start_vector(order):
    return np.random.default_rng(START_VECTOR_SEED).uniform(0.5, 1.5, order)


def _residual(operator, value, vector):
    vector = vector.ravel()
    return float(np.linalg.norm(operator @ vector - value * vector)
                 / (abs(value) * np.linalg.norm(vector)))


def _arpack(matrix, rel_tol, inverse=None, **kwargs):
    """One extreme eigenpair by ARPACK; the residual is measured on the
    operator Lanczos actually iterated with (A, or A^-1 in shift-invert)."""
    order = matrix.shape[0]

    def residual(value, vector):
        if inverse is None:
            return _residual(matrix, value, vector)
        return _residual(inverse, 1.0 / value, vector)

    try:
        values, vectors = splinalg.eigsh(
            matrix, k=1, tol=rel_tol * 0.01, v0=_start_vector(order),
            maxiter=ITERATIONS_PER_UNKNOWN * order, OPinv=inverse, **kwargs)
    except splinalg.ArpackNoConvergence as error:
        worst = None
        if len(error.eigenvalues):
            worst = residual(error.eigenvalues[0], error.eigenvectors[:, 0])
        raise ConvergenceError('Lanczos did not converge within %d '
                               'iterations' % (ITERATIONS_PER_UNKNOWN * order),
                               worst)
    value = float(values[0])
    return value, residual(value, vectors[:, 0])


def extreme_eigenvalues(matrix, rel_tol=DEFAULT_TOL):
    """Return the SpectralResult of an SPD matrix."""
    if not 0.0 < rel_tol <= MAX_REL_TOL:
        raise ValueError('Relative tolerance must be in (0, %g], got %r.'
                         % (MAX_REL_TOL, rel_tol))
    csr = _as_csr(matrix)
    order = csr.shape[0]
    if order == 0 or csr.shape[1] != order:
        raise ValueError('Need a nonempty square matrix.')

    if order <= DENSE_CUTOFF:
        values = dense_eigenvalues_oracle(csr)
        lambda_min, lambda_max = values[0], values[-1]
        achieved = float(np.finfo(float).eps * order)
    else:
        lambda_max, max_residual = _arpack(csr, rel_tol, which='LA')
        try:
            factor = splinalg.splu(csr.tocsc())
        except RuntimeError as error:
            raise ValueError('Matrix is singular: %s' % error)
        inverse = splinalg.LinearOperator(shape=csr.shape, dtype=float,
                                          matvec=factor.solve)
        lambda_min, min_residual = _arpack(csr, rel_tol, inverse=inverse,
                                           sigma=0.0, which='LM')
        achieved = max(max_residual, min_residual)
        logger.debug('order %d: lambda_max %.10g (residual %.2g), '
                     'lambda_min %.10g (residual %.2g)', order, lambda_max,
                     max_residual, lambda_min, min_residual)
        if achieved > rel_tol:
            raise ConvergenceError('Eigenvalue residual %.3g above tolerance '
                                   '%g' % (achieved, rel_tol), achieved)

    if not lambda_min > 0.0:
        raise ValueError('Matrix is not positive definite (smallest '
                         'eigenvalue %r).' % lambda_min)
    return SpectralResult(float(lambda_min), float(lambda_max), achieved)


def cg_iteration_count(matrix, rhs, tol=DEFAULT_TOL, scaling=None,
                       maxiter=None):
    """Number of conjugate gradient iterations to reach ||r|| <= tol ||b||.

    With a DiagonalScaling S the iteration is preconditioned by S^2, which is
    CG on S^-1 A S^-1.
    """
    csr = _as_csr(matrix)
    b = np.asarray(rhs, dtype=float).ravel()
    order = csr.shape[0]
    if b.size != order:
        raise ValueError('Right-hand side of size %d for order %d.'
                         % (b.size, order))
    if maxiter is None:
        maxiter = CG_ITERATIONS_PER_UNKNOWN * max(order, 1)
    if scaling is None:
        def precondition(r):
            return r
    else:
        weights = 1.0 / np.asarray(scaling.entries) ** 2

        def precondition(r):
            return weights * r

    norm_b = np.linalg.norm(b)
    if norm_b == 0.0:
        return 0
    x = np.zeros(order)
    r = b.copy()
    z = precondition(r)
    p = z.copy()
    gamma = np.dot(r, z)
    for iteration in range(1, maxiter + 1):
        ap = csr @ p
        alpha = gamma / np.dot(p, ap)
        x += alpha * p
        r -= alpha * ap
        residual = np.linalg.norm(r) / norm_b
        if residual <= tol:
            logger.debug('CG converged in %d iterations', iteration)
            return iteration
        z = precondition(r)
        gamma_old = gamma
        gamma = np.dot(r, z)
        p = z + (gamma / gamma_old) * p
    raise ConvergenceError('CG did not converge within %d iterations'
                           % maxiter, residual)
