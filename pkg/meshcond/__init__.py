# -*- coding: utf-8 -*-
"""Conditioning of linear finite element matrices on simplicial meshes."""


__version__ = '0.1.0'
__all__ = ['mesh', 'diffusion', 'assembly', 'spectral', 'bounds',
           'experiments', 'utils', 'open_mesh',
           'MeshError', 'DegenerateElementError', 'MeshFormatError',
           'FieldError', 'AssemblyError', 'ConvergenceError',
           'CalibrationError', 'StudyConfigError']


from . import assembly, bounds, diffusion, experiments, mesh, spectral, utils
from .assembly import AssemblyError
from .bounds import CalibrationError
from .diffusion import FieldError
from .experiments import StudyConfigError
from .mesh import DegenerateElementError, MeshError, MeshFormatError
from .spectral import ConvergenceError


def open_mesh(filename):
    """Read a mesh file and return a SimplicialMesh object."""
    return mesh.read_mesh(filename)
