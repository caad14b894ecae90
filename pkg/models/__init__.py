"""
Package models - Sphère, états de spin et quasi-distributions
"""
from .sphere import Direction, QuadratureGrid, build_grid
from .spin_states import SpinQuantumNumber, SpinState, DensityMatrix, PhaseConvention
from .quasi_dist import QuasiDistribution, BUILTIN_DISTRIBUTIONS, get_distribution

__all__ = ['Direction', 'QuadratureGrid', 'build_grid', 'SpinQuantumNumber', 'SpinState',
           'DensityMatrix', 'PhaseConvention', 'QuasiDistribution', 'BUILTIN_DISTRIBUTIONS',
           'get_distribution']
