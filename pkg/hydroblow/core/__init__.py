"""
Core numerics: profile family, reduced model solver, Lagrangian oracle,
modulation diagnostics and rate-law fitting
"""

from .characteristics import ParticleSet, compare_to_eulerian, integrate_characteristics
from .errors import HydroblowError
from .modulation import EnergyConfig, ModulationState, extract_modulation
from .profile import ProfileSpec, eval_phi, profile_table
from .reduced_pde import Field, Grid, SolverConfig, Trajectory, run
from .scaling_laws import fit_blowup_time, fit_nu_law, fit_remainder_decay

__all__ = [
    'EnergyConfig', 'Field', 'Grid', 'HydroblowError', 'ModulationState', 'ParticleSet', 'ProfileSpec',
    'SolverConfig', 'Trajectory', 'compare_to_eulerian', 'eval_phi', 'extract_modulation', 'fit_blowup_time',
    'fit_nu_law', 'fit_remainder_decay', 'integrate_characteristics', 'profile_table', 'run',
]
