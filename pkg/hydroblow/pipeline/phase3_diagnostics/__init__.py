"""
Phase 3: Diagnostics
Modulation series, fits, verdicts and the 2D reduction check
"""

from .phase3_diagnostics import DiagnosticsPipeline, DiagnosticsResult, ModulationRow, last_decade
from .reduction_check import Lift2D, divergence_residual, lift_to_2d, momentum_residual
from .verdicts import Verdict

__all__ = [
    'DiagnosticsPipeline', 'DiagnosticsResult', 'Lift2D', 'ModulationRow', 'Verdict', 'divergence_residual',
    'last_decade', 'lift_to_2d', 'momentum_residual',
]
