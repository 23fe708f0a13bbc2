"""
Scenario Pipeline Package
Three-phase pipeline: initial data, simulation, diagnostics
"""

from .phase1_initial_data import InitialDataPipeline
from .phase2_simulation import SimulationPipeline
from .phase3_diagnostics import DiagnosticsPipeline
from .run_complete_pipeline import CompletePipelineRunner, ScenarioBundle, explore_kappa, sweep

__all__ = [
    'CompletePipelineRunner', 'DiagnosticsPipeline', 'InitialDataPipeline', 'ScenarioBundle', 'SimulationPipeline',
    'explore_kappa', 'sweep',
]
