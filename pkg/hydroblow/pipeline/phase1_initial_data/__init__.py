"""
Phase 1: Initial Data
Scenario definitions and initial fields
"""

from .phase1_initial_data import (
    BLOWUP_KINDS,
    InitialData,
    InitialDataPipeline,
    ScenarioKind,
    ScenarioSpec,
    build_initial,
)

__all__ = ['BLOWUP_KINDS', 'InitialData', 'InitialDataPipeline', 'ScenarioKind', 'ScenarioSpec', 'build_initial']
