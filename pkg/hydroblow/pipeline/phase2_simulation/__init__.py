"""
Phase 2: Simulation
Eulerian integration with an optional Lagrangian oracle
"""

from .phase2_simulation import SimulationPipeline, SimulationResult, oracle_snapshot

__all__ = ['SimulationPipeline', 'SimulationResult', 'oracle_snapshot']
