#!/usr/bin/env python3
"""
Phase 2: Simulation
Runs the Eulerian solver and, on request, the Lagrangian oracle alongside it
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

from ...core.characteristics import ComparisonReport, compare_to_eulerian, integrate_characteristics
from ...core.reduced_pde import Field, ReducedModelIntegrator, Trajectory
from ..phase1_initial_data import InitialData, ScenarioSpec


@dataclass
class SimulationResult:
    trajectory: Trajectory
    oracle: Optional[ComparisonReport] = None
    wall_time: float = 0.0


def oracle_snapshot(trajectory: Trajectory, growth: float) -> Field:
    """First snapshot whose sup norm reached growth x the initial sup, else the last one"""
    initial_sup = trajectory.snapshots[0].sup()
    for snapshot in trajectory.snapshots[1:]:
        if snapshot.sup() >= growth * initial_sup:
            return snapshot
    return trajectory.snapshots[-1]


class SimulationPipeline:
    """Phase 2: integrate the reduced model for one scenario"""

    def __init__(self, progress: bool = False, oracle_growth: float = 10.0):
        self.progress = progress
        self.oracle_growth = oracle_growth
        self.stats = {
            'runs': 0,
            'steps': 0,
            'snapshots': 0,
            'oracle_runs': 0,
            'errors': 0,
        }

    def run_simulation(self, spec: ScenarioSpec, initial: InitialData) -> SimulationResult:
        """Integrate from the initial field until the horizon or the sup-norm stop"""
        start_time = time.time()
        solver = spec.resolved_solver()
        horizon = spec.resolved_horizon()
        print(f"🚀 Integrating '{spec.name}': cfl={solver.cfl:g}, reaction_cfl={solver.reaction_cfl:g}, "
              f"pressure={'on' if solver.pressure_on else 'off'}, "
              f"mean={solver.mean_mode.value}, horizon={horizon:g}")

        integrator = ReducedModelIntegrator(solver, progress=self.progress)
        try:
            trajectory = integrator.integrate(initial.field, horizon, spec.resolved_output_times())
        except Exception as e:
            print(f"❌ Simulation failed: {e}")
            self.stats['errors'] += 1
            raise

        self.stats['runs'] += 1
        self.stats['steps'] += integrator.stats['steps']
        self.stats['snapshots'] += integrator.stats['snapshots']
        final = trajectory.final
        print(f"✅ Stopped by {trajectory.status.value} at t={final.time:.10g} after {trajectory.steps} steps "
              f"(sup={final.sup():.6g}, {len(trajectory.snapshots)} snapshots)")

        result = SimulationResult(trajectory=trajectory)
        if spec.oracle_n:
            result.oracle = self._run_oracle(spec, initial, trajectory)
        result.wall_time = time.time() - start_time
        return result

    def _run_oracle(self, spec: ScenarioSpec, initial: InitialData, trajectory: Trajectory) -> ComparisonReport:
        target = oracle_snapshot(trajectory, self.oracle_growth)
        solver = spec.resolved_solver()
        print(f"🔍 Characteristics oracle with {spec.oracle_n} intervals up to t={target.time:.10g}")
        try:
            particles = integrate_characteristics(initial.field, spec.oracle_n, target.time,
                                                  pressure_on=solver.pressure_on, cfl=solver.cfl,
                                                  reaction_cfl=solver.reaction_cfl)
            report = compare_to_eulerian(particles, target)
        except Exception as e:
            print(f"❌ Oracle failed: {e}")
            self.stats['errors'] += 1
            raise
        self.stats['oracle_runs'] += 1
        print(f"📊 Eulerian vs Lagrangian: {report.discrepancy:.3e} ({report.relative:.3e} of sup)")
        return report
