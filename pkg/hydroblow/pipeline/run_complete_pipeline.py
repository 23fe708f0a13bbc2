#!/usr/bin/env python3
"""
Complete Pipeline Runner
Orchestrates Phase 1 (Initial Data), Phase 2 (Simulation) and Phase 3 (Diagnostics)
"""

import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence

from tqdm import tqdm

from ..config.thresholds import VerdictThresholds
from ..core.errors import PipelineStageError
from ..core.reduced_pde import Trajectory
from .phase1_initial_data import InitialData, InitialDataPipeline, ScenarioSpec
from .phase2_simulation import SimulationPipeline, SimulationResult
from .phase3_diagnostics import DiagnosticsPipeline, DiagnosticsResult, Verdict


@dataclass
class ScenarioBundle:
    """Everything one scenario run produced"""

    spec: ScenarioSpec
    initial: InitialData
    simulation: SimulationResult
    diagnostics: DiagnosticsResult
    wall_time: float = 0.0

    @property
    def trajectory(self) -> Trajectory:
        return self.simulation.trajectory

    @property
    def verdicts(self) -> List[Verdict]:
        return self.diagnostics.verdicts

    @property
    def passed(self) -> bool:
        """No verdict failed; informational entries do not count"""
        return all(v.passed is not False for v in self.verdicts)


@dataclass
class SweepOutcome:
    name: str
    bundle: Optional[ScenarioBundle] = None
    error: Optional[str] = None


@dataclass
class KappaExploration:
    kappas: List[float] = field(default_factory=list)
    passed: List[bool] = field(default_factory=list)

    @property
    def largest_passing(self) -> Optional[float]:
        good = [k for k, ok in zip(self.kappas, self.passed) if ok]
        return max(good) if good else None


class CompletePipelineRunner:
    """Orchestrates the three phases of a scenario run"""

    def __init__(self, thresholds: Optional[VerdictThresholds] = None, progress: bool = False):
        self.thresholds = thresholds or VerdictThresholds()
        self.phase1 = InitialDataPipeline()
        self.phase2 = SimulationPipeline(progress=progress,
                                         oracle_growth=self.thresholds.get("blowup", "oracle_growth"))
        self.phase3 = DiagnosticsPipeline(self.thresholds)

        # Combined statistics
        self.combined_stats = {
            'phase1': {},
            'phase2': {},
            'phase3': {},
            'scenarios_run': 0,
            'scenarios_failed': 0,
            'total_processing_time': 0.0,
            'overall_success': True,
        }

    def _stage(self, name: str, func, *args):
        try:
            return func(*args)
        except Exception as e:
            print(f"❌ Stage '{name}' failed: {e}")
            traceback.print_exc()
            self.combined_stats['scenarios_failed'] += 1
            self.combined_stats['overall_success'] = False
            raise PipelineStageError(name, e) from e

    def run_scenario(self, spec: ScenarioSpec) -> ScenarioBundle:
        """Run all three phases for one scenario"""
        start_time = time.time()
        print(f"🚀 Running scenario '{spec.name}'")
        print("=" * 60)

        print("🎯 PHASE 1: INITIAL DATA")
        initial = self._stage("initial_data", self.phase1.run_initial_data, spec)
        print("\n🎯 PHASE 2: SIMULATION")
        simulation = self._stage("simulation", self.phase2.run_simulation, spec, initial)
        print("\n🎯 PHASE 3: DIAGNOSTICS")
        diagnostics = self._stage("diagnostics", self.phase3.run_diagnostics, spec, initial, simulation)

        elapsed = time.time() - start_time
        self.combined_stats['scenarios_run'] += 1
        self.combined_stats['total_processing_time'] += elapsed
        self.combined_stats['phase1'] = dict(self.phase1.stats)
        self.combined_stats['phase2'] = dict(self.phase2.stats)
        self.combined_stats['phase3'] = dict(self.phase3.stats)

        bundle = ScenarioBundle(spec=spec, initial=initial, simulation=simulation, diagnostics=diagnostics,
                                wall_time=elapsed)
        if not bundle.passed:
            self.combined_stats['overall_success'] = False
        self._print_final_summary(bundle)
        return bundle

    def run_simulation_only(self, spec: ScenarioSpec) -> ScenarioBundle:
        """Run Phase 1 and Phase 2 only; diagnostics stay empty"""
        print(f"🚀 Running simulation only: '{spec.name}'")
        print("=" * 60)
        initial = self._stage("initial_data", self.phase1.run_initial_data, spec)
        simulation = self._stage("simulation", self.phase2.run_simulation, spec, initial)
        self.combined_stats['phase1'] = dict(self.phase1.stats)
        self.combined_stats['phase2'] = dict(self.phase2.stats)
        self.combined_stats['phase3'] = {'skipped': True, 'message': 'Phase 3 not run'}
        return ScenarioBundle(spec=spec, initial=initial, simulation=simulation, diagnostics=DiagnosticsResult(),
                              wall_time=simulation.wall_time)

    def _print_final_summary(self, bundle: ScenarioBundle):
        """Print the scenario summary"""
        traj = bundle.trajectory
        fits = bundle.diagnostics.fits()
        print("\n" + "=" * 60)
        print(f"🎉 SCENARIO SUMMARY: {bundle.spec.name}")
        print("=" * 60)
        print(f"📋 Termination: {traj.status.value} after {traj.steps} steps at t={traj.final.time:.10g}")
        print(f"   📸 Snapshots: {len(traj.snapshots)}, modulation states: {len(bundle.diagnostics.states)}")
        if fits["T"] is not None:
            print(f"   📐 T={fits['T']:.10g}, r2={fits['r2']:.6f}")
        for verdict in bundle.verdicts:
            mark = "ℹ️" if verdict.passed is None else ("✅" if verdict.passed else "❌")
            print(f"   {mark} {verdict.claim}: {verdict.measured}")
        print(f"\n⏱️ PROCESSING TIME: {bundle.wall_time:.2f} seconds")
        print(f"🎯 OVERALL: {'✅ PASS' if bundle.passed else '❌ FAIL'}")
        print("=" * 60)


def _run_isolated(spec: ScenarioSpec) -> SweepOutcome:
    # worker processes return messages rather than exception objects
    try:
        return SweepOutcome(name=spec.name, bundle=CompletePipelineRunner().run_scenario(spec))
    except Exception as e:
        return SweepOutcome(name=spec.name, error=f"{type(e).__name__}: {e}")


def sweep(specs: Sequence[ScenarioSpec], workers: int = 1, progress: bool = True) -> List[SweepOutcome]:
    """Run independent scenarios, concurrently when workers > 1; results keep the input order"""
    specs = list(specs)
    if workers <= 1:
        return [_run_isolated(spec) for spec in tqdm(specs, desc="Scenarios", disable=not progress)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(tqdm(pool.map(_run_isolated, specs), total=len(specs), desc="Scenarios", disable=not progress))


def explore_kappa(base: ScenarioSpec, kappas: Sequence[float], workers: int = 1,
                  progress: bool = True) -> KappaExploration:
    """Largest perturbation size for which every blow-up verdict still passes"""
    specs = [replace(base, kappa=float(k), name=f"{base.name}_kappa{k:g}") for k in kappas]
    outcomes = sweep(specs, workers=workers, progress=progress)
    report = KappaExploration()
    for spec, outcome in zip(specs, outcomes):
        report.kappas.append(spec.kappa)
        report.passed.append(outcome.bundle is not None and outcome.bundle.passed)
        if outcome.error:
            print(f"⚠️ kappa={spec.kappa:g} failed: {outcome.error}")
    largest = report.largest_passing
    print(f"📊 Largest passing kappa: {largest if largest is not None else 'none'}")
    return report


def summarize(outcomes: Sequence[SweepOutcome]) -> Dict[str, Any]:
    return {
        "total": len(outcomes),
        "passed": sum(1 for o in outcomes if o.bundle is not None and o.bundle.passed),
        "errors": sum(1 for o in outcomes if o.error),
    }
