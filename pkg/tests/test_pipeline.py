#!/usr/bin/env python3
"""
Tests for the pipeline phases: initial data, verdict helpers, the 2D lift and a pressureless scenario
"""

import math

import numpy as np
import pytest

from hydroblow.core.errors import ContractError, PipelineStageError, ScenarioError
from hydroblow.core.profile import ProfileSpec
from hydroblow.core.reduced_pde import Field, Grid, MeanMode, SolverConfig, Termination, rhs, run
from hydroblow.pipeline.phase1_initial_data import InitialDataPipeline, ScenarioKind, ScenarioSpec, build_initial
from hydroblow.pipeline.phase1_initial_data.phase1_initial_data import c2_proxy, perturbation
from hydroblow.pipeline.phase2_simulation import SimulationPipeline, oracle_snapshot
from hydroblow.pipeline.phase3_diagnostics import divergence_residual, last_decade, lift_to_2d, momentum_residual
from hydroblow.pipeline.phase3_diagnostics.verdicts import (
    absolute_match,
    at_most,
    count,
    holds,
    in_window,
    informational,
    relative_match,
)
from hydroblow.pipeline.run_complete_pipeline import CompletePipelineRunner, KappaExploration, SweepOutcome, summarize


def initial_for(spec):
    return build_initial(spec, spec.resolved_profile(), spec.build_grid())


# Phase 1

def test_smooth_initial_data():
    spec = ScenarioSpec(kind=ScenarioKind.SMOOTH, lambda0=1e-4, grid_n=64)
    initial = initial_for(spec)
    assert initial.nu0 == pytest.approx(1.0 / math.log(1e4))
    assert initial.field.values[0] == pytest.approx(1e4)
    assert initial.mean_correction == 0.0
    assert initial.perturbation_norm == 0.0
    assert np.all(np.diff(initial.field.values) < 0.0)


def test_perturbation_has_requested_size():
    grid = Grid.graded(128, 1.0)
    bump = perturbation(grid, 1e-2, 2)
    assert c2_proxy(grid, bump) == pytest.approx(1e-2, rel=1e-12)
    assert bump[0] == 0.0 and abs(bump[-1]) < 1e-12
    assert not np.any(perturbation(grid, 0.0, 2))


def test_perturbed_initial_data_keeps_the_origin_value():
    spec = ScenarioSpec(kind=ScenarioKind.SMOOTH, lambda0=1e-4, kappa=1e-2, perturbation_m=2, grid_n=128)
    initial = initial_for(spec)
    assert initial.perturbation_norm == pytest.approx(1e-2, rel=1e-12)
    assert initial.field.values[0] == pytest.approx(1e4)


def test_nonsmooth_defaults():
    spec = ScenarioSpec(kind=ScenarioKind.NONSMOOTH, beta=0.5, lambda0=1e-2)
    assert spec.resolved_nu0() == pytest.approx(0.05)
    assert spec.resolved_grading() == 1.5
    assert spec.resolved_energy().beta == 0.5


def test_pressureless_scenario_turns_pressure_off():
    spec = ScenarioSpec(kind=ScenarioKind.PRESSURELESS_EXACT, beta=1.0, exact_T=1.0,
                        solver=SolverConfig(pressure_on=True))
    assert spec.resolved_solver().pressure_on is False
    assert spec.resolved_lambda0() == 1.0
    assert spec.resolved_output_times() == (0.5,)


def test_steady_state_initial_data():
    spec = ScenarioSpec(kind=ScenarioKind.STEADY_STATE, steady_k=2, grid_n=64)
    initial = initial_for(spec)
    assert spec.resolved_solver().mean_mode is MeanMode.PROJECTED
    assert spec.resolved_horizon() == 0.25
    assert abs(initial.mean_correction) < 1e-14
    np.testing.assert_allclose(initial.field.values, np.cos(4.0 * np.pi * initial.field.grid.nodes), atol=1e-14)


@pytest.mark.parametrize("kwargs, fragment", [
    ({"beta": -1.0}, "beta >= 0"),
    ({"kind": ScenarioKind.SMOOTH, "lambda0": 2.0}, "lambda0 < 1"),
    ({"kind": ScenarioKind.PRESSURELESS_EXACT, "beta": 1.0, "exact_T": 2.0}, "nu0 <= 1"),
    ({"kind": ScenarioKind.NONSMOOTH, "beta": 0.5, "profile": ProfileSpec(beta=1.0)}, "profile beta"),
    ({"gauge_cells": 1}, "gauge_cells"),
])
def test_scenario_constraints(kwargs, fragment):
    with pytest.raises(ScenarioError, match=fragment):
        ScenarioSpec(**kwargs)


def test_initial_data_pipeline_counts(capsys):
    pipeline = InitialDataPipeline()
    pipeline.run_initial_data(ScenarioSpec(kind=ScenarioKind.SMOOTH, lambda0=1e-4, grid_n=32))
    assert pipeline.stats['fields_built'] == 1
    assert "✅" in capsys.readouterr().out


# Verdicts

def test_verdict_helpers():
    assert at_most("x", 0.5, 1.0).passed is True
    assert at_most("x", None, 1.0).passed is False
    assert at_most("x", math.nan, 1.0).passed is False
    assert relative_match("x", 1.05, 1.0, 0.1).passed is True
    assert relative_match("x", 1.2, 1.0, 0.1).passed is False
    assert absolute_match("x", 0.05, 0.0, 0.1).passed is True
    assert in_window("x", 0.6, 1.4, (0.5, 1.5)).passed is True
    assert in_window("x", 0.4, 1.4, (0.5, 1.5)).passed is False
    assert holds("x", False).passed is False
    assert informational("x", 3.0).passed is None


def test_verdict_counts_and_dict():
    verdicts = [at_most("a", 0.0, 1.0), at_most("b", 2.0, 1.0), informational("c", 1.0)]
    assert count(verdicts) == {"passed": 1, "failed": 1, "informational": 1}
    assert verdicts[0].to_dict() == {"claim": "a", "pass": True, "measured": 0.0, "target": 0.0, "tolerance": 1.0}


# 2D reduction check

def test_lift_is_divergence_free():
    grid = Grid.graded(64, 1.0)
    f = Field(grid, np.exp(-grid.nodes / 0.1) * 50.0)
    lift = lift_to_2d(f, np.linspace(-1.0, 1.0, 5))
    assert lift.u.shape == (5, 65)
    assert divergence_residual(lift) < 1e-12 * f.sup()


def test_lift_of_constant_field_solves_momentum(constant_field):
    lift = lift_to_2d(constant_field, np.linspace(-1.0, 1.0, 5))
    assert momentum_residual(lift, rhs(constant_field, SolverConfig(pressure_on=True))) < 1e-12


def test_lift_contracts(constant_field):
    with pytest.raises(ContractError):
        lift_to_2d(constant_field, [0.0, 1.0])
    lift = lift_to_2d(constant_field, [-1.0, 0.0, 1.0])
    with pytest.raises(ContractError):
        momentum_residual(lift, np.zeros(3))


# Phase 2 and 3 helpers

def test_last_decade_mask():
    ts = np.array([0.0, 0.9, 0.995, 0.999, 1.5])
    mask = last_decade(ts, 1.0)
    assert mask.tolist() == [False, False, True, True, False]


def test_oracle_snapshot_choice(constant_field):
    runner = SimulationPipeline()
    assert runner.oracle_growth == 10.0
    traj = run(constant_field, SolverConfig(pressure_on=False, sup_norm_stop=50.0), horizon=math.inf)
    chosen = oracle_snapshot(traj, 10.0)
    assert chosen.sup() >= 10.0
    assert chosen.sup() < 11.0


def test_sweep_summary():
    outcomes = [SweepOutcome(name="a", error="boom"), SweepOutcome(name="b")]
    assert summarize(outcomes) == {"total": 2, "passed": 0, "errors": 1}
    report = KappaExploration(kappas=[0.01, 0.1, 1.0], passed=[True, True, False])
    assert report.largest_passing == 0.1
    assert KappaExploration().largest_passing is None


def test_stage_failures_name_the_stage():
    runner = CompletePipelineRunner()
    spec = ScenarioSpec(kind=ScenarioKind.SMOOTH, lambda0=1e-4, grid_n=32,
                        solver=SolverConfig(sup_norm_stop=1.0))
    with pytest.raises(PipelineStageError) as info:
        runner.run_scenario(spec)
    assert info.value.stage == "simulation"
    assert runner.combined_stats['overall_success'] is False


@pytest.fixture(scope="module")
def pressureless_bundle():
    spec = ScenarioSpec(kind=ScenarioKind.PRESSURELESS_EXACT, name="pressureless_test", beta=1.0, exact_T=1.0,
                        grid_n=128, solver=SolverConfig(cfl=0.1))
    return CompletePipelineRunner().run_scenario(spec)


@pytest.mark.slow
def test_pressureless_scenario_end_to_end(pressureless_bundle):
    bundle = pressureless_bundle
    assert bundle.trajectory.status is Termination.SUP_NORM_STOP
    assert bundle.diagnostics.blowup.T == pytest.approx(1.0, rel=1e-4)
    by_claim = {v.claim: v for v in bundle.verdicts}
    assert by_claim["fitted blow-up time matches the exact T"].passed is True
    assert by_claim["run reached the blow-up stop"].passed is True
    assert by_claim["a(t, 0) follows the node-zero ODE"].passed is True
    assert by_claim["2D lift u = -X a is incompressible"].passed is True
    assert any(abs(f.time - 0.5) < 1e-12 for f in bundle.trajectory.snapshots)
