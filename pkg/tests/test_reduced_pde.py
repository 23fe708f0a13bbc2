#!/usr/bin/env python3
"""
Tests for the reduced model solver
"""

import math

import numpy as np
import pytest

from hydroblow.core.errors import BlowupOverflowError, ConfigError, ContractError
from hydroblow.core.profile import ProfileSpec, profile_table
from hydroblow.core.reduced_pde import (
    Field,
    Grid,
    MeanMode,
    SolverConfig,
    Termination,
    adaptive_dt,
    boundary_slope,
    cumulative_integral,
    mean_evolution_check,
    node_zero_deviation,
    rhs,
    run,
    step,
    upwind_index_slope,
)
from hydroblow.core.scaling_laws import observed_order


def test_graded_grid_layout():
    grid = Grid.graded(32, 2.0)
    assert grid.n == 32
    assert grid.nodes[0] == 0.0 and grid.nodes[-1] == 1.0
    assert grid.nodes[1] == pytest.approx((1.0 / 32) ** 2)
    assert np.all(np.diff(grid.spacing) > 0.0)


def test_grid_needs_sixteen_intervals():
    with pytest.raises(ConfigError):
        Grid.graded(8)


def test_grid_rejects_grading_below_one():
    with pytest.raises(ConfigError):
        Grid.graded(32, 0.5)


def test_clustered_grid_is_denser_near_origin():
    grid = Grid.clustered(64, 4.0)
    assert grid.nodes[0] == 0.0 and grid.nodes[-1] == 1.0
    assert grid.spacing[0] < grid.spacing[-1]


def test_field_shape_must_match_grid(uniform_grid):
    with pytest.raises(ContractError):
        Field(uniform_grid, np.ones(3))


def test_mean_and_sup(uniform_grid):
    f = Field(uniform_grid, 2.0 * uniform_grid.nodes - 3.0)
    assert f.mean() == pytest.approx(-2.0)
    assert f.sup() == pytest.approx(3.0)


def test_cumulative_integral_of_constant(constant_field):
    np.testing.assert_allclose(cumulative_integral(constant_field).values, constant_field.grid.nodes, atol=1e-15)


def test_boundary_slope_is_exact_for_quadratics():
    grid = Grid.graded(40, 2.0)
    f = Field(grid, grid.nodes ** 2 + 3.0 * grid.nodes + 1.0)
    assert boundary_slope(f) == pytest.approx(3.0, rel=1e-9)


def test_rhs_of_constant_field(constant_field):
    with_pressure = rhs(constant_field, SolverConfig(pressure_on=True))
    without = rhs(constant_field, SolverConfig(pressure_on=False))
    np.testing.assert_allclose(with_pressure, -1.0, atol=1e-14)
    np.testing.assert_allclose(without, 1.0, atol=1e-14)


@pytest.mark.parametrize("kwargs", [
    {"cfl": 0.0},
    {"cfl": 1.5},
    {"reaction_cfl": 0.0},
    {"reaction_cfl": 1.0},
    {"sup_stop_factor": 1.0},
    {"max_steps": 0},
    {"sup_norm_stop": -1.0},
    {"snapshot_growth": 1.0},
])
def test_solver_config_validation(kwargs):
    with pytest.raises(ConfigError):
        SolverConfig(**kwargs)


def test_stop_level():
    assert SolverConfig(sup_stop_factor=100.0).stop_level(0.5) == pytest.approx(100.0)
    assert SolverConfig(sup_stop_factor=100.0).stop_level(3.0) == pytest.approx(300.0)
    with pytest.raises(ConfigError):
        SolverConfig(sup_norm_stop=2.0).stop_level(5.0)


def test_step_rejects_non_positive_dt(constant_field):
    with pytest.raises(ContractError):
        step(constant_field, 0.0, SolverConfig())


def test_step_overflow_carries_last_field(uniform_grid):
    f = Field(uniform_grid, np.full_like(uniform_grid.nodes, 1e200))
    with pytest.raises(BlowupOverflowError) as info:
        step(f, 1.0, SolverConfig(pressure_on=False))
    assert info.value.last_field is f


def test_pressureless_constant_follows_riccati(constant_field):
    traj = run(constant_field, SolverConfig(pressure_on=False), horizon=0.5)
    assert traj.status is Termination.HORIZON
    assert traj.final.time == 0.5
    np.testing.assert_allclose(traj.final.values, 2.0, rtol=1e-8)


def test_pressure_makes_constant_decay(constant_field):
    traj = run(constant_field, SolverConfig(pressure_on=True), horizon=1.0)
    np.testing.assert_allclose(traj.final.values, 0.5, rtol=1e-8)


def test_sup_norm_stop(constant_field):
    traj = run(constant_field, SolverConfig(pressure_on=False, sup_norm_stop=10.0), horizon=math.inf)
    assert traj.status is Termination.SUP_NORM_STOP
    assert traj.final.sup() >= 10.0
    assert 0.85 < traj.final.time < 1.0
    assert traj.stop_level == 10.0


def test_max_steps(constant_field):
    traj = run(constant_field, SolverConfig(pressure_on=False, max_steps=3), horizon=math.inf)
    assert traj.status is Termination.MAX_STEPS
    assert traj.steps == 3
    assert len(traj.records) == 4


def test_output_times_become_snapshots(constant_field):
    traj = run(constant_field, SolverConfig(pressure_on=True), horizon=1.0, output_times=(0.25, 0.5))
    times = [f.time for f in traj.snapshots]
    assert times[0] == 0.0
    assert 0.25 in times and 0.5 in times
    assert times[-1] == 1.0


def test_records_are_time_ordered(constant_field):
    traj = run(constant_field, SolverConfig(pressure_on=False), horizon=0.5)
    assert np.all(np.diff(traj.times()) > 0.0)
    assert traj.records[0].dt == 0.0
    assert traj.records[-1].right == pytest.approx(2.0, rel=1e-8)


def test_projected_mode_keeps_mean_at_zero():
    grid = Grid.graded(64, 1.0)
    f0 = Field(grid, np.cos(2.0 * np.pi * grid.nodes))
    traj = run(f0, SolverConfig(mean_mode=MeanMode.PROJECTED), horizon=0.2)
    assert max(abs(r.mean) for r in traj.records[1:]) < 1e-13


def test_mean_law_for_constant_field(constant_field):
    traj = run(constant_field, SolverConfig(pressure_on=True), horizon=1.0)
    report = mean_evolution_check(traj)
    assert not report.zero_mean_initial
    assert report.law_residual < 1e-3
    assert report.ode_deviation < 1e-3


def test_mean_check_needs_three_records(constant_field):
    traj = run(constant_field, SolverConfig(pressure_on=False, max_steps=1), horizon=math.inf)
    with pytest.raises(ContractError):
        mean_evolution_check(traj)


@pytest.mark.parametrize("pressure_on", [True, False])
def test_node_zero_ode(constant_field, pressure_on):
    horizon = 1.0 if pressure_on else 0.8
    times = tuple(np.linspace(0.05, horizon, 16))
    traj = run(constant_field, SolverConfig(pressure_on=pressure_on), horizon=horizon, output_times=times)
    assert node_zero_deviation(traj, pressure_on=pressure_on) < 1e-6


def test_field_rejects_non_finite_values(uniform_grid):
    with pytest.raises(ContractError, match="non-finite"):
        Field(uniform_grid, np.full_like(uniform_grid.nodes, np.nan))
    with pytest.raises(ContractError):
        Field(uniform_grid, np.ones_like(uniform_grid.nodes)).with_values(np.full_like(uniform_grid.nodes, np.inf))


def test_dt_of_zero_field_is_reaction_cfl(uniform_grid):
    f = Field(uniform_grid, np.zeros_like(uniform_grid.nodes))
    assert adaptive_dt(f, SolverConfig(cfl=0.3, reaction_cfl=0.1)) == pytest.approx(0.1)


def test_dt_reaction_bound(uniform_grid):
    f = Field(uniform_grid, np.where(uniform_grid.nodes == 0.0, 1e3, 0.0))
    assert adaptive_dt(f, SolverConfig(cfl=0.3, reaction_cfl=0.05)) == pytest.approx(0.05 / 1001.0)


def test_dt_transport_bound():
    grid = Grid.graded(100, 1.0)
    f = Field(grid, np.ones_like(grid.nodes))
    assert adaptive_dt(f, SolverConfig(cfl=0.3)) == pytest.approx(0.3 * 1e-2)


def test_dt_transport_bound_uses_local_spacing():
    grid = Grid.graded(64, 3.0)
    f = Field(grid, np.ones_like(grid.nodes))
    local = grid.index_step * grid.jacobian[1:] / grid.nodes[1:]
    assert adaptive_dt(f, SolverConfig(cfl=0.2, reaction_cfl=0.5)) == pytest.approx(0.2 * np.min(local), rel=1e-12)


def test_dt_underflow_has_its_own_status(uniform_grid):
    f = Field(uniform_grid, np.ones_like(uniform_grid.nodes), time=1e20)
    traj = run(f, SolverConfig(pressure_on=False), horizon=math.inf)
    assert traj.status is Termination.DT_UNDERFLOW
    assert traj.status.value == "dt_underflow"
    assert traj.steps == 0


@pytest.mark.parametrize("g", [1.0, 2.0, 4.0])
def test_graded_jacobian_is_analytic(g):
    grid = Grid.graded(64, g)
    x = np.arange(65) / 64
    np.testing.assert_allclose(grid.jacobian, g * x ** (g - 1.0), rtol=1e-14)


def test_clustered_jacobian_matches_finite_differences():
    grid = Grid.clustered(256, 4.0)
    x = np.arange(257) / 256
    np.testing.assert_allclose(grid.jacobian, np.gradient(grid.nodes, x, edge_order=2), rtol=1e-4)
    generic = Grid(nodes=grid.nodes)
    np.testing.assert_allclose(generic.jacobian, grid.jacobian, rtol=1e-4)


@pytest.mark.parametrize("positive", [True, False])
def test_upwind_index_slope_is_exact_for_quadratics(positive):
    x = np.arange(33) / 32
    speed = np.full_like(x, 1.0 if positive else -1.0)
    slope = upwind_index_slope(3.0 * x ** 2 - x + 2.0, speed, 1.0 / 32)
    np.testing.assert_allclose(slope, 6.0 * x - 1.0, atol=1e-12)


def test_transport_resolves_the_cusp_at_the_first_cells():
    # a = 1 - sqrt(Z) is 1 - x^2 on the g = 4 grid
    grid = Grid.graded(256, 4.0)
    f = Field(grid, 1.0 - np.sqrt(grid.nodes))
    z = grid.nodes
    transport = f.values ** 2 - rhs(f, SolverConfig(pressure_on=False))
    exact = -(np.sqrt(z) / 2.0 - z / 3.0)
    np.testing.assert_allclose(transport[1:], exact[1:], rtol=1e-3)
    assert transport[0] == 0.0


@pytest.mark.parametrize("k", [1, 2, 3])
def test_steady_residual_is_second_order(k):
    residuals = []
    for n in (128, 256, 512):
        grid = Grid.graded(n, 1.0)
        f = Field(grid, np.cos(2.0 * np.pi * k * grid.nodes))
        residuals.append(float(np.max(np.abs(rhs(f, SolverConfig())))))
    assert 3.5 < residuals[0] / residuals[1] < 4.5
    assert 3.5 < residuals[1] / residuals[2] < 4.5
    assert residuals[-1] < 1e-3


def test_pressureless_exact_solution_converges_at_second_order():
    spec = ProfileSpec(beta=1.0)
    table = profile_table(spec)
    errors = []
    for n in (64, 128, 256):
        grid = Grid.graded(n, 4.0)
        final = run(Field(grid, table.phi(grid.nodes)), SolverConfig(pressure_on=False), horizon=0.5).final
        exact = table.phi(grid.nodes / 0.5) / 0.5
        errors.append(float(np.max(np.abs(final.values - exact)) / np.max(np.abs(exact))))
    assert errors[0] > errors[1] > errors[2]
    assert observed_order([1.0 / 64, 1.0 / 128, 1.0 / 256], errors) >= 1.5
