#!/usr/bin/env python3
"""
Tests for modulation extraction, remainder energies and the modulation laws
"""

import math

import numpy as np
import pytest

from hydroblow.core.errors import ContractError, GaugeError, ModulationDomainError
from hydroblow.core.modulation import (
    EnergyConfig,
    EnergyReport,
    EpsilonField,
    ModulationState,
    energy_E1,
    energy_E2,
    energy_report,
    first_cell_bound,
    extract_modulation,
    initial_selfsimilar_time,
    modulation_residual,
    predict_parameters,
    selfsimilar_time,
    to_selfsimilar,
    trapped_check,
)
from hydroblow.core.profile import ProfileSpec, profile_table
from hydroblow.core.reduced_pde import Field, Grid, SolverConfig, Trajectory, run


def smooth_field(lam=1e-3, nu=0.1, shift=0.0, n=512):
    grid = Grid.graded(n, 1.0)
    return Field(grid, (np.exp(-grid.nodes / nu) + shift) / lam, 0.0)


def test_smooth_gauge_reads_lambda_and_nu():
    state = extract_modulation(smooth_field(), 0.0)
    assert state.lam == pytest.approx(1e-3, rel=1e-12)
    assert state.nu == pytest.approx(0.1, rel=1e-3)
    assert state.t == 0.0


def test_gauge_needs_positive_value_at_origin(uniform_grid):
    f = Field(uniform_grid, -np.ones_like(uniform_grid.nodes))
    with pytest.raises(GaugeError):
        extract_modulation(f, 0.0)


def test_gauge_needs_decreasing_field(constant_field):
    with pytest.raises(GaugeError):
        extract_modulation(constant_field, 0.0)


def test_cusp_fit_recovers_scale():
    spec = ProfileSpec(beta=1.0)
    grid = Grid.graded(256, 2.0)
    lam, nu = 1e-2, 0.05
    f = Field(grid, profile_table(spec).phi(grid.nodes / nu) / lam)
    state = extract_modulation(f, 1.0, spec=spec)
    assert state.lam == pytest.approx(lam, rel=1e-12)
    assert state.nu == pytest.approx(nu, rel=1e-6)


def test_state_parameters_must_be_positive():
    with pytest.raises(GaugeError):
        ModulationState(lam=0.0, nu=0.1, s=0.0, t=0.0)


def test_energy_config_defaults():
    cfg = EnergyConfig.for_beta(0.5)
    assert cfg.eta == pytest.approx(0.25)
    assert cfg.delta == pytest.approx(0.75)
    assert -1.0 < cfg.alpha < 1.0
    smooth = EnergyConfig.for_beta(0.0)
    assert smooth.is_smooth
    assert smooth.delta == pytest.approx(4.0 / 3.0)
    np.testing.assert_allclose(smooth.weight(np.array([0.5, 2.0])), [4.0, 0.25])


def test_energy_config_rejects_large_eta():
    with pytest.raises(ContractError, match="min\\(beta, 1\\)"):
        EnergyConfig.for_beta(0.5, eta=0.6)


def test_energy_config_rejects_small_zstar():
    with pytest.raises(ContractError):
        EnergyConfig.for_beta(1.0, zstar=0.5)


def exact_state(lam=1e-3, nu=0.1):
    return ModulationState(lam=lam, nu=nu, s=0.0, t=0.0)


def test_remainder_of_exact_profile_vanishes():
    spec = ProfileSpec(beta=0.0)
    eps = to_selfsimilar(smooth_field(), exact_state(), spec)
    assert eps.zgrid[-1] == pytest.approx(10.0)
    assert np.max(np.abs(eps.values)) < 1e-12
    report = energy_report(eps, EnergyConfig.for_beta(0.0), exact_state())
    assert report.E1 < 1e-10
    assert report.E2 < 1e-12


def test_constant_remainder_shows_in_E2_only():
    spec = ProfileSpec(beta=0.0)
    eps = to_selfsimilar(smooth_field(shift=0.01), exact_state(), spec)
    cfg = EnergyConfig.for_beta(0.0)
    assert energy_E2(eps, cfg) == pytest.approx(0.01, rel=1e-9)
    assert energy_E1(eps, cfg) < 1e-8


def test_E1_closed_form_for_quadratic_remainder():
    z = np.linspace(0.0, 1.0, 1001)
    eps = EpsilonField(zgrid=z, values=z ** 2, nu=0.1)
    cfg = EnergyConfig.for_beta(0.0, zstar=1.0)
    e1 = energy_E1(eps, cfg)
    # int_0^1 z^-2 (2z)^2 dz = 4, split between the interior cells and the first-cell bound
    assert e1 ** 2 + first_cell_bound(eps, cfg) == pytest.approx(4.0, rel=1e-12)
    assert e1 == pytest.approx(2.0, rel=1e-3)


@pytest.mark.parametrize("beta", [0.0, 0.5])
def test_energies_are_absolutely_homogeneous(beta):
    z = np.linspace(0.0, 10.0, 501)
    nu = 0.1
    eps = EpsilonField(zgrid=z, values=0.01 * np.sin(z) * np.exp(-0.2 * z), nu=nu)
    scaled = EpsilonField(zgrid=z, values=-3.0 * eps.values, nu=nu)
    cfg = EnergyConfig.for_beta(beta)
    assert energy_E1(scaled, cfg) == pytest.approx(3.0 * energy_E1(eps, cfg), rel=1e-12)
    assert energy_E2(scaled, cfg) == pytest.approx(3.0 * energy_E2(eps, cfg), rel=1e-12)


@pytest.mark.parametrize("beta", [0.5, 1.0])
def test_cusp_gauge_on_evolved_field(beta):
    spec = ProfileSpec(beta=beta)
    table = profile_table(spec)
    grid = Grid.graded(512, 2.0 * (beta + 1.0))
    f0 = Field(grid, table.phi(grid.nodes))
    # pressureless: a = phi(Z / (1 - t)^beta) / (1 - t) exactly
    final = run(f0, SolverConfig(pressure_on=False), horizon=0.5).final
    state = extract_modulation(final, beta, spec=spec)
    assert state.lam == pytest.approx(0.5, rel=1e-8)
    assert state.nu == pytest.approx(0.5 ** beta, rel=1e-3)


def test_energies_need_the_window():
    spec = ProfileSpec(beta=0.0)
    state = exact_state(nu=0.5)
    eps = to_selfsimilar(smooth_field(nu=0.5), state, spec)
    cfg = EnergyConfig.for_beta(0.0)
    with pytest.raises(ModulationDomainError):
        energy_E1(eps, cfg)
    with pytest.raises(ModulationDomainError):
        energy_E2(eps, cfg, state)


def test_energy_config_must_match_beta():
    spec = ProfileSpec(beta=0.0)
    eps = to_selfsimilar(smooth_field(), exact_state(), spec)
    with pytest.raises(ContractError):
        energy_E1(eps, EnergyConfig.for_beta(0.0), beta=0.5)


def test_selfsimilar_grid_is_clamped():
    eps = to_selfsimilar(smooth_field(), exact_state(), ProfileSpec(beta=0.0), zgrid=[0.0, 5.0, 20.0])
    assert eps.clamped == 1


def test_to_selfsimilar_checks_time():
    state = ModulationState(lam=1e-3, nu=0.1, s=0.0, t=1.0)
    with pytest.raises(ContractError):
        to_selfsimilar(smooth_field(), state, ProfileSpec(beta=0.0))


def test_initial_selfsimilar_time():
    assert initial_selfsimilar_time(1e-3, 0.5) == pytest.approx(-math.log(1e-3))
    s0 = initial_selfsimilar_time(1e-3, 0.0)
    assert s0 > 1.0
    assert s0 * math.exp(-s0) == pytest.approx(1e-3, rel=1e-12)
    with pytest.raises(ContractError):
        initial_selfsimilar_time(0.5, 0.0)


def test_selfsimilar_time_integrates_inverse_lambda():
    states = [ModulationState(lam=0.5, nu=0.1, s=0.0, t=t) for t in (0.0, 1.0, 2.0)]
    timed = selfsimilar_time(states, 3.0)
    assert [st.s for st in timed] == pytest.approx([3.0, 5.0, 7.0])


def test_selfsimilar_time_checks_alignment(constant_field):
    traj = Trajectory(snapshots=[constant_field])
    states = [ModulationState(lam=1.0, nu=0.1, s=0.0, t=t) for t in (0.0, 1.0)]
    with pytest.raises(ContractError):
        selfsimilar_time(states, 1.0, traj)


def test_exact_laws_have_no_residual():
    beta = 0.5
    s = np.linspace(5.0, 9.0, 9)
    states = [ModulationState(lam=math.exp(-si), nu=math.exp(-beta * si), s=float(si), t=float(k))
              for k, si in enumerate(s)]
    dummy = [EpsilonField(zgrid=np.linspace(0.0, 1.0, 3), values=np.zeros(3), nu=st.nu) for st in states]
    report = modulation_residual(states, dummy, ProfileSpec(beta=beta), pressure_rhs=False)
    assert report.max_res1 < 1e-10
    assert report.max_res2 < 1e-10
    assert math.isnan(report.res1[0]) and math.isnan(report.res2[-1])
    assert not report.pressure_fed_back


def test_residual_needs_three_states():
    states = [ModulationState(lam=1.0, nu=0.1, s=float(s), t=float(s)) for s in (1.0, 2.0)]
    with pytest.raises(ContractError):
        modulation_residual(states, [None, None], ProfileSpec(beta=0.0))


def test_prediction_without_pressure_is_linear_collapse():
    beta, lam0, nu0 = 0.5, 1e-2, 0.05
    prediction = predict_parameters(beta, lam0, nu0, constant=0.0)
    assert prediction.blowup_time == pytest.approx(lam0, rel=1e-8)
    expected_nu = nu0 * (prediction.lam[-1] / lam0) ** beta
    assert prediction.nu[-1] == pytest.approx(expected_nu, rel=1e-5)


def test_prediction_with_pressure_collapses():
    lam0 = 1e-3
    prediction = predict_parameters(0.0, lam0, 1.0 / math.log(1.0 / lam0))
    assert lam0 < prediction.blowup_time < 10.0 * lam0


def test_trapped_windows_smooth():
    s = np.array([2.0, 3.0, 4.0])
    cfg = EnergyConfig.for_beta(0.0)
    states = [ModulationState(lam=si * math.exp(-si), nu=1.0 / si, s=si, t=float(k)) for k, si in enumerate(s)]
    energies = [EnergyReport(E1=0.0, E2=0.0, first_cell_bound=0.0, config=cfg)] * 3
    report = trapped_check(states, energies, cfg, s0=2.0)
    assert report.samples == 3
    assert all(fraction == 1.0 for fraction in report.fractions.values())
    assert "lambda_improved" in report.fractions


def test_trapped_windows_nonsmooth():
    beta = 0.5
    cfg = EnergyConfig.for_beta(beta)
    states = [ModulationState(lam=math.exp(-s), nu=0.5 * math.exp(-beta * s), s=s, t=float(s)) for s in (3.0, 4.0)]
    energies = [EnergyReport(E1=1e-3, E2=1e-3, first_cell_bound=0.0, config=cfg)] * 2
    report = trapped_check(states, energies, cfg, s0=3.0, nu_tilde0=0.5)
    assert report.fractions == {"lambda": 1.0, "nu": 1.0, "E1": 1.0, "E2": 1.0}


def test_trapped_check_needs_positive_s0():
    cfg = EnergyConfig.for_beta(0.0)
    states = [ModulationState(lam=0.1, nu=0.1, s=1.0, t=0.0)]
    with pytest.raises(ContractError):
        trapped_check(states, [EnergyReport(0.0, 0.0, 0.0, cfg)], cfg, s0=0.0)


def test_trapped_check_rejects_samples_before_s0():
    cfg = EnergyConfig.for_beta(0.0)
    states = [ModulationState(lam=0.1, nu=0.1, s=2.0, t=0.0)]
    with pytest.raises(ContractError, match="s0"):
        trapped_check(states, [EnergyReport(0.0, 0.0, 0.0, cfg)], cfg, s0=2.5)


def test_trapped_check_accepts_series_from_selfsimilar_time():
    cfg = EnergyConfig.for_beta(0.5)
    s0 = initial_selfsimilar_time(1e-2, 0.5)
    ts = np.linspace(0.0, 9e-3, 10)
    raw = [ModulationState(lam=1e-2 - t, nu=0.5 * (1e-2 - t) ** 0.5, s=0.0, t=float(t)) for t in ts]
    states = selfsimilar_time(raw, s0)
    energies = [EnergyReport(E1=0.0, E2=0.0, first_cell_bound=0.0, config=cfg)] * len(states)
    report = trapped_check(states, energies, cfg, s0, nu_tilde0=0.5)
    assert report.samples == 10
    assert report.fractions["lambda"] == 1.0
    assert report.fractions["nu"] == 1.0
