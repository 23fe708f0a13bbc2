#!/usr/bin/env python3
"""
Phase 1: Initial Data
Scenario definitions and the initial fields a0 = phi(Z/nu0)/lambda0 + perturbation
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from scipy.integrate import trapezoid

from ...core.errors import ScenarioError
from ...core.modulation import EnergyConfig
from ...core.profile import ProfileSpec, eval_phi
from ...core.reduced_pde import Field, Grid, MeanMode, SolverConfig

logger = logging.getLogger(__name__)


class ScenarioKind(str, Enum):
    SMOOTH = "smooth"
    NONSMOOTH = "nonsmooth"
    PRESSURELESS_EXACT = "pressureless_exact"
    STEADY_STATE = "steady_state"
    CUSTOM = "custom"


BLOWUP_KINDS = (ScenarioKind.SMOOTH, ScenarioKind.NONSMOOTH, ScenarioKind.PRESSURELESS_EXACT, ScenarioKind.CUSTOM)


@dataclass(frozen=True)
class ScenarioSpec:
    """One experiment: initial data family, grid, solver and diagnostic settings"""

    kind: ScenarioKind = ScenarioKind.SMOOTH
    name: str = "scenario"
    beta: float = 0.0
    lambda0: float = 1e-3
    nu0: Optional[float] = None
    nu_tilde0: float = 0.5
    nu_tilde0_max: float = 1.0
    kappa: float = 0.0
    perturbation_m: int = 1
    steady_k: int = 1
    exact_T: float = 1.0
    horizon: Optional[float] = None
    grid_n: int = 512
    grid_g: Optional[float] = None
    grid_cluster: float = 0.0
    solver: Optional[SolverConfig] = None
    energy: Optional[EnergyConfig] = None
    profile: Optional[ProfileSpec] = None
    fit_window_frac: float = 0.25
    gauge_cells: int = 16
    oracle_n: int = 0
    output_times: Tuple[float, ...] = ()
    outputs_dir: str = "outputs"

    def __post_init__(self):
        object.__setattr__(self, "kind", ScenarioKind(self.kind))
        self.validate()

    def validate(self):
        """Raise ScenarioError naming the first violated constraint"""
        if not self.beta >= 0.0:
            raise ScenarioError(f"beta >= 0 violated: beta={self.beta}")
        if not self.lambda0 > 0.0:
            raise ScenarioError(f"lambda0 > 0 violated: lambda0={self.lambda0}")
        if not self.kappa >= 0.0:
            raise ScenarioError(f"kappa >= 0 violated: kappa={self.kappa}")
        if self.grid_n < 16:
            raise ScenarioError(f"grid.n >= 16 violated: grid.n={self.grid_n}")
        if self.grid_g is not None and self.grid_g < 1.0:
            raise ScenarioError(f"grid.g >= 1 violated: grid.g={self.grid_g}")
        if not 0.0 < self.fit_window_frac <= 1.0:
            raise ScenarioError(f"0 < fit.window_frac <= 1 violated: {self.fit_window_frac}")
        if self.gauge_cells < 2:
            raise ScenarioError(f"fit.gauge_cells >= 2 violated: {self.gauge_cells}")
        if self.oracle_n and self.oracle_n < 16:
            raise ScenarioError(f"oracle.n >= 16 violated: oracle.n={self.oracle_n}")
        if self.profile is not None and self.profile.beta != self.beta:
            raise ScenarioError(f"profile beta {self.profile.beta} differs from scenario beta {self.beta}")
        if self.energy is not None and self.energy.beta != self.beta:
            raise ScenarioError(f"energy beta {self.energy.beta} differs from scenario beta {self.beta}")

        if self.kind is ScenarioKind.SMOOTH:
            if self.beta != 0.0:
                raise ScenarioError(f"smooth scenarios require beta = 0, got beta={self.beta}")
            if not self.lambda0 < 1.0:
                raise ScenarioError(f"smooth scenarios require lambda0 < 1, got {self.lambda0}")
            lo, hi = self.smooth_nu_window()
            nu0 = self.resolved_nu0()
            if not lo <= nu0 <= hi:
                raise ScenarioError(
                    f"2/(3 log(1/lambda0)) <= nu0 <= 3/(2 log(1/lambda0)) violated: nu0={nu0:.6g} not in [{lo:.6g}, {hi:.6g}]"
                )
        elif self.kind is ScenarioKind.NONSMOOTH:
            if not self.beta > 0.0:
                raise ScenarioError(f"nonsmooth scenarios require beta > 0, got beta={self.beta}")
            nu_tilde = self.resolved_nu0() / self.lambda0 ** self.beta
            if not 0.0 < nu_tilde <= self.nu_tilde0_max:
                raise ScenarioError(
                    f"0 < nu0/lambda0^beta <= nu_tilde0_max violated: {nu_tilde:.6g} > {self.nu_tilde0_max:.6g}"
                )
        elif self.kind is ScenarioKind.PRESSURELESS_EXACT:
            if not self.exact_T > 0.0:
                raise ScenarioError(f"exact.T > 0 violated: {self.exact_T}")
        elif self.kind is ScenarioKind.STEADY_STATE:
            if self.steady_k < 1:
                raise ScenarioError(f"steady.k >= 1 violated: {self.steady_k}")

        if self.kind in BLOWUP_KINDS and not 0.0 < self.resolved_nu0() <= 1.0:
            raise ScenarioError(f"0 < nu0 <= 1 violated: nu0={self.resolved_nu0():.6g}")

    def smooth_nu_window(self) -> Tuple[float, float]:
        log_inv = math.log(1.0 / self.lambda0)
        return 2.0 / (3.0 * log_inv), 3.0 / (2.0 * log_inv)

    def resolved_lambda0(self) -> float:
        return self.exact_T if self.kind is ScenarioKind.PRESSURELESS_EXACT else self.lambda0

    def resolved_nu0(self) -> float:
        if self.kind is ScenarioKind.PRESSURELESS_EXACT:
            return self.exact_T ** self.beta
        if self.nu0 is not None:
            return self.nu0
        if self.beta == 0.0:
            return 1.0 / math.log(1.0 / self.lambda0) if self.lambda0 < 1.0 else 1.0
        return self.nu_tilde0 * self.lambda0 ** self.beta

    def resolved_grading(self) -> float:
        return self.grid_g if self.grid_g is not None else self.beta + 1.0

    def resolved_solver(self) -> SolverConfig:
        if self.solver is None:
            mode = MeanMode.PROJECTED if self.kind is ScenarioKind.STEADY_STATE else MeanMode.LITERAL
            solver = SolverConfig(mean_mode=mode)
        else:
            solver = self.solver
        if self.kind is ScenarioKind.PRESSURELESS_EXACT and solver.pressure_on:
            solver = replace(solver, pressure_on=False)
        return solver

    def resolved_energy(self) -> EnergyConfig:
        return self.energy if self.energy is not None else EnergyConfig.for_beta(self.beta)

    def resolved_profile(self) -> ProfileSpec:
        return self.profile if self.profile is not None else ProfileSpec(beta=self.beta)

    def resolved_horizon(self) -> float:
        if self.horizon is not None:
            return self.horizon
        if self.kind is ScenarioKind.STEADY_STATE:
            return 0.25
        return math.inf

    def resolved_output_times(self) -> Tuple[float, ...]:
        if self.output_times:
            return tuple(self.output_times)
        if self.kind is ScenarioKind.PRESSURELESS_EXACT:
            return (0.5 * self.exact_T,)
        return ()

    def build_grid(self) -> Grid:
        if self.grid_cluster > 0.0:
            return Grid.clustered(self.grid_n, self.grid_cluster)
        return Grid.graded(self.grid_n, self.resolved_grading())


@dataclass(frozen=True, eq=False)
class InitialData:
    field: Field
    mean_correction: float
    perturbation_norm: float
    lambda0: float
    nu0: float


def c2_proxy(grid: Grid, values: np.ndarray) -> float:
    """Discrete C^2 size: max of |b|, |b'| and |b''| on the nodes"""
    first = np.gradient(values, grid.nodes)
    second = np.gradient(first, grid.nodes)
    return float(max(np.max(np.abs(values)), np.max(np.abs(first)), np.max(np.abs(second))))


def perturbation(grid: Grid, kappa: float, m: int) -> np.ndarray:
    """kappa sin^2(pi Z) cos(2 pi m Z), normalized in the discrete C^2 proxy"""
    if kappa == 0.0:
        return np.zeros_like(grid.nodes)
    z = grid.nodes
    bump = np.sin(np.pi * z) ** 2 * np.cos(2.0 * np.pi * m * z)
    return kappa * bump / c2_proxy(grid, bump)


def profile_values(profile: ProfileSpec, z: np.ndarray) -> np.ndarray:
    """phi at each z through the exact scalar path"""
    return np.array([eval_phi(profile, float(x)) for x in z])


def build_initial(spec: ScenarioSpec, profile: ProfileSpec, grid: Grid) -> InitialData:
    """Nodal a0 for the scenario; projected mean mode subtracts a constant to make int a0 = 0"""
    solver = spec.resolved_solver()
    lambda0, nu0 = spec.resolved_lambda0(), spec.resolved_nu0()

    if spec.kind is ScenarioKind.STEADY_STATE:
        values = np.cos(2.0 * np.pi * spec.steady_k * grid.nodes)
        bump = np.zeros_like(values)
    else:
        values = profile_values(profile, grid.nodes / nu0) / lambda0
        bump = perturbation(grid, spec.kappa, spec.perturbation_m)
        values = values + bump

    correction = 0.0
    if solver.mean_mode is MeanMode.PROJECTED:
        correction = float(trapezoid(values, grid.nodes))
        values = values - correction
        if spec.kind is not ScenarioKind.STEADY_STATE:
            logger.warning("projected mean mode subtracted %.6g from a0 (a0(0) was %.6g)",
                           correction, values[0] + correction)

    return InitialData(
        field=Field(grid, values, 0.0),
        mean_correction=correction,
        perturbation_norm=c2_proxy(grid, bump) if spec.kappa > 0.0 else 0.0,
        lambda0=lambda0,
        nu0=nu0,
    )


class InitialDataPipeline:
    """Phase 1: build the grid, profile and initial field of a scenario"""

    def __init__(self):
        self.stats = {
            'fields_built': 0,
            'mean_corrections': 0,
            'errors': 0,
        }

    def run_initial_data(self, spec: ScenarioSpec) -> InitialData:
        """Build the initial data of one scenario"""
        print(f"📐 Building initial data for '{spec.name}' ({spec.kind.value}, beta={spec.beta:g})")
        try:
            grid = spec.build_grid()
            initial = build_initial(spec, spec.resolved_profile(), grid)
        except Exception as e:
            print(f"❌ Initial data failed: {e}")
            self.stats['errors'] += 1
            raise

        self.stats['fields_built'] += 1
        if initial.mean_correction != 0.0:
            self.stats['mean_corrections'] += 1
            print(f"⚠️ Mean correction subtracted: {initial.mean_correction:.6g}")
        print(f"✅ a0(0)={initial.field.values[0]:.6g}, sup={initial.field.sup():.6g}, "
              f"N={grid.n}, g={grid.grading:g}, C2 proxy of perturbation={initial.perturbation_norm:.3g}")
        return initial
