#!/usr/bin/env python3
"""
Reduced model solver
Integrates a_t - a^2 + (int_0^Z a) a_Z + 2 int_0^1 a^2 = 0 on Z in [0, 1] with upwind differencing and RK4
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import List, Optional, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid
from tqdm import tqdm

from .errors import BlowupOverflowError, ConfigError, ContractError

logger = logging.getLogger(__name__)

MIN_INTERVALS = 16
_EPS = np.finfo(float).eps


@dataclass(frozen=True, eq=False)
class Grid:
    """
    Ordered nodes on [0, 1], the image Z_j = Z(x_j) of the uniform index x_j = j/N.
    Graded grids use Z = x^g, clustered grids Z = (exp(c x) - 1) / (exp(c) - 1).
    """

    nodes: np.ndarray
    grading: float = 1.0
    cluster: float = 0.0

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        if nodes.ndim != 1 or nodes.size < MIN_INTERVALS + 1:
            raise ConfigError(f"grid needs N >= {MIN_INTERVALS} intervals, got {nodes.size - 1}")
        if nodes[0] != 0.0 or nodes[-1] != 1.0:
            raise ConfigError("grid must start at Z=0 and end at Z=1")
        if not np.all(np.diff(nodes) > 0.0):
            raise ConfigError("grid nodes must be strictly increasing")
        if self.grading < 1.0:
            raise ConfigError(f"grading exponent must satisfy g >= 1, got {self.grading}")

    @classmethod
    def graded(cls, n: int, g: float = 1.0) -> "Grid":
        if n < MIN_INTERVALS:
            raise ConfigError(f"grid needs N >= {MIN_INTERVALS} intervals, got {n}")
        nodes = (np.arange(n + 1) / n) ** g
        nodes[-1] = 1.0
        return cls(nodes=nodes, grading=g)

    @classmethod
    def clustered(cls, n: int, cluster: float) -> "Grid":
        """Log-clustered nodes (exp(c x) - 1) / (exp(c) - 1), denser near Z=0 for c > 0"""
        if n < MIN_INTERVALS:
            raise ConfigError(f"grid needs N >= {MIN_INTERVALS} intervals, got {n}")
        if cluster <= 0.0:
            return cls.graded(n, 1.0)
        x = np.arange(n + 1) / n
        nodes = np.expm1(cluster * x) / math.expm1(cluster)
        nodes[0], nodes[-1] = 0.0, 1.0
        return cls(nodes=nodes, grading=1.0, cluster=cluster)

    @property
    def n(self) -> int:
        return self.nodes.size - 1

    @property
    def spacing(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def index_step(self) -> float:
        return 1.0 / self.n

    @cached_property
    def jacobian(self) -> np.ndarray:
        """dZ/dx at the nodes; analytic for graded and clustered grids"""
        x = np.arange(self.n + 1) / self.n
        if self.cluster > 0.0:
            return self.cluster * np.exp(self.cluster * x) / math.expm1(self.cluster)
        if np.allclose(self.nodes, x ** self.grading, rtol=0.0, atol=1e-14):
            return self.grading * x ** (self.grading - 1.0)
        return np.gradient(self.nodes, x, edge_order=2)


@dataclass(frozen=True, eq=False)
class Field:
    """Nodal values of a(t, Z) on a grid"""

    grid: Grid
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.shape != self.grid.nodes.shape:
            raise ContractError(f"field has {values.size} values for {self.grid.nodes.size} nodes")
        if not np.all(np.isfinite(values)):
            raise ContractError(f"field has non-finite values at t={self.time:.17g}")

    def with_values(self, values: np.ndarray, time: Optional[float] = None) -> "Field":
        return Field(self.grid, values, self.time if time is None else time)

    def mean(self) -> float:
        return float(trapezoid(self.values, self.grid.nodes))

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))


class MeanMode(str, Enum):
    LITERAL = "literal"
    PROJECTED = "projected"


class Termination(str, Enum):
    HORIZON = "horizon"
    SUP_NORM_STOP = "sup_norm_stop"
    MAX_STEPS = "max_steps"
    BLOWUP_OVERFLOW = "blowup_overflow"
    DT_UNDERFLOW = "dt_underflow"


@dataclass(frozen=True)
class SolverConfig:
    """
    Time integration settings.
    dt = min(cfl x transport bound, reaction_cfl / (sup + 1)); the stop level
    defaults to sup_stop_factor x max(initial sup, 1).
    """

    pressure_on: bool = True
    cfl: float = 0.2
    reaction_cfl: float = 0.05
    sup_norm_stop: Optional[float] = None
    sup_stop_factor: float = 1e4
    mean_mode: MeanMode = MeanMode.LITERAL
    max_steps: int = 1_000_000
    snapshot_growth: float = 1.05

    def __post_init__(self):
        object.__setattr__(self, "mean_mode", MeanMode(self.mean_mode))
        if not 0.0 < self.cfl < 1.0:
            raise ConfigError(f"solver.cfl must satisfy 0 < cfl < 1, got {self.cfl}")
        if not 0.0 < self.reaction_cfl < 1.0:
            raise ConfigError(f"solver.reaction_cfl must satisfy 0 < reaction_cfl < 1, got {self.reaction_cfl}")
        if self.sup_norm_stop is not None and not self.sup_norm_stop > 0.0:
            raise ConfigError(f"solver.sup_norm_stop must be positive, got {self.sup_norm_stop}")
        if not self.sup_stop_factor > 1.0:
            raise ConfigError(f"solver.sup_stop_factor must exceed 1, got {self.sup_stop_factor}")
        if self.max_steps < 1:
            raise ConfigError(f"solver.max_steps must be >= 1, got {self.max_steps}")
        if not self.snapshot_growth > 1.0:
            raise ConfigError(f"solver.snapshot_growth must exceed 1, got {self.snapshot_growth}")

    def stop_level(self, initial_sup: float) -> float:
        level = self.sup_norm_stop if self.sup_norm_stop is not None else self.sup_stop_factor * max(initial_sup, 1.0)
        if level <= initial_sup:
            raise ConfigError(f"sup_norm_stop={level:.6g} must exceed the initial sup norm {initial_sup:.6g}")
        return level


@dataclass(frozen=True)
class StepRecord:
    t: float
    sup: float
    dZa0: float
    mean: float
    dt: float
    right: float  # a(t, 1)


@dataclass
class Trajectory:
    snapshots: List[Field] = field(default_factory=list)
    records: List[StepRecord] = field(default_factory=list)
    status: Termination = Termination.HORIZON
    stop_level: float = math.inf
    steps: int = 0

    def times(self) -> np.ndarray:
        return np.array([r.t for r in self.records])

    def sups(self) -> np.ndarray:
        return np.array([r.sup for r in self.records])

    @property
    def final(self) -> Field:
        return self.snapshots[-1]


def cumulative_integral(f: Field) -> Field:
    """int_0^Z a by cumulative trapezoid, zero at Z=0"""
    return f.with_values(cumulative_trapezoid(f.values, f.grid.nodes, initial=0.0))


def boundary_slope(f: Field) -> float:
    """Second-order one-sided a_Z at Z=0 on a nonuniform grid"""
    z, a = f.grid.nodes, f.values
    h1, h2 = z[1] - z[0], z[2] - z[1]
    return float(
        -a[0] * (2.0 * h1 + h2) / (h1 * (h1 + h2))
        + a[1] * (h1 + h2) / (h1 * h2)
        - a[2] * h1 / (h2 * (h1 + h2))
    )


def upwind_index_slope(a: np.ndarray, speed: np.ndarray, dx: float) -> np.ndarray:
    """
    Second-order upwind da/dx on the uniform index grid.
    Backward (3a_j - 4a_{j-1} + a_{j-2}) / 2dx where speed >= 0, the mirrored forward
    stencil otherwise; central next to each end, one-sided second order at the ends.
    """
    backward = np.empty_like(a)
    forward = np.empty_like(a)
    backward[2:] = (3.0 * a[2:] - 4.0 * a[1:-1] + a[:-2]) / (2.0 * dx)
    backward[1] = (a[2] - a[0]) / (2.0 * dx)
    backward[0] = (-3.0 * a[0] + 4.0 * a[1] - a[2]) / (2.0 * dx)
    forward[:-2] = (-3.0 * a[:-2] + 4.0 * a[1:-1] - a[2:]) / (2.0 * dx)
    forward[-2] = (a[-1] - a[-3]) / (2.0 * dx)
    forward[-1] = (3.0 * a[-1] - 4.0 * a[-2] + a[-3]) / (2.0 * dx)
    return np.where(speed >= 0.0, backward, forward)


def _rate(grid: Grid, a: np.ndarray, pressure_on: bool) -> np.ndarray:
    nodes, jac = grid.nodes, grid.jacobian
    speed = cumulative_trapezoid(a, nodes, initial=0.0)
    # (int_0^Z a) a_Z = (speed / J) da/dx; speed vanishes wherever J does
    carried = np.divide(speed, jac, out=np.zeros_like(speed), where=jac > 0.0)
    rate = a * a - carried * upwind_index_slope(a, speed, grid.index_step)
    if pressure_on:
        rate -= 2.0 * trapezoid(a * a, nodes)
    return rate


def rhs(f: Field, cfg: SolverConfig) -> np.ndarray:
    """a^2 - (int_0^Z a) a_Z - 2 int a^2 [pressure_on], upwinded against the sign of int_0^Z a"""
    return _rate(f.grid, f.values, cfg.pressure_on)


def adaptive_dt(f: Field, cfg: SolverConfig) -> float:
    grid = f.grid
    speed = np.abs(cumulative_trapezoid(f.values, grid.nodes, initial=0.0))
    local = grid.index_step * grid.jacobian
    moving = speed[1:] > 0.0
    transport = float(np.min(local[1:][moving] / speed[1:][moving])) if np.any(moving) else math.inf
    reaction = cfg.reaction_cfl / (f.sup() + 1.0)
    return min(cfg.cfl * transport, reaction)


def step(f: Field, dt: float, cfg: SolverConfig) -> Field:
    """One classical RK4 step"""
    if not dt > 0.0:
        raise ContractError(f"time step must be positive, got {dt}")
    grid, a = f.grid, f.values
    with np.errstate(over="ignore", invalid="ignore"):
        k1 = _rate(grid, a, cfg.pressure_on)
        k2 = _rate(grid, a + 0.5 * dt * k1, cfg.pressure_on)
        k3 = _rate(grid, a + 0.5 * dt * k2, cfg.pressure_on)
        k4 = _rate(grid, a + dt * k3, cfg.pressure_on)
        new = a + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(new)):
        raise BlowupOverflowError(f"non-finite values after step at t={f.time + dt:.17g}", last_field=f)
    if cfg.mean_mode is MeanMode.PROJECTED:
        new = new - trapezoid(new, grid.nodes)
    return Field(grid, new, f.time + dt)


def _record(f: Field, dt: float) -> StepRecord:
    return StepRecord(t=f.time, sup=f.sup(), dZa0=boundary_slope(f), mean=f.mean(), dt=dt, right=float(f.values[-1]))


class ReducedModelIntegrator:
    """Drives RK4 steps until the horizon, the sup-norm stop or the step budget"""

    def __init__(self, cfg: SolverConfig, progress: bool = False):
        self.cfg = cfg
        self.progress = progress
        self.stats = {
            'steps': 0,
            'snapshots': 0,
            'clipped_steps': 0,
        }

    def integrate(self, f0: Field, horizon: float, output_times: Sequence[float] = ()) -> Trajectory:
        cfg = self.cfg
        stop = cfg.stop_level(f0.sup())
        pending = sorted({float(t) for t in output_times if f0.time < t <= horizon})
        traj = Trajectory(snapshots=[f0], records=[_record(f0, 0.0)], stop_level=stop)
        f = f0
        last_snapshot_sup = max(f0.sup(), _EPS)

        total = horizon - f0.time if math.isfinite(horizon) else None
        bar = tqdm(total=total, desc="integrating", unit="t", disable=not self.progress, leave=False)
        try:
            while True:
                if f.time >= horizon:
                    traj.status = Termination.HORIZON
                    break
                if f.sup() >= stop:
                    traj.status = Termination.SUP_NORM_STOP
                    break
                if traj.steps >= cfg.max_steps:
                    traj.status = Termination.MAX_STEPS
                    break

                dt = adaptive_dt(f, cfg)
                target = pending[0] if pending else horizon
                landing = f.time + dt >= target
                if landing:
                    dt = target - f.time
                    self.stats['clipped_steps'] += 1
                try:
                    f_next = step(f, dt, cfg)
                except BlowupOverflowError:
                    logger.warning("overflow at t=%.17g after %d steps", f.time + dt, traj.steps)
                    traj.status = Termination.BLOWUP_OVERFLOW
                    break
                if landing:
                    f_next = f_next.with_values(f_next.values, target)
                elif f_next.time == f.time:
                    logger.warning("time step underflow at t=%.17g", f.time)
                    traj.status = Termination.DT_UNDERFLOW
                    break
                f = f_next
                traj.steps += 1
                traj.records.append(_record(f, dt))
                bar.update(dt)

                if pending and f.time >= pending[0]:
                    while pending and pending[0] <= f.time:
                        pending.pop(0)
                    traj.snapshots.append(f)
                    last_snapshot_sup = max(f.sup(), _EPS)
                elif f.sup() >= last_snapshot_sup * cfg.snapshot_growth:
                    traj.snapshots.append(f)
                    last_snapshot_sup = f.sup()
        finally:
            bar.close()

        if traj.snapshots[-1] is not f:
            traj.snapshots.append(f)
        self.stats['steps'] += traj.steps
        self.stats['snapshots'] += len(traj.snapshots)
        logger.info("run finished: %s after %d steps at t=%.6g, sup=%.6g",
                    traj.status.value, traj.steps, f.time, f.sup())
        return traj


def run(f0: Field, cfg: SolverConfig, horizon: float, output_times: Sequence[float] = (),
        progress: bool = False) -> Trajectory:
    return ReducedModelIntegrator(cfg, progress=progress).integrate(f0, horizon, output_times)


@dataclass(frozen=True)
class MeanReport:
    zero_mean_initial: bool
    max_abs_mean: float
    max_relative_mean: float
    law_residual: float
    ode_deviation: float


def mean_evolution_check(traj: Trajectory) -> MeanReport:
    """Check m' = -m a(t, 1) along the recorded steps"""
    if len(traj.records) < 3:
        raise ContractError(f"mean check needs at least 3 recorded steps, got {len(traj.records)}")
    t = traj.times()
    m = np.array([r.mean for r in traj.records])
    right = np.array([r.right for r in traj.records])
    sups = np.maximum(traj.sups(), _EPS)

    slope = np.gradient(m, t)
    law = slope + m * right
    scale = max(float(np.max(np.abs(slope))), float(np.max(np.abs(m * right))), _EPS)
    predicted = m[0] * np.exp(-cumulative_trapezoid(right, t, initial=0.0))
    return MeanReport(
        zero_mean_initial=abs(m[0]) <= 1e-14 * sups[0],
        max_abs_mean=float(np.max(np.abs(m))),
        max_relative_mean=float(np.max(np.abs(m) / sups)),
        law_residual=float(np.max(np.abs(law[1:-1]))) / scale,
        ode_deviation=float(np.max(np.abs(m - predicted))) / max(float(np.max(np.abs(m))), _EPS),
    )


def node_zero_deviation(traj: Trajectory, pressure_on: bool = True) -> float:
    """Relative gap between a(t, 0) and the scalar ODE a0' = a0^2 - 2P(t) integrated along the snapshots"""
    if len(traj.snapshots) < 2:
        raise ContractError("node-zero check needs at least 2 snapshots")
    times = np.array([f.time for f in traj.snapshots])
    observed = np.array([f.values[0] for f in traj.snapshots])
    pressure = np.array([trapezoid(f.values ** 2, f.grid.nodes) for f in traj.snapshots])
    if not pressure_on:
        pressure = np.zeros_like(pressure)
    # 1/a0 satisfies (1/a0)' = -1 + 2P/a0^2; integrate with the observed a0 in the forcing
    inverse = 1.0 / observed[0] + cumulative_trapezoid(-1.0 + 2.0 * pressure / observed ** 2, times, initial=0.0)
    return float(np.max(np.abs(1.0 / inverse - observed) / np.abs(observed)))
