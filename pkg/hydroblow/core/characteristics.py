#!/usr/bin/env python3
"""
Lagrangian oracle for the reduced model
Particles move with dZ/dt = int_0^Z a and carry da/dt = a^2 - 2 int_0^1 a^2
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from .errors import BlowupOverflowError, ContractError, ParticleCrossingError
from .reduced_pde import MIN_INTERVALS, Field, Grid

logger = logging.getLogger(__name__)

_EPS = np.finfo(float).eps


@dataclass(frozen=True, eq=False)
class ParticleSet:
    """Particle positions and carried values; particles beyond Z=1 have left the domain"""

    positions: np.ndarray
    values: np.ndarray
    time: float = 0.0

    @property
    def n_particles(self) -> int:
        return int(self.positions.size)

    def in_domain(self) -> np.ndarray:
        return self.positions <= 1.0


def _domain_profile(x: np.ndarray, v: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Piecewise-linear data over [0, 1]; an inflow gap at Z=1 is closed by constant extension"""
    inside = x <= 1.0
    xs, vs = x[inside], v[inside]
    if xs[-1] < 1.0:
        edge = vs[-1] if inside.all() else np.interp(1.0, x, v)
        xs = np.append(xs, 1.0)
        vs = np.append(vs, edge)
    return xs, vs


def _domain_integral(x: np.ndarray, v: np.ndarray) -> float:
    xs, vs = _domain_profile(x, v)
    return float(trapezoid(vs, xs))


def _particle_rates(x: np.ndarray, v: np.ndarray, pressure_on: bool) -> Tuple[np.ndarray, np.ndarray]:
    speed = cumulative_trapezoid(v, x, initial=0.0)
    growth = v * v
    if pressure_on:
        growth = growth - 2.0 * _domain_integral(x, v * v)
    return speed, growth


def _particle_dt(x: np.ndarray, v: np.ndarray, cfl: float, reaction_cfl: float) -> float:
    speed = cumulative_trapezoid(v, x, initial=0.0)
    closing = np.abs(np.diff(speed))
    transport = float(np.min(np.diff(x) / (closing + _EPS)))
    reaction = reaction_cfl / (float(np.max(np.abs(v))) + 1.0)
    return min(cfl * transport, reaction)


def integrate_characteristics(f0: Field, n_particles: int, t_end: float, pressure_on: bool = True,
                              cfl: float = 0.2, reaction_cfl: float = 0.05,
                              max_steps: int = 1_000_000) -> ParticleSet:
    """RK4 on the coupled particle system; n_particles counts intervals, so n_particles + 1 particles are seeded"""
    if n_particles < MIN_INTERVALS:
        raise ContractError(f"need at least {MIN_INTERVALS} particle intervals, got {n_particles}")
    if t_end < f0.time:
        raise ContractError(f"t_end={t_end} precedes the initial time {f0.time}")

    if n_particles == f0.grid.n:
        x = f0.grid.nodes.copy()
    else:
        x = Grid.graded(n_particles, f0.grid.grading).nodes
    v = np.interp(x, f0.grid.nodes, f0.values)
    t = f0.time

    steps = 0
    while t < t_end:
        if steps >= max_steps:
            raise ContractError(f"characteristics did not reach t_end={t_end} within {max_steps} steps")
        dt = _particle_dt(x, v, cfl, reaction_cfl)
        landing = t + dt >= t_end
        if landing:
            dt = t_end - t

        with np.errstate(over="ignore", invalid="ignore"):
            k1x, k1v = _particle_rates(x, v, pressure_on)
            k2x, k2v = _particle_rates(x + 0.5 * dt * k1x, v + 0.5 * dt * k1v, pressure_on)
            k3x, k3v = _particle_rates(x + 0.5 * dt * k2x, v + 0.5 * dt * k2v, pressure_on)
            k4x, k4v = _particle_rates(x + dt * k3x, v + dt * k3v, pressure_on)
            x_new = x + (dt / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
            v_new = v + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)

        if not (np.all(np.isfinite(x_new)) and np.all(np.isfinite(v_new))):
            raise BlowupOverflowError(f"particle values overflowed near t={t + dt:.17g}",
                                      last_field=ParticleSet(x, v, t))
        if not np.all(np.diff(x_new) > 0.0):
            bad = int(np.argmin(np.diff(x_new)))
            raise ParticleCrossingError(
                f"particles {bad} and {bad + 1} crossed near t={t + dt:.6g} (Z={x_new[bad]:.6g})"
            )
        x, v = x_new, v_new
        t = t_end if landing else t + dt
        steps += 1

    logger.info("characteristics reached t=%.6g in %d steps with %d particles", t, steps, x.size)
    return ParticleSet(positions=x, values=v, time=t)


def reconstruct(ps: ParticleSet, nodes: np.ndarray) -> np.ndarray:
    """Piecewise-linear field on the given nodes"""
    xs, vs = _domain_profile(ps.positions, ps.values)
    return np.interp(nodes, xs, vs)


@dataclass(frozen=True)
class ComparisonReport:
    discrepancy: float
    relative: float
    n_particles: int
    n_nodes: int
    time: float


def compare_to_eulerian(ps: ParticleSet, f: Field) -> ComparisonReport:
    """Sup of |reconstructed particles - field| over the nodes covered by particles"""
    if abs(ps.time - f.time) > 1e-12 * max(1.0, abs(f.time)):
        raise ContractError(f"particle time {ps.time:.17g} differs from field time {f.time:.17g}")
    covered = min(1.0, float(np.max(ps.positions)))
    mask = f.grid.nodes <= covered
    nodes = f.grid.nodes[mask]
    gap = float(np.max(np.abs(reconstruct(ps, nodes) - f.values[mask]))) if nodes.size else 0.0
    scale = f.sup()
    return ComparisonReport(
        discrepancy=gap,
        relative=gap / scale if scale > 0.0 else gap,
        n_particles=ps.n_particles,
        n_nodes=int(f.grid.nodes.size),
        time=f.time,
    )
