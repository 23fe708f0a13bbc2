#!/usr/bin/env python3
"""
2D reduction check
Lifts a(t, Z) to u = -X a, w = int_0^Z a, p = -X^2 int a^2 and measures the 2D momentum residual
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from ...core.errors import ContractError
from ...core.reduced_pde import Field


@dataclass(frozen=True, eq=False)
class Lift2D:
    """Fields on the (X, Z) tensor grid, indexed [x, z]"""

    x: np.ndarray
    z: np.ndarray
    u: np.ndarray
    w: np.ndarray
    p: np.ndarray


def lift_to_2d(f: Field, x_nodes) -> Lift2D:
    x = np.asarray(x_nodes, dtype=float)
    if x.ndim != 1 or x.size < 3 or not np.all(np.diff(x) > 0.0):
        raise ContractError("x_nodes must be at least 3 increasing values")
    z = f.grid.nodes
    a = f.values
    ones = np.ones((x.size, z.size))
    u = -x[:, None] * a[None, :]
    w = cumulative_trapezoid(a, z, initial=0.0)[None, :] * ones
    p = -(x ** 2)[:, None] * float(trapezoid(a * a, z)) * ones
    return Lift2D(x=x, z=z, u=u, w=w, p=p)


def divergence_residual(lift: Lift2D) -> float:
    """sup |u_X + w_Z| at cell midpoints"""
    u_x = np.diff(lift.u, axis=0) / np.diff(lift.x)[:, None]
    w_z = np.diff(lift.w, axis=1) / np.diff(lift.z)[None, :]
    u_x_mid = 0.5 * (u_x[:, 1:] + u_x[:, :-1])
    w_z_mid = 0.5 * (w_z[1:, :] + w_z[:-1, :])
    return float(np.max(np.abs(u_x_mid + w_z_mid)))


def momentum_residual(lift: Lift2D, a_rate: np.ndarray) -> float:
    """sup |u_t + u u_X + w u_Z + p_X| with u_t = -X a_rate"""
    a_rate = np.asarray(a_rate, dtype=float)
    if a_rate.shape != lift.z.shape:
        raise ContractError("a_rate must be nodal on the lifted Z grid")
    u_t = -lift.x[:, None] * a_rate[None, :]
    u_x = np.gradient(lift.u, lift.x, axis=0, edge_order=2)
    u_z = np.gradient(lift.u, lift.z, axis=1, edge_order=2)
    p_x = np.gradient(lift.p, lift.x, axis=0, edge_order=2)
    return float(np.max(np.abs(u_t + lift.u * u_x + lift.w * u_z + p_x)))
