#!/usr/bin/env python3
"""
Modulation diagnostics
Splits a(t, Z) = (phi(Z/nu) + eps(Z/nu)) / lambda, tracks the self-similar time s,
the remainder energies and both modulation equations
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid, solve_ivp, trapezoid
from scipy.optimize import OptimizeWarning, curve_fit
from scipy.special import lambertw

from .errors import ContractError, GaugeError, ModulationDomainError
from .profile import ProfileSpec, pressure_constant, profile_table
from .reduced_pde import Field, Trajectory, boundary_slope

logger = logging.getLogger(__name__)

DEFAULT_GAUGE_CELLS = 16


@dataclass(frozen=True)
class ModulationState:
    lam: float
    nu: float
    s: float
    t: float

    def __post_init__(self):
        if not (self.lam > 0.0 and self.nu > 0.0):
            raise GaugeError(f"modulation parameters must be positive, got lambda={self.lam}, nu={self.nu}")


@dataclass(frozen=True, eq=False)
class EpsilonField:
    """Remainder eps on the self-similar grid z = Z / nu"""

    zgrid: np.ndarray
    values: np.ndarray
    nu: float
    clamped: int = 0


@dataclass(frozen=True)
class EnergyConfig:
    """Weight and decay parameters of the remainder energies"""

    beta: float
    eta: float
    delta: float
    alpha: float
    big_k: float
    zstar: float

    def __post_init__(self):
        if self.zstar < 1.0:
            raise ContractError(f"energy.zstar must satisfy zstar >= 1, got {self.zstar}")
        if self.beta > 0.0:
            if not 0.0 < self.eta < min(self.beta, 1.0):
                raise ContractError(
                    f"energy.eta must satisfy 0 < eta < min(beta, 1) = {min(self.beta, 1.0):g}, got {self.eta}"
                )
            if not -1.0 < self.alpha < 1.0:
                raise ContractError(f"weight exponent alpha={self.alpha} must lie in (-1, 1)")
            if self.big_k < 1.0:
                raise ContractError(f"energy.K must satisfy K >= 1, got {self.big_k}")
        if not self.delta > 0.0:
            raise ContractError(f"decay rate delta must be positive, got {self.delta}")

    @classmethod
    def for_beta(cls, beta: float, eta: Optional[float] = None, zstar: float = 4.0,
                 big_k: float = 8.0) -> "EnergyConfig":
        """Defaults: eta = min(beta, 1)/2, z* = 4, K = 8; beta = 0 uses w = z^-2 and the s^(-4/3) target"""
        if beta == 0.0:
            return cls(beta=0.0, eta=0.0, delta=4.0 / 3.0, alpha=-2.0, big_k=0.0, zstar=zstar)
        m = min(beta, 1.0)
        eta = 0.5 * m if eta is None else eta
        alpha = (abs(1.0 - beta) - 2.0 + 0.5 * eta) / (beta + 1.0)
        return cls(beta=beta, eta=eta, delta=2.0 * m - eta, alpha=alpha, big_k=big_k, zstar=zstar)

    @property
    def is_smooth(self) -> bool:
        return self.beta == 0.0

    def weight(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        if self.is_smooth:
            return z ** -2.0
        return z ** self.alpha * np.exp(-self.big_k * z)


@dataclass(frozen=True)
class EnergyReport:
    E1: float
    E2: float
    first_cell_bound: float
    config: EnergyConfig


def extract_modulation(f: Field, beta: float, fit_window: Optional[float] = None,
                       spec: Optional[ProfileSpec] = None,
                       gauge_cells: int = DEFAULT_GAUGE_CELLS) -> ModulationState:
    """lambda = 1/a(t,0); nu from the slope at 0 (beta = 0) or a profile fit near Z = 0 (beta > 0)"""
    a0 = float(f.values[0])
    if not a0 > 0.0:
        raise GaugeError(f"a(t,0) must be positive to fix lambda, got {a0:.6g} at t={f.time:.6g}")
    lam = 1.0 / a0

    if beta == 0.0:
        slope = boundary_slope(f)
        if not slope < 0.0:
            raise GaugeError(f"a_Z(t,0) must be negative for the beta=0 gauge, got {slope:.6g}")
        nu = -a0 / slope
    else:
        nu = _fit_cusp_scale(f, lam, beta, fit_window, spec, gauge_cells)

    if not 0.0 < nu <= 1.0:
        raise GaugeError(f"extracted nu={nu:.6g} outside (0, 1] at t={f.time:.6g}")
    return ModulationState(lam=lam, nu=nu, s=0.0, t=f.time)


def _fit_cusp_scale(f: Field, lam: float, beta: float, fit_window: Optional[float],
                    spec: Optional[ProfileSpec], gauge_cells: int) -> float:
    nodes = f.grid.nodes
    window = fit_window if fit_window is not None else nodes[min(gauge_cells, nodes.size - 1)]
    mask = (nodes > 0.0) & (nodes <= window)
    if np.count_nonzero(mask) < 2:
        raise GaugeError(f"fit window {window:.3g} holds fewer than 2 grid nodes")
    zs = nodes[mask]
    scaled = lam * f.values[mask]

    # leading term 1 - lambda a ~ (Z/nu)^(1/(beta+1)) seeds the fit
    deficit = 1.0 - scaled
    usable = deficit > 0.0
    if not np.any(usable):
        raise GaugeError("lambda a(t,Z) does not fall below 1 inside the fit window")
    log_nu0 = float(np.mean(np.log(zs[usable]) - (beta + 1.0) * np.log(deficit[usable])))

    table = profile_table(spec if spec is not None else ProfileSpec(beta=beta))

    def model(z, log_nu):
        return table.phi(z / math.exp(log_nu))

    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", OptimizeWarning)
            popt, _ = curve_fit(model, zs, scaled, p0=[log_nu0])
    except (RuntimeError, ValueError) as e:
        raise GaugeError(f"cusp fit failed: {e}") from e
    if not np.isfinite(popt[0]):
        raise GaugeError("cusp fit returned a non-finite scale")
    return math.exp(float(popt[0]))


def to_selfsimilar(f: Field, m: ModulationState, spec: ProfileSpec,
                   zgrid: Optional[Sequence[float]] = None) -> EpsilonField:
    """eps(z) = lambda a(t, nu z) - phi(z); defaults to the grid nodes mapped to z"""
    if abs(m.t - f.time) > 1e-12 * max(1.0, abs(f.time)):
        raise ContractError(f"modulation state time {m.t:.17g} differs from field time {f.time:.17g}")
    table = profile_table(spec)
    nodes = f.grid.nodes
    if zgrid is None:
        z = nodes / m.nu
        values = f.values
        clamped = 0
    else:
        z = np.asarray(zgrid, dtype=float)
        big_z = z * m.nu
        clamped = int(np.count_nonzero(big_z > 1.0))
        if clamped:
            logger.warning("to_selfsimilar: %d z nodes beyond 1/nu clamped to Z=1", clamped)
        values = np.interp(np.minimum(big_z, 1.0), nodes, f.values)
    eps = m.lam * values - table.phi(z)
    return EpsilonField(zgrid=z, values=eps, nu=m.nu, clamped=clamped)


def _clip_to(z: np.ndarray, values: np.ndarray, upper: float):
    keep = z < upper
    return np.append(z[keep], upper), np.append(values[keep], np.interp(upper, z, values))


def _interior_cells(e: EpsilonField, cfg: EnergyConfig):
    if e.zgrid[-1] < cfg.zstar:
        raise ModulationDomainError(
            f"self-similar grid ends at z={e.zgrid[-1]:.6g}, short of z*={cfg.zstar:g}"
        )
    z, eps = _clip_to(e.zgrid, e.values, cfg.zstar)
    if z.size < 3:
        raise ModulationDomainError(f"fewer than 2 cells inside [0, z*={cfg.zstar:g}]")
    dz = np.diff(z)
    return z, 0.5 * (z[1:] + z[:-1]), np.diff(eps) / dz, dz


def energy_E1(e: EpsilonField, cfg: EnergyConfig, beta: Optional[float] = None) -> float:
    """sqrt(int_0^z* w eps_z^2) by cell midpoints; the first cell is left to first_cell_bound"""
    if beta is not None and beta != cfg.beta:
        raise ContractError(f"energy config built for beta={cfg.beta}, called with beta={beta}")
    _, mid, slope, dz = _interior_cells(e, cfg)
    density = cfg.weight(mid[1:]) * slope[1:] ** 2 * dz[1:]
    return math.sqrt(float(np.sum(density)))


def first_cell_bound(e: EpsilonField, cfg: EnergyConfig) -> float:
    """Bound of the omitted first-cell contribution to E1^2 from eps_z ~ c z^(2/(beta+1) - 1)"""
    z, mid, slope, _ = _interior_cells(e, cfg)
    q = 2.0 / (cfg.beta + 1.0) - 1.0
    power = cfg.alpha + 2.0 * q + 1.0
    coeff = abs(slope[1]) / mid[1] ** q
    return coeff ** 2 * z[1] ** power / power


def energy_E2(e: EpsilonField, cfg: EnergyConfig, m: Optional[ModulationState] = None) -> float:
    """sup |eps| over [z*, 1/nu]"""
    nu = m.nu if m is not None else e.nu
    upper = 1.0 / nu
    if upper < cfg.zstar or e.zgrid[-1] < cfg.zstar:
        raise ModulationDomainError(f"window [z*={cfg.zstar:g}, 1/nu={upper:.6g}] not covered by the grid")
    mask = (e.zgrid >= cfg.zstar) & (e.zgrid <= upper * (1.0 + 1e-12))
    edge = abs(float(np.interp(cfg.zstar, e.zgrid, e.values)))
    if not np.any(mask):
        return edge
    return max(edge, float(np.max(np.abs(e.values[mask]))))


def energy_report(e: EpsilonField, cfg: EnergyConfig, m: Optional[ModulationState] = None) -> EnergyReport:
    return EnergyReport(E1=energy_E1(e, cfg), E2=energy_E2(e, cfg, m), first_cell_bound=first_cell_bound(e, cfg),
                        config=cfg)


def initial_closeness(e: EpsilonField, cfg: EnergyConfig) -> EnergyReport:
    """Energies of the initial remainder"""
    return energy_report(e, cfg)


def initial_selfsimilar_time(lambda0: float, beta: float) -> float:
    """s0 with lambda0 = exp(-s0) (beta > 0) or lambda0 = s0 exp(-s0), s0 > 1 (beta = 0)"""
    if not lambda0 > 0.0:
        raise ContractError(f"lambda0 must be positive, got {lambda0}")
    if beta > 0.0:
        return -math.log(lambda0)
    if lambda0 > math.exp(-1.0):
        raise ContractError(f"s exp(-s) = lambda0 has no root with s > 1 for lambda0={lambda0} > 1/e")
    return float(-lambertw(-lambda0, k=-1).real)


def selfsimilar_time(states: Sequence[ModulationState], s0: float,
                     traj: Optional[Trajectory] = None) -> List[ModulationState]:
    """s(t) = s0 + int dt / lambda by trapezoid over the samples"""
    if not states:
        return []
    if traj is not None:
        snapshot_times = {f.time for f in traj.snapshots}
        stray = [st.t for st in states if st.t not in snapshot_times]
        if stray:
            raise ContractError(f"{len(stray)} states are not aligned with trajectory snapshots")
    t = np.array([st.t for st in states])
    lam = np.array([st.lam for st in states])
    if np.any(lam <= 0.0):
        raise ContractError("lambda samples must be positive")
    if t.size > 1 and not np.all(np.diff(t) > 0.0):
        raise ContractError("state times must be strictly increasing")
    s = s0 + cumulative_trapezoid(1.0 / lam, t, initial=0.0)
    return [replace(st, s=float(si)) for st, si in zip(states, s)]


@dataclass(frozen=True, eq=False)
class ModulationResidualReport:
    s: np.ndarray
    lhs1: np.ndarray
    lhs2: np.ndarray
    rhs: np.ndarray
    res1: np.ndarray  # per state, nan at the two ends
    res2: np.ndarray
    max_res1: float
    max_res2: float
    pressure_fed_back: bool


def _pressure_rhs(e: EpsilonField, table) -> float:
    """2 nu int_0^(1/nu) (phi + eps)^2 dz"""
    upper = 1.0 / e.nu
    z, eps = _clip_to(e.zgrid, e.values, upper) if e.zgrid[-1] > upper else (e.zgrid, e.values)
    return 2.0 * e.nu * float(trapezoid((table.phi(z) + eps) ** 2, z))


def modulation_residual(states: Sequence[ModulationState], eps: Sequence[EpsilonField], spec: ProfileSpec,
                        pressure_rhs: bool = True) -> ModulationResidualReport:
    """lambda_s/lambda + 1 and (-nu_s/nu - beta)/(beta+1) against 2 nu int (phi + eps)^2

    Residuals are relative to the right-hand side; with pressure_rhs off the right-hand side is zero
    and residuals are absolute.
    """
    if len(states) < 3:
        raise ContractError(f"modulation residual needs at least 3 states, got {len(states)}")
    if len(eps) != len(states):
        raise ContractError(f"{len(states)} states but {len(eps)} remainder fields")
    beta = spec.beta
    s = np.array([st.s for st in states])
    if not np.all(np.diff(s) > 0.0):
        raise ContractError("self-similar times must be strictly increasing")
    lam = np.array([st.lam for st in states])
    nu = np.array([st.nu for st in states])

    lhs1 = np.gradient(np.log(lam), s) + 1.0
    lhs2 = (-np.gradient(np.log(nu), s) - beta) / (beta + 1.0)
    if pressure_rhs:
        table = profile_table(spec)
        rhs = np.array([_pressure_rhs(e, table) for e in eps])
        scale = np.abs(rhs)
    else:
        rhs = np.zeros_like(s)
        scale = np.ones_like(s)

    res1 = np.full_like(s, np.nan)
    res2 = np.full_like(s, np.nan)
    inner = slice(1, -1)
    res1[inner] = (lhs1[inner] - rhs[inner]) / scale[inner]
    res2[inner] = (lhs2[inner] - rhs[inner]) / scale[inner]
    return ModulationResidualReport(
        s=s, lhs1=lhs1, lhs2=lhs2, rhs=rhs, res1=res1, res2=res2,
        max_res1=float(np.max(np.abs(res1[inner]))),
        max_res2=float(np.max(np.abs(res2[inner]))),
        pressure_fed_back=pressure_rhs,
    )


@dataclass(frozen=True, eq=False)
class ParameterPrediction:
    t: np.ndarray
    lam: np.ndarray
    nu: np.ndarray
    blowup_time: float


def predict_parameters(beta: float, lambda0: float, nu0: float, t_end: Optional[float] = None,
                       constant: Optional[float] = None) -> ParameterPrediction:
    """Leading-order law lambda_t = -1 + C nu, nu_t = -beta nu/lambda - C (beta+1) nu^2/lambda, C = 2 int phi^2"""
    c = pressure_constant(beta) if constant is None else constant
    floor = 1e-6 * lambda0

    def field(_t, y):
        lam, nu = y
        return [-1.0 + c * nu, -beta * nu / lam - c * (beta + 1.0) * nu * nu / lam]

    def collapse(_t, y):
        return y[0] - floor
    collapse.terminal = True
    collapse.direction = -1

    horizon = t_end if t_end is not None else 10.0 * lambda0
    sol = solve_ivp(field, (0.0, horizon), [lambda0, nu0], method="DOP853", rtol=1e-10, atol=1e-30,
                    events=collapse, dense_output=False)
    if not sol.success:
        raise ContractError(f"modulation law integration failed: {sol.message}")
    lam_end, nu_end = sol.y[0, -1], sol.y[1, -1]
    if sol.t_events[0].size:
        # lambda decreases at rate 1 - C nu near the end
        blowup = float(sol.t[-1] + lam_end / max(1.0 - c * nu_end, 1e-12))
    else:
        blowup = math.inf
    return ParameterPrediction(t=sol.t, lam=sol.y[0], nu=sol.y[1], blowup_time=blowup)


@dataclass(frozen=True)
class TrappedReport:
    fractions: Dict[str, float]
    samples: int


def trapped_check(states: Sequence[ModulationState], energies: Sequence[EnergyReport], cfg: EnergyConfig,
                  s0: float, nu_tilde0: float = 1.0, k_tilde: float = 3.0) -> TrappedReport:
    """Fraction of samples inside each trapped-regime window; the windows apply for s >= s0"""
    if len(states) != len(energies):
        raise ContractError(f"{len(states)} states but {len(energies)} energy reports")
    if not s0 > 0.0:
        raise ContractError(f"trapped windows need a positive initial self-similar time, got s0={s0}")
    s = np.array([st.s for st in states])
    lam = np.array([st.lam for st in states])
    nu = np.array([st.nu for st in states])
    e1 = np.array([r.E1 for r in energies]) ** 2
    e2 = np.array([r.E2 for r in energies]) ** 2
    if np.any(s < s0 * (1.0 - 1e-12)):
        raise ContractError(f"self-similar times must start at s0={s0:.6g}, got min s={float(np.min(s)):.6g}")

    if cfg.is_smooth:
        scale = s * np.exp(-s)
        energy_cap = s ** (-4.0 / 3.0)
        checks = {
            "lambda": (scale / 4.0 < lam) & (lam < 4.0 * scale),
            "nu": (1.0 / (4.0 * s) < nu) & (nu < 4.0 / s),
            "lambda_improved": (scale / 2.0 <= lam) & (lam <= 1.5 * scale),
            "nu_improved": (1.0 / (3.0 * s) <= nu) & (nu <= 3.0 / s),
        }
    else:
        scale = np.exp(-s)
        nu_scale = nu_tilde0 * np.exp(-cfg.beta * s)
        energy_cap = k_tilde ** 2 * np.exp(-cfg.delta * s)
        checks = {
            "lambda": (scale / k_tilde < lam) & (lam < k_tilde * scale),
            "nu": (nu_scale / k_tilde < nu) & (nu < k_tilde * nu_scale),
        }
    checks["E1"] = e1 < energy_cap
    checks["E2"] = e2 < energy_cap
    return TrappedReport(fractions={k: float(np.mean(v)) for k, v in checks.items()}, samples=int(s.size))
