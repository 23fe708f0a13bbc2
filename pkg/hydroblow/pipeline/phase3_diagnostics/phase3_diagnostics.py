#!/usr/bin/env python3
"""
Phase 3: Diagnostics
Modulation series, rate-law fits, the 2D reduction check and per-scenario verdicts
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from ...config.thresholds import VerdictThresholds
from ...core.errors import ContractError, FitRejectedError, GaugeError, HydroblowError, ModulationDomainError
from ...core.modulation import (
    EnergyReport,
    ModulationResidualReport,
    ModulationState,
    ParameterPrediction,
    TrappedReport,
    energy_report,
    extract_modulation,
    initial_selfsimilar_time,
    modulation_residual,
    predict_parameters,
    selfsimilar_time,
    to_selfsimilar,
    trapped_check,
)
from ...core.profile import profile_table
from ...core.reduced_pde import MeanReport, Termination, mean_evolution_check, node_zero_deviation, rhs
from ...core.scaling_laws import (
    BlowupFit,
    DecayLaw,
    LawMode,
    LogLawTrend,
    ScaleLawFit,
    fit_blowup_time,
    fit_nu_law,
    fit_remainder_decay,
    fit_summary,
    log_law_trend,
    window_stability,
)
from ..phase1_initial_data import BLOWUP_KINDS, InitialData, ScenarioKind, ScenarioSpec
from ..phase2_simulation import SimulationResult
from .reduction_check import divergence_residual, lift_to_2d, momentum_residual
from .verdicts import Verdict, absolute_match, at_most, holds, in_window, informational, relative_match

logger = logging.getLogger(__name__)

LIFT_X_NODES = np.linspace(-1.0, 1.0, 5)

CLAIM_STOP = "run reached the blow-up stop"
CLAIM_R2 = "1/sup|a| is linear in t near T: 1 - r2"
CLAIM_STABILITY = "fitted T is stable under halving the fit window"
CLAIM_EXPONENT = "nu ~ (T - t)^beta: fitted exponent matches beta"
CLAIM_LOG_WINDOW = "nu |log(T - t)| stays in its window over the last decade"
CLAIM_LOG_TREND = "nu |log(T - t)| trends toward 1"
CLAIM_LAMBDA_RATIO = "lambda / (T - t) stays near 1 over the last decade"
CLAIM_MODULATION = "both modulation equations hold relative to 2 nu int (phi + eps)^2"
CLAIM_E2_DECAY = "E2 decays along s (power-law slope)"
BLOWUP_CLAIMS = (CLAIM_STOP, CLAIM_R2, CLAIM_STABILITY)


@dataclass(frozen=True)
class ModulationRow:
    t: float
    s: float
    lam: float
    nu: float
    E1: float
    E2: float
    res1: float
    res2: float


@dataclass
class DiagnosticsResult:
    states: List[ModulationState] = field(default_factory=list)
    rows: List[ModulationRow] = field(default_factory=list)
    energies: List[Optional[EnergyReport]] = field(default_factory=list)
    residual: Optional[ModulationResidualReport] = None
    blowup: Optional[BlowupFit] = None
    stability: Optional[float] = None
    power_law: Optional[ScaleLawFit] = None
    log_law: Optional[ScaleLawFit] = None
    trend: Optional[LogLawTrend] = None
    decay_slopes: Dict[str, float] = field(default_factory=dict)
    prediction: Optional[ParameterPrediction] = None
    trapped: Optional[TrappedReport] = None
    s0: Optional[float] = None
    mean: Optional[MeanReport] = None
    verdicts: List[Verdict] = field(default_factory=list)

    def fits(self) -> Dict[str, object]:
        summary = fit_summary(self.blowup, self.power_law, self.log_law, self.decay_slopes)
        summary["window_stability"] = self.stability
        summary["predicted_T"] = self.prediction.blowup_time if self.prediction is not None else None
        if summary["predicted_T"] is not None and not math.isfinite(summary["predicted_T"]):
            summary["predicted_T"] = None
        return summary


def last_decade(ts: np.ndarray, T: float, decades: float = 1.0) -> np.ndarray:
    """Mask of samples with t < T inside the last decades of T - t"""
    remaining = T - ts
    before = remaining > 0.0
    if not np.any(before):
        return before
    return before & (remaining <= remaining[before].min() * 10.0 ** decades)


class DiagnosticsPipeline:
    """Phase 3: turn a trajectory into modulation series, fits and verdicts"""

    def __init__(self, thresholds: Optional[VerdictThresholds] = None):
        self.thresholds = thresholds or VerdictThresholds()
        self.stats = {
            'snapshots_analyzed': 0,
            'gauge_failures': 0,
            'energy_skips': 0,
            'fits_rejected': 0,
            'verdicts_passed': 0,
            'verdicts_failed': 0,
            'errors': 0,
        }

    def _t(self, section: str, key: str):
        return self.thresholds.get(section, key)

    def run_diagnostics(self, spec: ScenarioSpec, initial: InitialData, sim: SimulationResult) -> DiagnosticsResult:
        """Analyze one simulated scenario"""
        print(f"🔍 Diagnostics for '{spec.name}' ({spec.kind.value})")
        result = DiagnosticsResult()
        traj = sim.trajectory

        if len(traj.records) >= 3:
            result.mean = mean_evolution_check(traj)

        if spec.kind in BLOWUP_KINDS:
            self._modulation_series(spec, initial, sim, result)
            self._fits(spec, sim, result)
            if spec.kind in (ScenarioKind.SMOOTH, ScenarioKind.NONSMOOTH):
                self._regime_reports(spec, initial, result)

        result.verdicts = self._verdicts(spec, initial, sim, result)
        passed = sum(1 for v in result.verdicts if v.passed is True)
        failed = sum(1 for v in result.verdicts if v.passed is False)
        self.stats['verdicts_passed'] += passed
        self.stats['verdicts_failed'] += failed
        print(f"📊 Verdicts: {passed} passed, {failed} failed, {len(result.verdicts) - passed - failed} informational")
        return result

    def _modulation_series(self, spec: ScenarioSpec, initial: InitialData, sim: SimulationResult,
                           result: DiagnosticsResult):
        profile = spec.resolved_profile()
        energy_cfg = spec.resolved_energy()
        states, eps_fields, energies = [], [], []

        for snapshot in sim.trajectory.snapshots:
            self.stats['snapshots_analyzed'] += 1
            try:
                state = extract_modulation(snapshot, spec.beta, spec=profile, gauge_cells=spec.gauge_cells)
            except GaugeError as e:
                logger.debug("gauge skipped at t=%.6g: %s", snapshot.time, e)
                self.stats['gauge_failures'] += 1
                continue
            eps = to_selfsimilar(snapshot, state, profile)
            try:
                report = energy_report(eps, energy_cfg, state)
            except ModulationDomainError as e:
                logger.debug("energies skipped at t=%.6g: %s", snapshot.time, e)
                self.stats['energy_skips'] += 1
                report = None
            states.append(state)
            eps_fields.append(eps)
            energies.append(report)

        if not states:
            print("⚠️ No snapshot satisfied the gauge conditions")
            return

        try:
            s0 = initial_selfsimilar_time(initial.lambda0, spec.beta)
        except ContractError:
            s0 = -math.log(initial.lambda0)
        result.s0 = s0
        states = selfsimilar_time(states, s0, sim.trajectory)

        pressure_rhs = spec.resolved_solver().pressure_on
        if len(states) >= 3 and np.all(np.diff([st.s for st in states]) > 0.0):
            result.residual = modulation_residual(states, eps_fields, profile, pressure_rhs=pressure_rhs)

        for i, (state, report) in enumerate(zip(states, energies)):
            res1 = float(result.residual.res1[i]) if result.residual is not None else math.nan
            res2 = float(result.residual.res2[i]) if result.residual is not None else math.nan
            result.rows.append(ModulationRow(
                t=state.t, s=state.s, lam=state.lam, nu=state.nu,
                E1=report.E1 if report is not None else math.nan,
                E2=report.E2 if report is not None else math.nan,
                res1=res1, res2=res2,
            ))
        result.states = states
        result.energies = energies
        print(f"✅ Modulation series: {len(states)} states, s from {states[0].s:.6g} to {states[-1].s:.6g}")

    def _fits(self, spec: ScenarioSpec, sim: SimulationResult, result: DiagnosticsResult):
        traj = sim.trajectory
        if traj.status is Termination.HORIZON:
            print("⚠️ Run ended at the horizon, no blow-up fit")
            return
        try:
            result.blowup = fit_blowup_time(traj.times(), traj.sups(), spec.fit_window_frac)
            result.stability = window_stability(traj.times(), traj.sups(), spec.fit_window_frac)
        except (FitRejectedError, ContractError) as e:
            print(f"⚠️ Blow-up fit rejected: {e}")
            self.stats['fits_rejected'] += 1
            return
        T = result.blowup.T
        print(f"📐 Fitted T={T:.10g} (r2={result.blowup.r2:.6f}, window stability={result.stability:.3e})")

        if not result.states:
            return
        ts = np.array([st.t for st in result.states])
        nus = np.array([st.nu for st in result.states])
        before = ts < T
        if np.count_nonzero(before) < 3:
            return
        try:
            if spec.beta > 0.0 or spec.kind is ScenarioKind.PRESSURELESS_EXACT:
                result.power_law = fit_nu_law(ts[before], nus[before], T, LawMode.POWER, spec.fit_window_frac)
            if spec.beta == 0.0:
                result.log_law = fit_nu_law(ts[before], nus[before], T, LawMode.LOG, spec.fit_window_frac)
                result.trend = log_law_trend(ts[before], nus[before], T,
                                             window=tuple(self._t("smooth", "log_law_window")))
        except (FitRejectedError, ContractError) as e:
            print(f"⚠️ nu-law fit rejected: {e}")
            self.stats['fits_rejected'] += 1

        law = DecayLaw.POWER if spec.beta == 0.0 else DecayLaw.EXP
        window = last_decade(ts, T)
        for name in ("E1", "E2"):
            values = np.array([getattr(row, name) for row in result.rows])
            usable = window & np.isfinite(values) & (values > 0.0)
            if np.count_nonzero(usable) < 2:
                continue
            ss = np.array([st.s for st in result.states])[usable]
            try:
                result.decay_slopes[name] = fit_remainder_decay(ss, values[usable], law)
            except ContractError as e:
                logger.debug("decay fit for %s skipped: %s", name, e)

    def _regime_reports(self, spec: ScenarioSpec, initial: InitialData, result: DiagnosticsResult):
        try:
            result.prediction = predict_parameters(spec.beta, initial.lambda0, initial.nu0)
        except HydroblowError as e:
            print(f"⚠️ Parameter prediction failed: {e}")
        usable = [(st, rep) for st, rep in zip(result.states, result.energies) if rep is not None]
        if usable and result.s0 is not None:
            states, reports = zip(*usable)
            nu_tilde0 = initial.nu0 / initial.lambda0 ** spec.beta
            try:
                result.trapped = trapped_check(states, reports, spec.resolved_energy(), result.s0,
                                               nu_tilde0=nu_tilde0)
            except ContractError as e:
                logger.debug("trapped check skipped: %s", e)

    def _verdicts(self, spec: ScenarioSpec, initial: InitialData, sim: SimulationResult,
                  result: DiagnosticsResult) -> List[Verdict]:
        verdicts = self._reduction_verdicts(spec, initial)
        if spec.kind is ScenarioKind.STEADY_STATE:
            verdicts += self._steady_verdicts(spec, sim, result)
            return verdicts
        if spec.kind is ScenarioKind.PRESSURELESS_EXACT:
            verdicts += self._pressureless_verdicts(spec, sim, result)
        verdicts += self._blowup_verdicts(spec, sim, result)
        if spec.kind is ScenarioKind.NONSMOOTH:
            verdicts.append(relative_match(CLAIM_EXPONENT,
                                           result.power_law.exponent_or_limit if result.power_law else None,
                                           spec.beta, self._t("blowup", "exponent_rel_tol")))
        if spec.kind is ScenarioKind.SMOOTH:
            verdicts += self._smooth_verdicts(result)
        verdicts += self._informational(result)
        return verdicts

    def _reduction_verdicts(self, spec: ScenarioSpec, initial: InitialData) -> List[Verdict]:
        f = initial.field
        lift = lift_to_2d(f, LIFT_X_NODES)
        scale = max(f.sup(), 1.0)
        momentum = momentum_residual(lift, rhs(f, spec.resolved_solver()))
        return [
            at_most("2D lift u = -X a is incompressible", divergence_residual(lift) / scale,
                    self._t("reduction", "divergence_rel_tol")),
            informational("2D momentum residual of the lift relative to sup|a|^2", momentum / scale ** 2),
        ]

    def _steady_verdicts(self, spec: ScenarioSpec, sim: SimulationResult, result: DiagnosticsResult) -> List[Verdict]:
        sups = sim.trajectory.sups()
        initial_sup = sim.trajectory.snapshots[0].sup()
        drift = float(np.max(np.abs(sups - initial_sup))) / initial_sup if sups.size else 0.0
        verdicts = [at_most(f"cos(2 pi {spec.steady_k} Z) is steady: sup-norm drift", drift,
                            self._t("steady_state", "drift_tol"))]
        if result.mean is not None:
            verdicts.append(at_most("projected mean stays at machine level relative to sup|a|",
                                    result.mean.max_relative_mean, self._t("steady_state", "projected_mean_tol")))
        return verdicts

    def _pressureless_verdicts(self, spec: ScenarioSpec, sim: SimulationResult,
                               result: DiagnosticsResult) -> List[Verdict]:
        table = profile_table(spec.resolved_profile())
        T = spec.exact_T
        halfway = 0.5 * T
        error = None
        for snapshot in sim.trajectory.snapshots:
            if abs(snapshot.time - halfway) <= 1e-12 * max(1.0, T):
                remaining = T - snapshot.time
                exact = table.phi(snapshot.grid.nodes / remaining ** spec.beta) / remaining
                error = float(np.max(np.abs(snapshot.values - exact)) / np.max(np.abs(exact)))
                break
        verdicts = [
            at_most("pressureless run tracks the exact self-similar solution at t = T/2", error,
                    self._t("pressureless_exact", "tracking_tol")),
            relative_match("fitted blow-up time matches the exact T", result.blowup.T if result.blowup else None,
                           T, self._t("pressureless_exact", "blowup_time_rel_tol")),
        ]
        exponent = result.power_law.exponent_or_limit if result.power_law else None
        tol = self._t("pressureless_exact", "exponent_rel_tol")
        if spec.beta > 0.0:
            verdicts.append(relative_match("fitted nu exponent matches beta", exponent, spec.beta, tol))
        else:
            verdicts.append(absolute_match("nu stays constant when beta = 0", exponent, 0.0, tol))
        return verdicts

    def _blowup_verdicts(self, spec: ScenarioSpec, sim: SimulationResult, result: DiagnosticsResult) -> List[Verdict]:
        traj = sim.trajectory
        verdicts = [
            holds(CLAIM_STOP, traj.status in (Termination.SUP_NORM_STOP, Termination.BLOWUP_OVERFLOW), traj.status.value),
            at_most(CLAIM_R2, 1.0 - result.blowup.r2 if result.blowup else None,
                    1.0 - self._t("blowup", "min_r2")),
            at_most(CLAIM_STABILITY, result.stability,
                    self._t("blowup", "window_stability_tol")),
        ]
        if len(traj.snapshots) >= 2:
            deviation = node_zero_deviation(traj, pressure_on=spec.resolved_solver().pressure_on)
            verdicts.append(at_most("a(t, 0) follows the node-zero ODE", deviation,
                                    self._t("blowup", "node_zero_tol")))
        if sim.oracle is not None:
            verdicts.append(at_most("Eulerian and Lagrangian solutions agree relative to sup|a|",
                                    sim.oracle.relative, self._t("blowup", "oracle_rel_tol")))
        return verdicts

    def _smooth_verdicts(self, result: DiagnosticsResult) -> List[Verdict]:
        if result.blowup is None or not result.states:
            return [holds("smooth blow-up diagnostics available", False)]
        T = result.blowup.T
        ts = np.array([st.t for st in result.states])
        window = last_decade(ts, T)
        lam = np.array([st.lam for st in result.states])[window]
        nu = np.array([st.nu for st in result.states])[window]
        s = np.array([st.s for st in result.states])[window]
        ratio = lam / (T - ts[window]) if lam.size else np.array([math.nan])
        nu_s = nu * s if nu.size else np.array([math.nan])

        trend = result.trend
        verdicts = [
            in_window(CLAIM_LOG_WINDOW,
                      trend.lowest if trend else None, trend.highest if trend else None,
                      self._t("smooth", "log_law_window")),
            holds(CLAIM_LOG_TREND, bool(trend and trend.trending),
                  [trend.lowest, trend.highest] if trend else None),
            in_window(CLAIM_LAMBDA_RATIO, float(np.min(ratio)),
                      float(np.max(ratio)), self._t("smooth", "lambda_ratio_window")),
            in_window("nu s stays in the improved trapped window", float(np.min(nu_s)), float(np.max(nu_s)),
                      self._t("smooth", "nu_s_window")),
        ]

        worst = None
        if result.residual is not None:
            inner = window & np.isfinite(result.residual.res1) & np.isfinite(result.residual.res2)
            if np.any(inner):
                worst = float(max(np.max(np.abs(result.residual.res1[inner])),
                                  np.max(np.abs(result.residual.res2[inner]))))
        verdicts.append(at_most(CLAIM_MODULATION, worst,
                                self._t("smooth", "modulation_residual_tol")))
        verdicts.append(at_most(CLAIM_E2_DECAY, result.decay_slopes.get("E2"),
                                self._t("smooth", "decay_slope_max")))
        return verdicts

    def _informational(self, result: DiagnosticsResult) -> List[Verdict]:
        notes = []
        if result.prediction is not None:
            notes.append(informational("blow-up time predicted by the leading-order modulation laws",
                                       result.prediction.blowup_time if math.isfinite(result.prediction.blowup_time)
                                       else None, result.blowup.T if result.blowup else None))
        if result.trapped is not None:
            notes.append(informational("fraction of samples inside the trapped windows", result.trapped.fractions))
        if result.energies and result.energies[0] is not None:
            first = result.energies[0]
            notes.append(informational("initial remainder energies (E1, E2)", [first.E1, first.E2]))
        if result.mean is not None:
            notes.append(informational("mean law m' = -m a(t, 1): relative residual", result.mean.law_residual))
        for name, slope in sorted(result.decay_slopes.items()):
            notes.append(informational(f"{name} decay slope", slope))
        return notes
