#!/usr/bin/env python3
"""
Rate-law fitting
Blow-up time from 1/sup, nu laws (power or logarithmic) and remainder decay slopes
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from .errors import ContractError, FitRejectedError

logger = logging.getLogger(__name__)

DEFAULT_WINDOW_FRAC = 0.25
_MIN_WINDOW = 3


class LawMode(str, Enum):
    POWER = "power"
    LOG = "log"


class DecayLaw(str, Enum):
    EXP = "exp"
    POWER = "power"


@dataclass(frozen=True)
class BlowupFit:
    T: float
    slope: float
    intercept: float
    r2: float
    window: Tuple[float, float]
    residual: float = 0.0


@dataclass(frozen=True, eq=False)
class ScaleLawFit:
    mode: LawMode
    exponent_or_limit: float
    nu_inf: float
    residual: float
    sequence: Optional[np.ndarray] = None


def _tail(n: int, window_frac: float) -> slice:
    if not 0.0 < window_frac <= 1.0:
        raise ContractError(f"window_frac must lie in (0, 1], got {window_frac}")
    count = max(_MIN_WINDOW, int(math.ceil(window_frac * n)))
    if count > n:
        raise FitRejectedError(f"need at least {_MIN_WINDOW} samples, got {n}")
    return slice(n - count, n)


def fit_blowup_time(ts: Sequence[float], sups: Sequence[float],
                    window_frac: float = DEFAULT_WINDOW_FRAC) -> BlowupFit:
    """Linear regression of 1/sup against t on the last window_frac of samples"""
    ts = np.asarray(ts, dtype=float)
    sups = np.asarray(sups, dtype=float)
    if ts.shape != sups.shape:
        raise ContractError("ts and sups differ in length")
    window = _tail(ts.size, window_frac)
    t_win, s_win = ts[window], sups[window]
    if np.any(s_win <= 0.0):
        raise FitRejectedError("sup norms must be positive on the fit window")
    if not np.all(np.diff(s_win) > 0.0):
        raise FitRejectedError("sup norm is not increasing on the fit window")

    reg = stats.linregress(t_win, 1.0 / s_win)
    if not reg.slope < 0.0:
        raise FitRejectedError(f"1/sup does not decrease on the fit window (slope={reg.slope:.6g})")
    T = -reg.intercept / reg.slope
    if not T > t_win[-1]:
        raise FitRejectedError(f"fitted T={T:.17g} does not exceed the last fitted time {t_win[-1]:.17g}")
    r2 = min(1.0, max(0.0, reg.rvalue ** 2))
    fitted = reg.intercept + reg.slope * t_win
    residual = float(np.sqrt(np.mean((1.0 / s_win - fitted) ** 2)))
    return BlowupFit(T=float(T), slope=float(reg.slope), intercept=float(reg.intercept), r2=float(r2),
                     window=(float(t_win[0]), float(t_win[-1])), residual=residual)


def window_stability(ts: Sequence[float], sups: Sequence[float],
                     window_frac: float = DEFAULT_WINDOW_FRAC) -> float:
    """Relative change of T when the fit window is halved"""
    full = fit_blowup_time(ts, sups, window_frac)
    half = fit_blowup_time(ts, sups, 0.5 * window_frac)
    return abs(half.T - full.T) / abs(full.T)


def fit_nu_law(ts: Sequence[float], nus: Sequence[float], T: float, mode: LawMode = LawMode.POWER,
               window_frac: float = DEFAULT_WINDOW_FRAC) -> ScaleLawFit:
    """power: log nu against log(T - t) over the tail window; log: the sequence nu |log(T - t)| and its tail mean"""
    ts = np.asarray(ts, dtype=float)
    nus = np.asarray(nus, dtype=float)
    mode = LawMode(mode)
    if ts.size < _MIN_WINDOW:
        raise ContractError(f"need at least {_MIN_WINDOW} samples, got {ts.size}")
    if not T > np.max(ts):
        raise ContractError(f"blow-up time T={T:.17g} must exceed every sample time (max {np.max(ts):.17g})")
    if np.any(nus <= 0.0):
        raise ContractError("nu samples must be positive")

    remaining = T - ts
    if mode is LawMode.POWER:
        window = _tail(ts.size, window_frac)
        x, y = np.log(remaining[window]), np.log(nus[window])
        reg = stats.linregress(x, y)
        residual = float(np.sqrt(np.mean((y - (reg.intercept + reg.slope * x)) ** 2)))
        return ScaleLawFit(mode=mode, exponent_or_limit=float(reg.slope), nu_inf=float(math.exp(reg.intercept)),
                           residual=residual)

    sequence = nus * np.abs(np.log(remaining))
    tail = sequence[_tail(sequence.size, window_frac)]
    return ScaleLawFit(mode=mode, exponent_or_limit=float(np.mean(tail)), nu_inf=math.nan,
                       residual=float(np.std(tail)), sequence=sequence)


@dataclass(frozen=True)
class LogLawTrend:
    in_window: bool
    trending: bool
    lowest: float
    highest: float
    samples: int


def log_law_trend(ts: Sequence[float], nus: Sequence[float], T: float, decades: float = 1.0,
                  window: Tuple[float, float] = (0.5, 1.5)) -> LogLawTrend:
    """nu |log(T - t)| over the last decades of T - t: inside the window and not moving away from 1"""
    ts = np.asarray(ts, dtype=float)
    nus = np.asarray(nus, dtype=float)
    if not T > np.max(ts):
        raise ContractError(f"blow-up time T={T:.17g} must exceed every sample time")
    remaining = T - ts
    mask = remaining <= remaining.min() * 10.0 ** decades
    if np.count_nonzero(mask) < 2:
        raise FitRejectedError("fewer than 2 samples in the last decade of T - t")
    sequence = nus[mask] * np.abs(np.log(remaining[mask]))
    distance = np.abs(sequence - 1.0)
    # mean distance from 1 over the last third vs the first third
    third = max(1, sequence.size // 3)
    trending = float(np.mean(distance[-third:])) <= float(np.mean(distance[:third])) + 1e-12
    return LogLawTrend(
        in_window=bool(np.all((sequence >= window[0]) & (sequence <= window[1]))),
        trending=bool(trending),
        lowest=float(sequence.min()),
        highest=float(sequence.max()),
        samples=int(sequence.size),
    )


def fit_remainder_decay(ss: Sequence[float], energies: Sequence[float], law: DecayLaw = DecayLaw.EXP) -> float:
    """Slope of log energy against s (exp) or log s (power)"""
    ss = np.asarray(ss, dtype=float)
    energies = np.asarray(energies, dtype=float)
    law = DecayLaw(law)
    if ss.size < 2 or ss.shape != energies.shape:
        raise ContractError("need matching series with at least 2 samples")
    if np.any(energies <= 0.0):
        raise ContractError("energies must be positive for a decay fit")
    if not np.all(np.diff(ss) > 0.0):
        raise ContractError("self-similar times must be increasing")
    x = ss if law is DecayLaw.EXP else np.log(ss)
    return float(stats.linregress(x, np.log(energies)).slope)


def observed_order(hs: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares convergence order from errors at several resolutions"""
    hs = np.asarray(hs, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if hs.size < 2 or np.any(errors <= 0.0):
        raise ContractError("need at least 2 positive errors")
    return float(stats.linregress(np.log(hs), np.log(errors)).slope)


def _finite_or_none(value: Optional[float]) -> Optional[float]:
    if value is None or not math.isfinite(value):
        return None
    return float(value)


def fit_summary(blowup: Optional[BlowupFit] = None, power: Optional[ScaleLawFit] = None,
                log_law: Optional[ScaleLawFit] = None,
                decay_slopes: Optional[Dict[str, float]] = None) -> Dict[str, object]:
    """JSON summary with the fixed keys T, r2, beta_hat, nu_inf, log_law_tail, decay_slopes"""
    return {
        "T": _finite_or_none(blowup.T) if blowup else None,
        "r2": _finite_or_none(blowup.r2) if blowup else None,
        "beta_hat": _finite_or_none(power.exponent_or_limit) if power else None,
        "nu_inf": _finite_or_none(power.nu_inf) if power else None,
        "log_law_tail": _finite_or_none(log_law.exponent_or_limit) if log_law else None,
        "decay_slopes": {k: _finite_or_none(v) for k, v in sorted((decay_slopes or {}).items())},
    }
