#!/usr/bin/env python3
"""
Scenario settings
Flat key=value scenario files and the output root (.env aware)
"""

import logging
import os
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Tuple, Union

from dotenv import find_dotenv, load_dotenv

from ..core.errors import ConfigError, HydroblowError
from ..core.modulation import EnergyConfig
from ..core.profile import ProfileSpec
from ..core.reduced_pde import MeanMode, SolverConfig
from ..pipeline.phase1_initial_data import ScenarioKind, ScenarioSpec

logger = logging.getLogger(__name__)

OUTPUT_ENV_VAR = "HYDROBLOW_OUT"
DEFAULT_OUTPUT_ROOT = "outputs"

_TRUE = {"true", "on", "yes", "1"}
_FALSE = {"false", "off", "no", "0"}


def _parse_bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in _TRUE:
        return True
    if lowered in _FALSE:
        return False
    raise ValueError(f"expected a boolean (true/false/on/off/yes/no/1/0), got '{text}'")


def _parse_kind(text: str) -> ScenarioKind:
    try:
        return ScenarioKind(text)
    except ValueError:
        allowed = ", ".join(k.value for k in ScenarioKind)
        raise ValueError(f"unknown kind '{text}' (expected one of {allowed})") from None


def _parse_mean_mode(text: str) -> MeanMode:
    try:
        return MeanMode(text)
    except ValueError:
        raise ValueError(f"unknown mean mode '{text}' (expected literal or projected)") from None


def _parse_int(text: str) -> int:
    return int(text)


KEY_PARSERS: Dict[str, Callable[[str], Any]] = {
    "kind": _parse_kind,
    "name": str,
    "beta": float,
    "lambda0": float,
    "nu0": float,
    "nu_tilde0": float,
    "nu_tilde0_max": float,
    "kappa": float,
    "perturbation.m": _parse_int,
    "steady.k": _parse_int,
    "exact.T": float,
    "horizon": float,
    "grid.n": _parse_int,
    "grid.g": float,
    "grid.cluster": float,
    "solver.cfl": float,
    "solver.reaction_cfl": float,
    "solver.pressure": _parse_bool,
    "solver.mean_mode": _parse_mean_mode,
    "solver.max_steps": _parse_int,
    "solver.sup_stop_factor": float,
    "solver.sup_norm_stop": float,
    "solver.snapshot_growth": float,
    "energy.eta": float,
    "energy.zstar": float,
    "energy.K": float,
    "fit.window_frac": float,
    "fit.gauge_cells": _parse_int,
    "oracle.n": _parse_int,
    "profile.quad_tol": float,
    "profile.invert_tol": float,
    "profile.xi_max": float,
    "outputs.dir": str,
}

# scenario key -> ScenarioSpec field
_SCENARIO_FIELDS = {
    "kind": "kind", "name": "name", "beta": "beta", "lambda0": "lambda0", "nu0": "nu0",
    "nu_tilde0": "nu_tilde0", "nu_tilde0_max": "nu_tilde0_max", "kappa": "kappa",
    "perturbation.m": "perturbation_m", "steady.k": "steady_k", "exact.T": "exact_T", "horizon": "horizon",
    "grid.n": "grid_n", "grid.g": "grid_g", "grid.cluster": "grid_cluster",
    "fit.window_frac": "fit_window_frac", "fit.gauge_cells": "gauge_cells", "oracle.n": "oracle_n",
    "outputs.dir": "outputs_dir",
}

_SOLVER_FIELDS = {
    "solver.cfl": "cfl", "solver.reaction_cfl": "reaction_cfl", "solver.pressure": "pressure_on",
    "solver.mean_mode": "mean_mode", "solver.max_steps": "max_steps", "solver.sup_stop_factor": "sup_stop_factor",
    "solver.sup_norm_stop": "sup_norm_stop", "solver.snapshot_growth": "snapshot_growth",
}

_PROFILE_FIELDS = {"profile.quad_tol": "quad_tol", "profile.invert_tol": "invert_tol", "profile.xi_max": "xi_max"}

_ENERGY_FIELDS = {"energy.eta": "eta", "energy.zstar": "zstar", "energy.K": "big_k"}


def read_pairs(text: str) -> Dict[str, Tuple[Any, int]]:
    """Typed values keyed by config key, each with its line number"""
    values: Dict[str, Tuple[Any, int]] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected key=value, got '{raw.strip()}'", line=number)
        key, _, value = (part.strip() for part in line.partition("="))
        if key not in KEY_PARSERS:
            raise ConfigError(f"unknown key '{key}'", line=number)
        if key in values:
            raise ConfigError(f"duplicate key '{key}' (first set on line {values[key][1]})", line=number)
        if not value:
            raise ConfigError(f"empty value for '{key}'", line=number)
        try:
            values[key] = (KEY_PARSERS[key](value), number)
        except ValueError as e:
            raise ConfigError(f"bad value for '{key}': {e}", line=number) from None
    return values


def build_spec(values: Dict[str, Tuple[Any, int]]) -> ScenarioSpec:
    """Typed configs from parsed pairs; every invariant violation becomes a ConfigError"""
    plain = {key: value for key, (value, _) in values.items()}
    kind = plain.get("kind", ScenarioKind.SMOOTH)
    beta = plain.get("beta", 0.0)

    kwargs = {_SCENARIO_FIELDS[k]: v for k, v in plain.items() if k in _SCENARIO_FIELDS}
    try:
        if any(k in plain for k in _SOLVER_FIELDS):
            solver_kwargs = {_SOLVER_FIELDS[k]: v for k, v in plain.items() if k in _SOLVER_FIELDS}
            if "mean_mode" not in solver_kwargs:
                solver_kwargs["mean_mode"] = (MeanMode.PROJECTED if kind is ScenarioKind.STEADY_STATE
                                              else MeanMode.LITERAL)
            kwargs["solver"] = SolverConfig(**solver_kwargs)
        if any(k in plain for k in _PROFILE_FIELDS):
            profile_kwargs = {_PROFILE_FIELDS[k]: v for k, v in plain.items() if k in _PROFILE_FIELDS}
            kwargs["profile"] = ProfileSpec(beta=beta, **profile_kwargs)
        if any(k in plain for k in _ENERGY_FIELDS):
            energy_kwargs = {_ENERGY_FIELDS[k]: v for k, v in plain.items() if k in _ENERGY_FIELDS}
            kwargs["energy"] = EnergyConfig.for_beta(beta, **energy_kwargs)
        return ScenarioSpec(**kwargs)
    except ConfigError:
        raise
    except HydroblowError as e:
        raise ConfigError(str(e)) from e


def parse_config_text(text: str) -> ScenarioSpec:
    return build_spec(read_pairs(text))


def parse_config(path: Union[str, Path]) -> ScenarioSpec:
    """Read and validate a scenario file"""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    spec = parse_config_text(text)
    logger.info("parsed scenario '%s' (%s) from %s", spec.name, spec.kind.value, path)
    return spec


def output_root(spec: Optional[ScenarioSpec] = None) -> Path:
    """HYDROBLOW_OUT (environment or a .env found from the working directory), then outputs.dir, then ./outputs"""
    load_dotenv(find_dotenv(usecwd=True))
    env_root = os.getenv(OUTPUT_ENV_VAR)
    if env_root:
        return Path(env_root)
    if spec is not None and spec.outputs_dir:
        return Path(spec.outputs_dir)
    return Path(DEFAULT_OUTPUT_ROOT)
