#!/usr/bin/env python3
"""
Verdict thresholds
Tolerances for scenario verdicts and the acceptance suite, read from verdict_thresholds.json
"""

import json
from pathlib import Path
from typing import Any, Dict, Optional

DEFAULT_THRESHOLDS_FILE = Path(__file__).with_name("verdict_thresholds.json")


class VerdictThresholds:
    """Tolerance lookup with a built-in fallback when the JSON file is unavailable"""

    def __init__(self, config_file: Optional[str] = None, quiet: bool = True):
        self.config_file = Path(config_file) if config_file else DEFAULT_THRESHOLDS_FILE
        self.quiet = quiet
        self.config = self._load_config()

    def _load_config(self) -> Dict[str, Any]:
        """Load thresholds from JSON file"""
        try:
            with open(self.config_file, 'r', encoding='utf-8') as f:
                config = json.load(f)
            if not self.quiet:
                print(f"✅ Loaded verdict thresholds from {self.config_file}")
            return config
        except FileNotFoundError:
            print(f"⚠️ Threshold file {self.config_file} not found, using built-in defaults")
            return self._get_default_config()
        except json.JSONDecodeError as e:
            print(f"❌ Error parsing threshold file {self.config_file}: {e}")
            return self._get_default_config()

    def _get_default_config(self) -> Dict[str, Any]:
        """Built-in thresholds if the file is not available"""
        return {
            "steady_state": {"drift_tol": 1e-3, "projected_mean_tol": 1e-12},
            "pressureless_exact": {"tracking_tol": 1e-2, "blowup_time_rel_tol": 0.02, "exponent_rel_tol": 0.10},
            "blowup": {
                "min_r2": 0.99, "window_stability_tol": 0.02, "exponent_rel_tol": 0.10,
                "node_zero_tol": 0.01, "oracle_rel_tol": 1e-2, "oracle_growth": 10.0,
            },
            "smooth": {
                "log_law_window": [0.5, 1.5], "lambda_ratio_window": [0.8, 1.2],
                "modulation_residual_tol": 0.20, "decay_slope_max": -0.3, "nu_s_window": [1.0 / 3.0, 3.0],
            },
            "reduction": {"divergence_rel_tol": 1e-10},
            "acceptance": {
                "profile_residual_tol": 1e-8, "small_z_window": [0.98, 1.02], "tail_spread_tol": 1e-3,
                "pressure_constant_tol": 1e-10, "steady_horizon": 0.25, "steady_rhs_tol": 1e-3,
                "steady_rhs_order_min": 1.8, "tracking_order_min": 0.9,
                "reduction_halving_window": [1.6, 2.4], "fitter_residual_tol": 1e-10,
            },
        }

    def get(self, section: str, key: str) -> Any:
        """Threshold value, falling back to the built-in table for keys missing from the file"""
        value = self.config.get(section, {}).get(key)
        if value is None:
            value = self._get_default_config()[section][key]
        return value
