"""
Verdicts: named claims with measured values, targets and pass/fail
"""

import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence


@dataclass
class Verdict:
    claim: str
    passed: Optional[bool]  # None marks an informational entry
    measured: Any
    target: Any
    tolerance: Any

    def to_dict(self) -> Dict[str, Any]:
        return {
            "claim": self.claim,
            "pass": self.passed,
            "measured": self.measured,
            "target": self.target,
            "tolerance": self.tolerance,
        }


def _finite(value) -> bool:
    return value is not None and isinstance(value, (int, float)) and math.isfinite(value)


def at_most(claim: str, measured: Optional[float], limit: float) -> Verdict:
    ok = _finite(measured) and measured <= limit
    return Verdict(claim, bool(ok), measured, 0.0, limit)


def relative_match(claim: str, measured: Optional[float], target: float, rel_tol: float) -> Verdict:
    ok = _finite(measured) and abs(measured - target) <= rel_tol * abs(target)
    return Verdict(claim, bool(ok), measured, target, rel_tol)


def absolute_match(claim: str, measured: Optional[float], target: float, tol: float) -> Verdict:
    ok = _finite(measured) and abs(measured - target) <= tol
    return Verdict(claim, bool(ok), measured, target, tol)


def in_window(claim: str, lowest: Optional[float], highest: Optional[float], window: Sequence[float]) -> Verdict:
    ok = _finite(lowest) and _finite(highest) and window[0] <= lowest and highest <= window[1]
    return Verdict(claim, bool(ok), [lowest, highest], list(window), None)


def holds(claim: str, condition: bool, measured: Any = None) -> Verdict:
    return Verdict(claim, bool(condition), measured, True, None)


def informational(claim: str, measured: Any, target: Any = None) -> Verdict:
    return Verdict(claim, None, measured, target, None)


def count(verdicts: Sequence[Verdict]) -> Dict[str, int]:
    return {
        "passed": sum(1 for v in verdicts if v.passed is True),
        "failed": sum(1 for v in verdicts if v.passed is False),
        "informational": sum(1 for v in verdicts if v.passed is None),
    }
