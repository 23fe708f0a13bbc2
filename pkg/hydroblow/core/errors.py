"""
Error hierarchy for the blow-up laboratory
Every failure raised by hydroblow derives from HydroblowError
"""

from typing import Any, Optional


class HydroblowError(Exception):
    """Base class for all hydroblow failures"""


class ProfileDomainError(HydroblowError, ValueError):
    """Argument outside the domain of a profile operation"""


class ProfileRangeError(HydroblowError):
    """Target z is not reachable with the parametric truncation xi_max"""

    def __init__(self, z: float, xi_max: float, z_max: float):
        super().__init__(
            f"z={z:.6g} exceeds the range reachable with xi_max={xi_max:.3g} (z(xi_max)={z_max:.6g})"
        )
        self.z = z
        self.xi_max = xi_max
        self.z_max = z_max


class DivergenceError(HydroblowError):
    """Integral diverges for the requested exponent"""


class PrecisionError(HydroblowError):
    """Numerical estimate did not converge within the available range"""


class BlowupOverflowError(HydroblowError):
    """A time step produced non-finite values"""

    def __init__(self, message: str, last_field: Any = None):
        super().__init__(message)
        self.last_field = last_field


class ParticleCrossingError(HydroblowError):
    """Lagrangian particles lost their ordering"""


class ContractError(HydroblowError):
    """Precondition of an operation was violated by the caller"""


class GaugeError(HydroblowError):
    """Modulation parameters cannot be extracted from the field"""


class ModulationDomainError(HydroblowError):
    """Self-similar grid does not cover the requested window"""


class FitRejectedError(HydroblowError):
    """Series is not admissible for the requested fit"""


class ScenarioError(HydroblowError):
    """Scenario violates one of its defining constraints"""


class ConfigError(HydroblowError):
    """Malformed or invalid configuration"""

    def __init__(self, message: str, line: Optional[int] = None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line


class PipelineStageError(HydroblowError):
    """Failure inside a pipeline stage, tagged with the stage name"""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause
