#!/usr/bin/env python3
"""
Blow-up profile family
Evaluates phi_beta, its derivative, antiderivative and constants from the parametric solution of
(beta*z + psi) phi' - phi^2 + phi = 0, normalized so that z(xi) = (beta+1) int_0^xi u^beta/(1+u) du
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Sequence, Tuple

import numpy as np
from scipy import integrate, optimize, special
from scipy.interpolate import CubicSpline

from .errors import DivergenceError, PrecisionError, ProfileDomainError, ProfileRangeError

logger = logging.getLogger(__name__)

# The alternating series is used up to this xi; quadrature in log u takes over beyond it
SERIES_CUTOFF = 0.5
_MAX_SERIES_TERMS = 10_000
_QUAD_LIMIT = 200


@dataclass(frozen=True)
class ProfileSpec:
    """Member of the phi_beta family plus the tolerances used to evaluate it"""

    beta: float = 0.0
    quad_tol: float = 1e-12
    invert_tol: float = 1e-12
    xi_max: float = 1e30

    def __post_init__(self):
        if not (math.isfinite(self.beta) and self.beta >= 0.0):
            raise ProfileDomainError(f"beta must satisfy beta >= 0, got {self.beta}")
        for name in ("quad_tol", "invert_tol", "xi_max"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ProfileDomainError(f"{name} must be strictly positive, got {value}")

    @property
    def is_smooth(self) -> bool:
        """True for the closed-form branch phi_0 = exp(-z)"""
        return self.beta == 0.0


@dataclass(frozen=True)
class ProfilePoint:
    """Profile quantities at one z, computed from a single parametric inversion"""

    z: float
    xi: float
    phi: float
    phi_prime: float
    psi: float


def _require_positive_beta(beta: float, operation: str):
    if not beta > 0.0:
        raise ProfileDomainError(f"{operation} requires beta > 0 (beta = 0 uses the closed form), got {beta}")


def _quad(func, lo: float, hi: float, tol: float) -> float:
    value, _ = integrate.quad(func, lo, hi, epsabs=tol, epsrel=tol, limit=_QUAD_LIMIT)
    return value


def _series_integrals(beta: float, xi: float, tol: float) -> Tuple[float, float]:
    """int_0^xi u^b/(1+u) du and int_0^xi u^b/(1+u)^2 du by their alternating series (xi <= 1/2)"""
    if xi == 0.0:
        return 0.0, 0.0
    power = xi ** (beta + 1.0)
    first = second = 0.0
    for j in range(_MAX_SERIES_TERMS):
        term = power / (beta + j + 1.0)
        if j % 2:
            term = -term
        first += term
        second += (j + 1) * term
        if abs((j + 1) * term) <= tol * abs(second):
            break
        power *= xi
    return first, second


@lru_cache(maxsize=64)
def _series_at_cutoff(beta: float, tol: float) -> Tuple[float, float]:
    return _series_integrals(beta, SERIES_CUTOFF, tol)


def _log_segment(beta: float, lo: float, hi: float, tol: float, second: bool = False) -> float:
    """Kernel integral over [lo, hi] by quadrature in w = log u"""
    if hi <= lo:
        return 0.0
    if second:
        def integrand(w):
            return math.exp((beta - 1.0) * w) / (1.0 + math.exp(-w)) ** 2
    else:
        def integrand(w):
            return math.exp(beta * w) / (1.0 + math.exp(-w))
    return _quad(integrand, math.log(lo), math.log(hi), tol)


def _first_kernel(beta: float, xi: float, tol: float) -> float:
    if xi <= SERIES_CUTOFF:
        return _series_integrals(beta, xi, tol)[0]
    return _series_at_cutoff(beta, tol)[0] + _log_segment(beta, SERIES_CUTOFF, xi, tol)


def _second_kernel(beta: float, xi: float, tol: float) -> float:
    if xi <= SERIES_CUTOFF:
        return _series_integrals(beta, xi, tol)[1]
    return _series_at_cutoff(beta, tol)[1] + _log_segment(beta, SERIES_CUTOFF, xi, tol, second=True)


def cbeta_parametric(beta: float, quad_tol: float = 1e-12) -> float:
    """C_beta = 1 / int_0^1 u^beta/(1+u) du"""
    _require_positive_beta(beta, "cbeta_parametric")
    return 1.0 / _quad(lambda u: u ** beta / (1.0 + u), 0.0, 1.0, quad_tol)


def dz_dxi(beta: float, xi: float) -> float:
    """Derivative of the parametric map z(xi)"""
    return (beta + 1.0) * xi ** beta / (1.0 + xi)


def z_of_xi(spec: ProfileSpec, xi: float) -> float:
    """Parametric coordinate to self-similar coordinate"""
    if not xi >= 0.0:
        raise ProfileDomainError(f"xi must be nonnegative, got {xi}")
    if spec.is_smooth:
        return math.log1p(xi)
    return (spec.beta + 1.0) * _first_kernel(spec.beta, xi, spec.quad_tol)


def _initial_guess(beta: float, z: float, xi_max: float) -> float:
    if z <= 1.0:
        return z ** (1.0 / (beta + 1.0))
    log_guess = math.log(beta * z / (beta + 1.0)) / beta
    return math.exp(min(log_guess, math.log(xi_max)))


def xi_of_z(spec: ProfileSpec, z: float) -> float:
    """Invert the monotone map z(xi) by bracketing, Brent and a Newton polish"""
    if not (z >= 0.0 and math.isfinite(z)):
        raise ProfileDomainError(f"z must be finite and nonnegative, got {z}")
    if z == 0.0:
        return 0.0
    if spec.is_smooth:
        if z > math.log1p(spec.xi_max):
            raise ProfileRangeError(z, spec.xi_max, math.log1p(spec.xi_max))
        return math.expm1(z)

    beta = spec.beta
    tol = spec.invert_tol * max(1.0, z)

    def residual(xi: float) -> float:
        return z_of_xi(spec, xi) - z

    guess = _initial_guess(beta, z, spec.xi_max)
    value = residual(guess)
    if value == 0.0:
        return guess
    if value < 0.0:
        lo = hi = guess
        while value < 0.0:
            if hi >= spec.xi_max:
                raise ProfileRangeError(z, spec.xi_max, z_of_xi(spec, spec.xi_max))
            lo = hi
            hi = min(2.0 * hi, spec.xi_max)
            value = residual(hi)
    else:
        lo = hi = guess
        while value > 0.0:
            hi = lo
            lo = 0.5 * lo
            value = residual(lo)

    xi = optimize.brentq(residual, lo, hi, xtol=lo * 1e-12 + 1e-300, rtol=1e-10)

    for _ in range(6):
        value = residual(xi)
        if abs(value) <= tol:
            break
        step = value / dz_dxi(beta, xi)
        candidate = xi - step
        if not lo <= candidate <= hi:
            candidate = 0.5 * (lo + hi)
        xi = candidate
    else:
        logger.debug("xi_of_z: Newton polish stopped at residual %.3e for z=%.6g", residual(xi), z)
    return xi


def eval_phi(spec: ProfileSpec, z: float) -> float:
    """phi_beta(z), in (0, 1]"""
    if not z >= 0.0:
        raise ProfileDomainError(f"phi is defined for z >= 0, got {z}")
    if spec.is_smooth:
        return math.exp(-z)
    return 1.0 / (1.0 + xi_of_z(spec, z))


def _phi_prime_from_xi(beta: float, xi: float) -> float:
    return -(xi ** -beta) / ((beta + 1.0) * (1.0 + xi))


def eval_phi_prime(spec: ProfileSpec, z: float) -> float:
    """phi_beta'(z) as the ratio of xi-derivatives"""
    if spec.is_smooth:
        if not z >= 0.0:
            raise ProfileDomainError(f"phi' is defined for z >= 0, got {z}")
        return -math.exp(-z)
    if not z > 0.0:
        raise ProfileDomainError(f"phi' is singular at z = 0 for beta > 0 (beta={spec.beta}); z must be > 0")
    return _phi_prime_from_xi(spec.beta, xi_of_z(spec, z))


def antideriv_phi(spec: ProfileSpec, z: float) -> float:
    """psi(z) = int_0^z phi"""
    if not z >= 0.0:
        raise ProfileDomainError(f"psi is defined for z >= 0, got {z}")
    if spec.is_smooth:
        return -math.expm1(-z)
    xi = xi_of_z(spec, z)
    return (spec.beta + 1.0) * _second_kernel(spec.beta, xi, spec.quad_tol)


def profile_point(spec: ProfileSpec, z: float) -> ProfilePoint:
    """All profile quantities at z from one inversion; phi' is -inf at the origin when beta > 0"""
    if not z >= 0.0:
        raise ProfileDomainError(f"z must be nonnegative, got {z}")
    if spec.is_smooth:
        return ProfilePoint(z=z, xi=math.expm1(z), phi=math.exp(-z), phi_prime=-math.exp(-z), psi=-math.expm1(-z))
    xi = xi_of_z(spec, z)
    beta = spec.beta
    phi_prime = -math.inf if xi == 0.0 else _phi_prime_from_xi(beta, xi)
    psi = (beta + 1.0) * _second_kernel(beta, xi, spec.quad_tol)
    return ProfilePoint(z=z, xi=xi, phi=1.0 / (1.0 + xi), phi_prime=phi_prime, psi=psi)


def evaluate_points(spec: ProfileSpec, zs: Sequence[float]) -> List[ProfilePoint]:
    return [profile_point(spec, float(z)) for z in zs]


def scaled_phi(spec: ProfileSpec, z: float, nu_tilde: float = 1.0) -> float:
    """Member phi_beta(z / nu_tilde) of the scaling family"""
    if not nu_tilde > 0.0:
        raise ProfileDomainError(f"nu_tilde must be positive, got {nu_tilde}")
    return eval_phi(spec, z / nu_tilde)


def profile_residual(spec: ProfileSpec, z: float, nu_tilde: float = 1.0) -> float:
    """(beta z + psi) phi' - phi^2 + phi for phi(z / nu_tilde)"""
    if not z > 0.0:
        raise ProfileDomainError(f"profile residual is evaluated at z > 0, got {z}")
    if not nu_tilde > 0.0:
        raise ProfileDomainError(f"nu_tilde must be positive, got {nu_tilde}")
    point = profile_point(spec, z / nu_tilde)
    psi = nu_tilde * point.psi
    phi_prime = point.phi_prime / nu_tilde
    return (spec.beta * z + psi) * phi_prime - point.phi ** 2 + point.phi


def tail_coefficient(beta: float) -> float:
    """Closed-form d_beta = ((beta+1)/beta)^(1/beta) of phi ~ d_beta z^(-1/beta)"""
    _require_positive_beta(beta, "tail_coefficient")
    return ((beta + 1.0) / beta) ** (1.0 / beta)


def tail_constant(beta: float, spec: ProfileSpec = None, z_start: float = 1e3,
                  growth: float = 10.0, spread_tol: float = 1e-3) -> float:
    """Estimate d_beta as the limit of phi(z) z^(1/beta) along a geometric sequence of z"""
    _require_positive_beta(beta, "tail_constant")
    spec = spec or ProfileSpec(beta=beta)
    estimates: List[float] = []
    z = z_start
    while True:
        try:
            xi = xi_of_z(spec, z)
        except ProfileRangeError as e:
            raise PrecisionError(
                f"tail constant did not settle before xi_max={spec.xi_max:.3g}; last estimates {estimates[-3:]}"
            ) from e
        # phi z^(1/beta) evaluated in logs to keep z^(1/beta) finite
        estimates.append(math.exp(math.log(z) / beta - math.log1p(xi)))
        if len(estimates) >= 3:
            recent = estimates[-3:]
            spread = (max(recent) - min(recent)) / abs(recent[-1])
            if spread < spread_tol:
                logger.debug("tail_constant(beta=%g) settled at z=%.3g after %d estimates", beta, z, len(estimates))
                return estimates[-1]
        z *= growth


def pressure_constant_closed_form(beta: float) -> float:
    """2 int_0^inf phi_beta^2 dz = (beta+1) Gamma(beta+1) Gamma(2-beta)"""
    if not 0.0 <= beta < 2.0:
        raise DivergenceError(f"2 int phi^2 is finite only for 0 <= beta < 2, got beta={beta}")
    return (beta + 1.0) * special.gamma(beta + 1.0) * special.gamma(2.0 - beta)


def pressure_constant(beta: float, quad_tol: float = 1e-12, xi_max: float = 1e30) -> float:
    """2 int_0^inf phi_beta^2 dz by quadrature in xi, with the far tail closed by d_beta z^(-1/beta)"""
    if beta < 0.0:
        raise ProfileDomainError(f"beta must satisfy beta >= 0, got {beta}")
    if beta >= 2.0:
        raise DivergenceError(f"2 int phi^2 diverges for beta >= 2, got beta={beta}")

    # phi^2 dz = (beta+1) xi^beta / (1+xi)^3 dxi
    head = _quad(lambda u: u ** beta / (1.0 + u) ** 3, 0.0, 1.0, quad_tol)
    body = _quad(lambda w: math.exp((beta - 2.0) * w) / (1.0 + math.exp(-w)) ** 3,
                 0.0, math.log(xi_max), quad_tol)
    value = 2.0 * (beta + 1.0) * (head + body)

    if beta == 0.0:
        tail = math.exp(-2.0 * math.log1p(xi_max))
    else:
        spec = ProfileSpec(beta=beta, quad_tol=quad_tol, xi_max=xi_max)
        z_max = z_of_xi(spec, xi_max)
        log_d = math.log((beta + 1.0) / beta) / beta
        exponent = 2.0 / beta - 1.0
        tail = 2.0 * math.exp(2.0 * log_d - exponent * math.log(z_max)) / exponent
    return value + tail


class ProfileTable:
    """Tabulated phi_beta for vectorized evaluation on whole grids"""

    def __init__(self, spec: ProfileSpec, n_nodes: int = 4000, xi_lo: float = 1e-12, xi_hi: float = 1e15):
        self.spec = spec
        self.beta = spec.beta
        self._spline = None
        if spec.is_smooth:
            return

        beta, tol = spec.beta, spec.quad_tol
        xi = np.geomspace(xi_lo, xi_hi, n_nodes)
        first = np.empty(n_nodes)
        anchor, acc = SERIES_CUTOFF, _series_at_cutoff(beta, tol)[0]
        for k, x in enumerate(xi):
            if x <= SERIES_CUTOFF:
                first[k] = _series_integrals(beta, float(x), tol)[0]
                continue
            acc += _log_segment(beta, anchor, float(x), tol)
            anchor = float(x)
            first[k] = acc

        z = (beta + 1.0) * first
        self._xi_lo, self._xi_hi = float(xi[0]), float(xi[-1])
        self._z_lo, self._z_hi = float(z[0]), float(z[-1])
        self._spline = CubicSpline(np.log(z), np.log(xi))
        logger.debug("ProfileTable(beta=%g): %d nodes, z in [%.3g, %.3g]", beta, n_nodes, self._z_lo, self._z_hi)

    def xi(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        if np.any(z < 0.0):
            raise ProfileDomainError("z must be nonnegative")
        if self.spec.is_smooth:
            return np.expm1(z)
        beta = self.beta
        out = np.zeros_like(z)
        low = (z > 0.0) & (z < self._z_lo)
        mid = (z >= self._z_lo) & (z <= self._z_hi)
        high = z > self._z_hi
        x = z[low] ** (1.0 / (beta + 1.0))
        out[low] = x * (1.0 + x / (beta + 2.0))
        out[mid] = np.exp(self._spline(np.log(z[mid])))
        out[high] = self._xi_hi * (z[high] / self._z_hi) ** (1.0 / beta)
        return out

    def phi(self, z) -> np.ndarray:
        if self.spec.is_smooth:
            return np.exp(-np.asarray(z, dtype=float))
        return 1.0 / (1.0 + self.xi(z))

    def phi_prime(self, z) -> np.ndarray:
        """phi'(z); -inf at the origin when beta > 0"""
        if self.spec.is_smooth:
            return -np.exp(-np.asarray(z, dtype=float))
        xi = self.xi(z)
        with np.errstate(divide="ignore"):
            return -(xi ** -self.beta) / ((self.beta + 1.0) * (1.0 + xi))

    def psi(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        if self.spec.is_smooth:
            return -np.expm1(-z)
        xi = self.xi(z)
        beta = self.beta
        return (beta + 1.0) * xi ** (beta + 1.0) / (1.0 + xi) - beta * z


@lru_cache(maxsize=16)
def profile_table(spec: ProfileSpec) -> ProfileTable:
    """Shared table per spec"""
    return ProfileTable(spec)
