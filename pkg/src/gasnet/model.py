"""Pointwise thermodynamics and wave algebra for isentropic gas dynamics.

Every function accepts scalars or numpy arrays for the state components.
Vacuum ``rho == 0`` is admitted only together with ``q == 0``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class DomainError(ValueError):
    """Raised when an input lies outside the domain of an operation."""


class VacuumError(DomainError):
    """Raised for a vacuum density carrying a nonzero momentum."""


@dataclass(frozen=True)
class PressureLaw:
    """Polytropic pressure law ``p(rho) = p0 * rho**gamma``."""

    p0: float = 1.0
    gamma: float = 2.0

    def __post_init__(self):
        if not (self.p0 > 0 and math.isfinite(self.p0)):
            raise DomainError(f"p0 must be positive, got {self.p0}")
        if not (self.gamma > 1 and math.isfinite(self.gamma)):
            raise DomainError(f"gamma must exceed 1, got {self.gamma}")

    @property
    def alpha(self) -> float:
        """Riemann invariant coefficient ``2 / (gamma - 1)``."""
        return 2.0 / (self.gamma - 1.0)


class State(NamedTuple):
    """Conserved pair: density and momentum ``q = rho * u``."""

    rho: float
    q: float


class Regime(enum.Enum):
    SUBSONIC = "subsonic"
    SONIC = "sonic"
    SUPERSONIC = "supersonic"


def _require_nonnegative(rho):
    if np.any(np.asarray(rho) < 0):
        raise DomainError("density must be nonnegative")


def _require_positive(rho):
    if np.any(np.asarray(rho) <= 0):
        raise DomainError("density must be positive")


def _require_no_vacuum_momentum(rho, q):
    rho = np.asarray(rho)
    q = np.asarray(q)
    if np.any((rho == 0) & (q != 0)):
        raise VacuumError("vacuum state with nonzero momentum")


def pressure(law: PressureLaw, rho):
    _require_nonnegative(rho)
    return law.p0 * np.power(rho, law.gamma)


def sound_speed(law: PressureLaw, rho):
    """``sqrt(p'(rho))``; requires ``rho > 0``."""
    _require_positive(rho)
    return np.sqrt(law.p0 * law.gamma * np.power(rho, law.gamma - 1.0))


def _sound_speed_or_zero(law, rho):
    # c(0) = 0 for gamma > 1
    return np.sqrt(law.p0 * law.gamma * np.power(rho, law.gamma - 1.0))


def eigenvalues(law: PressureLaw, state: State):
    rho, q = state
    c = sound_speed(law, rho)
    u = q / rho
    return u - c, u + c


def physical_flux(law: PressureLaw, state: State):
    """Flux ``(q, q**2/rho + p(rho))``; vacuum maps to zero."""
    rho, q = state
    _require_nonnegative(rho)
    _require_no_vacuum_momentum(rho, q)
    rho_arr = np.asarray(rho, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        kinetic = np.where(rho_arr > 0, np.square(q) / np.where(rho_arr > 0, rho_arr, 1.0), 0.0)
    flux_q = kinetic + law.p0 * np.power(rho_arr, law.gamma)
    if np.ndim(flux_q) == 0:
        return float(q), float(flux_q)
    return np.asarray(q, dtype=float), flux_q


def maxwellians(law: PressureLaw, state: State, lam: float):
    """Jin-Xin equilibria ``M1 = (U - F/lam)/2`` and ``M2 = (U + F/lam)/2``."""
    if not lam > 0:
        raise DomainError(f"relaxation speed must be positive, got {lam}")
    rho, q = state
    f_rho, f_q = physical_flux(law, state)
    m1 = State(0.5 * (rho - f_rho / lam), 0.5 * (q - f_q / lam))
    m2 = State(0.5 * (rho + f_rho / lam), 0.5 * (q + f_q / lam))
    return m1, m2


def riemann_invariants(law: PressureLaw, state: State):
    """Return ``(z1, z2) = (u + alpha*c, u - alpha*c)``."""
    rho, q = state
    c = sound_speed(law, rho)
    u = q / rho
    return u + law.alpha * c, u - law.alpha * c


def sonic_curves(law: PressureLaw, rho):
    """Return ``(q_s-, q_s+) = (-rho*c, rho*c)``."""
    _require_nonnegative(rho)
    qs = rho * _sound_speed_or_zero(law, rho)
    return -qs, qs


def classify(law: PressureLaw, state: State) -> Regime:
    rho, q = state
    _require_positive(rho)
    _, qs = sonic_curves(law, rho)
    if math.isclose(abs(q), qs, rel_tol=1e-12, abs_tol=0.0):
        return Regime.SONIC
    if -qs < q < qs:
        return Regime.SUBSONIC
    return Regime.SUPERSONIC


def entropy(law: PressureLaw, state: State):
    """Mathematical entropy ``q**2/(2 rho) + p0 rho**gamma / (gamma - 1)``."""
    rho, q = state
    _require_nonnegative(rho)
    _require_no_vacuum_momentum(rho, q)
    rho_arr = np.asarray(rho, dtype=float)
    safe = np.where(rho_arr > 0, rho_arr, 1.0)
    kinetic = np.where(rho_arr > 0, 0.5 * np.square(q) / safe, 0.0)
    value = kinetic + law.p0 / (law.gamma - 1.0) * np.power(rho_arr, law.gamma)
    return float(value) if np.ndim(value) == 0 else value


def entropy_flux(law: PressureLaw, state: State):
    """Entropy flux ``q**3/(2 rho**2) + p0 gamma/(gamma-1) rho**(gamma-1) q``."""
    rho, q = state
    _require_nonnegative(rho)
    _require_no_vacuum_momentum(rho, q)
    rho_arr = np.asarray(rho, dtype=float)
    safe = np.where(rho_arr > 0, rho_arr, 1.0)
    kinetic = np.where(rho_arr > 0, 0.5 * np.power(q, 3) / np.square(safe), 0.0)
    thermal = law.p0 * law.gamma / (law.gamma - 1.0) * np.power(rho_arr, law.gamma - 1.0) * q
    value = kinetic + thermal
    return float(value) if np.ndim(value) == 0 else value
