"""Finite-volume discretisation on a single arc.

Interior cells are indexed 1..J; the two ghost states (cells 0 and J+1) are
supplied by the caller, so the update kernel never branches on boundary type.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import DomainError, PressureLaw, State, physical_flux


class NumericalError(RuntimeError):
    """A stability or positivity violation during time stepping."""


class CFLViolation(NumericalError):
    pass


class PositivityError(NumericalError):
    pass


@dataclass
class ArcGrid:
    arc_id: str
    dx: float
    rho: np.ndarray
    q: np.ndarray
    lam: float = 0.0

    @property
    def state(self) -> State:
        return State(self.rho, self.q)

    def copy(self) -> "ArcGrid":
        return ArcGrid(self.arc_id, self.dx, self.rho.copy(), self.q.copy(), self.lam)


def general_flux(law: PressureLaw, u_minus: State, u_plus: State, c1: float, c2: float):
    """HLL flux with relaxation speeds ``c1 < c2``."""
    if not c1 < c2:
        raise DomainError(f"relaxation speeds must satisfy c1 < c2, got {c1}, {c2}")
    f_minus = physical_flux(law, u_minus)
    f_plus = physical_flux(law, u_plus)
    if c1 > 0:
        return f_minus
    if c2 < 0:
        return f_plus
    width = c2 - c1
    return tuple(
        (c2 * fm - c1 * fp) / width + c2 * c1 / width * (up - um)
        for fm, fp, um, up in zip(f_minus, f_plus, u_minus, u_plus)
    )


def symmetric_flux(law: PressureLaw, u_minus: State, u_plus: State, lam):
    """``(F(U-) + F(U+))/2 - lam/2 (U+ - U-)``; vectorised over states."""
    if not np.all(np.asarray(lam) > 0):
        raise DomainError("relaxation speed must be positive")
    fm_rho, fm_q = physical_flux(law, u_minus)
    fp_rho, fp_q = physical_flux(law, u_plus)
    flux_rho = 0.5 * (fm_rho + fp_rho) - 0.5 * lam * (u_plus[0] - u_minus[0])
    flux_q = 0.5 * (fm_q + fp_q) - 0.5 * lam * (u_plus[1] - u_minus[1])
    return flux_rho, flux_q


def max_wave_speed(law: PressureLaw, state: State) -> float:
    """``max_j |u_j| + c(rho_j)``; cells at vacuum rest contribute zero."""
    rho = np.asarray(state[0], dtype=float)
    q = np.asarray(state[1], dtype=float)
    if np.any(rho < 0):
        raise DomainError("negative density")
    if np.any((rho == 0) & (q != 0)):
        raise DomainError("vacuum cell with nonzero momentum")
    occupied = rho > 0
    if not np.any(occupied):
        return 0.0
    r = rho[occupied]
    speeds = np.abs(q[occupied] / r) + np.sqrt(law.p0 * law.gamma * r ** (law.gamma - 1.0))
    return float(np.max(speeds))


def arc_speed(law: PressureLaw, state: State, safety: float = 1.0) -> float:
    """Relaxation speed ``safety * max_j(|u_j| + c_j)`` for one arc."""
    if not safety >= 1:
        raise DomainError(f"safety factor must be >= 1, got {safety}")
    return safety * max_wave_speed(law, state)


def cfl_dt(dx_min: float, lambda_max: float, cfl: float = 0.9) -> float:
    if not lambda_max > 0:
        raise DomainError(f"maximal relaxation speed must be positive, got {lambda_max}")
    if not 0 < cfl <= 1:
        raise DomainError(f"cfl must lie in (0, 1], got {cfl}")
    return cfl * dx_min / lambda_max


def outer_ghost(adjacent: State) -> State:
    """Mirror state ``(rho, -q)`` giving a zero mass flux through a wall."""
    return State(adjacent[0], -adjacent[1])


def interface_fluxes(law, rho, q, lam, left_ghost: State, right_ghost: State):
    """Fluxes at the J+1 interfaces of an arc, ghosts included."""
    r = np.concatenate(([left_ghost[0]], rho, [right_ghost[0]]))
    m = np.concatenate(([left_ghost[1]], q, [right_ghost[1]]))
    return symmetric_flux(law, State(r[:-1], m[:-1]), State(r[1:], m[1:]), lam)


def conservative_update(law: PressureLaw, grid: ArcGrid, left_ghost: State,
                        right_ghost: State, dt: float) -> State:
    """One explicit step ``U_j - dt/dx (F_{j+1/2} - F_{j-1/2})``.

    Raises :class:`CFLViolation` when ``dt * lam > dx``.
    """
    if dt * grid.lam > grid.dx * (1.0 + 1e-12):
        raise CFLViolation(
            f"arc {grid.arc_id!r}: dt={dt:g} exceeds dx/lambda={grid.dx / grid.lam:g}")
    flux_rho, flux_q = interface_fluxes(law, grid.rho, grid.q, grid.lam, left_ghost, right_ghost)
    ratio = dt / grid.dx
    rho = grid.rho - ratio * np.diff(flux_rho)
    q = grid.q - ratio * np.diff(flux_q)
    return State(rho, q)
