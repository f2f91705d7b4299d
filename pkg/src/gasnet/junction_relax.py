"""Relaxation junction solver for the jump transmission condition.

At a junction the unknown ghost states ``(rho*_i, q*_i)`` satisfy the
permeability law

    s_i q*_i = sum_j kappa_ij (rho*_i - rho*_j),   s_i = +1 incoming, -1 outgoing,

together with the outgoing-characteristic relation of the arc's own
relaxation system, which pins ``q*_i`` to a line of slope ``lambda_i``
through the adjacent cell state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import DomainError, State
from .network import Node


@dataclass(frozen=True)
class JunctionSolution:
    node_id: str
    arcs: tuple
    incoming: np.ndarray
    rho_star: np.ndarray
    q_star: np.ndarray
    jtc_residual: float = 0.0
    characteristic_residual: float = 0.0

    def ghost(self, arc_id: str) -> State:
        i = self.arcs.index(arc_id)
        return State(float(self.rho_star[i]), float(self.q_star[i]))

    def signed_flux(self) -> np.ndarray:
        """Mass flux out of each arc into the node."""
        return np.where(self.incoming, self.q_star, -self.q_star)


def two_arc_jtc(kappa: float, lam_l: float, lam_r: float, u_left: State, u_right: State):
    """Closed-form junction values for an incoming (left) and outgoing (right) arc.

    Returns ``(q_star, rho_star_l, rho_star_r)``.
    """
    if kappa < 0:
        raise DomainError(f"kappa must be nonnegative, got {kappa}")
    if not (lam_l > 0 and lam_r > 0):
        raise DomainError("relaxation speeds must be positive")
    rho_l, q_l = u_left
    rho_r, q_r = u_right
    q_star = kappa / (kappa * (lam_l + lam_r) + lam_l * lam_r) * (
        lam_r * q_l + lam_l * q_r + lam_l * lam_r * (rho_l - rho_r))
    rho_star_r = rho_r + (q_star - q_r) / lam_r
    rho_star_l = rho_l - (q_star - q_l) / lam_l
    return q_star, rho_star_l, rho_star_r


def two_arc_residual(kappa, lam_l, lam_r, u_left, u_right, q_star, rho_star_l, rho_star_r):
    """Max absolute residual of the three two-arc junction equations."""
    r1 = q_star - kappa * (rho_star_l - rho_star_r)
    r2 = (rho_star_l + q_star / lam_l) - (u_left[0] + u_left[1] / lam_l)
    r3 = (rho_star_r - q_star / lam_r) - (u_right[0] - u_right[1] / lam_r)
    return max(abs(r1), abs(r2), abs(r3))


def _check_inputs(node: Node, adjacent_states, lambdas, incoming):
    if not node.is_junction:
        raise DomainError(f"node {node.id!r} is not a junction")
    n = len(node.arcs)
    if not (len(adjacent_states) == len(lambdas) == len(incoming) == n):
        raise DomainError(f"node {node.id!r}: expected {n} adjacent states, speeds and orientations")
    lam = np.asarray(lambdas, dtype=float)
    if np.any(lam <= 0):
        raise DomainError(f"node {node.id!r}: relaxation speeds must be positive")
    return lam


def assemble_node_system(node: Node, adjacent_states: Sequence[State], lambdas: Sequence[float],
                         incoming: Sequence[bool]):
    """Linear system ``A rho* = b`` for the junction densities.

    ``adjacent_states[i]`` is the interior cell touching the node on arc
    ``node.arcs[i]``; ``incoming[i]`` tells whether that arc ends at the node.
    """
    lam = _check_inputs(node, adjacent_states, lambdas, incoming)
    kappa = node.kappa_matrix()
    a = -kappa.copy()
    np.fill_diagonal(a, kappa.sum(axis=1) - np.diag(kappa) + lam)
    rho = np.array([s[0] for s in adjacent_states], dtype=float)
    q = np.array([s[1] for s in adjacent_states], dtype=float)
    sign = np.where(np.asarray(incoming, dtype=bool), 1.0, -1.0)
    b = sign * q + lam * rho
    return a, b


def solve_node(node: Node, adjacent_states: Sequence[State], lambdas: Sequence[float],
               incoming: Sequence[bool]) -> JunctionSolution:
    a, b = assemble_node_system(node, adjacent_states, lambdas, incoming)
    off = np.abs(a).sum(axis=1) - np.abs(np.diag(a))
    if not np.all(np.abs(np.diag(a)) > off):
        raise DomainError(f"node {node.id!r}: junction matrix is not strictly diagonally dominant")
    rho_star = np.linalg.solve(a, b)

    lam = np.asarray(lambdas, dtype=float)
    rho = np.array([s[0] for s in adjacent_states], dtype=float)
    q = np.array([s[1] for s in adjacent_states], dtype=float)
    inc = np.asarray(incoming, dtype=bool)
    sign = np.where(inc, 1.0, -1.0)
    # outgoing: q* = q + lam (rho* - rho); incoming: q* = q - lam (rho* - rho)
    q_star = q - sign * lam * (rho_star - rho)

    kappa = node.kappa_matrix()
    jtc = sign * q_star - (kappa.sum(axis=1) * rho_star - kappa @ rho_star)
    char = (q_star + sign * lam * rho_star) - (q + sign * lam * rho)
    return JunctionSolution(
        node.id, tuple(node.arcs), inc, rho_star, q_star,
        float(np.max(np.abs(jtc))), float(np.max(np.abs(char))))


def junction_ghosts(solution: JunctionSolution) -> dict:
    """Ghost state of every incident arc at this junction, keyed by arc id."""
    return {arc_id: solution.ghost(arc_id) for arc_id in solution.arcs}
