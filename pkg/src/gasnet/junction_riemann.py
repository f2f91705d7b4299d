"""Riemann-invariant junction solver for two-arc junctions.

The left arc ends at the junction and the right arc starts there.  Junction
states are sought on the invariant curves

    left:  q = z1 rho - alpha rho c(rho)
    right: q = z2 rho + alpha rho c(rho)

coupled through ``q* = kappa (rho*_l - rho*_r)``.  Only ``1 < gamma <= 3`` is
supported.  All root finding is bracketed bisection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import (DomainError, PressureLaw, Regime, State, classify, eigenvalues,
                    riemann_invariants, sonic_curves)

MAX_ITER = 200
Q_TOL = 1e-12


class Unsupported(Exception):
    """The Riemann-invariant construction has no admissible solution."""

    def __init__(self, reason: str, detail: str = ""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason
        self.detail = detail


@dataclass(frozen=True)
class Applicability:
    status: str  # "subsonic" | "supersonic" | "unsupported"
    kind: str = ""
    reason: str = ""

    @property
    def ok(self) -> bool:
        return self.status != "unsupported"


@dataclass(frozen=True)
class InvariantCurve:
    side: str  # "left" | "right"
    constant: float
    law: PressureLaw

    @classmethod
    def through(cls, law: PressureLaw, state: State, side: str) -> "InvariantCurve":
        z1, z2 = riemann_invariants(law, state)
        return cls(side, float(z1 if side == "left" else z2), law)

    @property
    def _sign(self) -> float:
        return -1.0 if self.side == "left" else 1.0

    def extremum_density(self) -> float:
        """Density where the curve crosses its sonic curve (0 when monotone)."""
        z = self.constant if self.side == "left" else -self.constant
        if z <= 0:
            return 0.0
        g = self.law.gamma
        return rho_from_sound_speed(self.law, (g - 1.0) / (g + 1.0) * z)

    def extremum(self) -> float:
        return curve_eval(self, self.extremum_density())


def _c(law: PressureLaw, rho: float) -> float:
    return math.sqrt(law.p0 * law.gamma * rho ** (law.gamma - 1.0)) if rho > 0 else 0.0


def rho_from_sound_speed(law: PressureLaw, c: float) -> float:
    return (c * c / (law.p0 * law.gamma)) ** (1.0 / (law.gamma - 1.0))


def curve_eval(curve: InvariantCurve, rho: float) -> float:
    if rho < 0:
        raise DomainError("density must be nonnegative")
    law = curve.law
    return curve.constant * rho + curve._sign * law.alpha * rho * _c(law, rho)


def _bisect(f, lo: float, hi: float, tol: float, max_iter: int = MAX_ITER) -> float:
    """Root of an increasing ``f`` with ``f(lo) <= 0 <= f(hi)``."""
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol or mid in (lo, hi):
            break
        if f(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def branch_inverse(curve: InvariantCurve, q: float) -> float:
    """Density on the monotone (subsonic-side) branch with ``curve(rho) = q``.

    The left branch decreases and the right one increases for rho beyond
    the extremum density.
    """
    lo = curve.extremum_density()
    top = curve_eval(curve, lo)
    s = curve._sign  # left curve decreases (-1), right increases (+1)
    if s * (q - top) < 0:
        raise Unsupported("outside_curve_range", f"q={q} beyond extremum {top} of {curve.side} curve")
    hi = max(2.0 * lo, 1.0)
    for _ in range(2000):
        if s * (curve_eval(curve, hi) - q) > 0:
            break
        hi *= 2.0
    else:
        raise Unsupported("outside_curve_range", f"no bracket for q={q}")
    f = lambda rho: s * (curve_eval(curve, rho) - q)
    return _bisect(f, lo, hi, tol=1e-15 * hi, max_iter=400)


def _check_gamma(law: PressureLaw):
    if law.gamma > 3:
        raise Unsupported("gamma_above_3", f"gamma={law.gamma}")


def intersection_point(law: PressureLaw, u_left: State, u_right: State):
    """Nonzero crossing ``(rho_I, q_I)`` of the left and right invariant curves.

    The curves meet where ``2 alpha c(rho) = z1 - z2``, which is solved in
    closed form.
    """
    _check_gamma(law)
    z1 = float(riemann_invariants(law, u_left)[0])
    z2 = float(riemann_invariants(law, u_right)[1])
    if z1 < z2:
        raise Unsupported("riemann_condition", f"z1={z1} < z2={z2}")
    rho_i = rho_from_sound_speed(law, (z1 - z2) / (2.0 * law.alpha))
    q_i = curve_eval(InvariantCurve("left", z1, law), rho_i)
    return rho_i, q_i


def _jtc_root(kappa, left: InvariantCurve, right: InvariantCurve, lo: float, hi: float) -> float:
    """Root of ``q - kappa (phi_l(q) - phi_r(q))`` on ``[lo, hi]`` (increasing)."""
    g = lambda q: q - kappa * (branch_inverse(left, q) - branch_inverse(right, q))
    if lo == hi:
        return lo
    return _bisect(g, lo, hi, tol=Q_TOL)


def subsonic_solve(law: PressureLaw, kappa: float, u_left: State, u_right: State,
                   check_monotone: bool = False):
    """Junction states for subsonic data; returns ``(q*, rho*_l, rho*_r)``."""
    _check_gamma(law)
    if kappa < 0:
        raise DomainError(f"kappa must be nonnegative, got {kappa}")
    for name, s in (("left", u_left), ("right", u_right)):
        if s[0] <= 0 or classify(law, s) is not Regime.SUBSONIC:
            raise Unsupported("not_subsonic", f"{name} state {tuple(s)} is not subsonic")
    left = InvariantCurve.through(law, u_left, "left")
    right = InvariantCurve.through(law, u_right, "right")
    _, q_i = intersection_point(law, u_left, u_right)
    lo, hi = min(0.0, q_i), max(0.0, q_i)
    if check_monotone:
        _check_k_monotone(kappa, left, right, lo, hi)
    q_star = _jtc_root(kappa, left, right, lo, hi)
    rho_l = branch_inverse(left, q_star)
    rho_r = branch_inverse(right, q_star)
    for rho in (rho_l, rho_r):
        qm, qp = sonic_curves(law, rho)
        if not qm < q_star < qp:
            raise Unsupported("not_subsonic", f"junction state ({rho}, {q_star}) left the subsonic region")
    return q_star, rho_l, rho_r


def _check_k_monotone(kappa, left, right, lo, hi, samples: int = 100):
    if hi <= lo:
        return
    pts = [lo + (hi - lo) * (k + 0.5) / samples for k in range(samples)]
    ks = [q / (branch_inverse(left, q) - branch_inverse(right, q)) for q in pts]
    increasing = hi > 0
    ok = all((b > a) if increasing else (b < a) for a, b in zip(ks, ks[1:]))
    if not ok:
        raise AssertionError("K(q) is not strictly monotone on the bracket")


def supersonic_mirror(law: PressureLaw, state: State, side: str) -> State:
    """State with the same momentum and the same invariant across the sonic point.

    On the left curve (invariant z1) a state with ``mu1 > 0`` maps to its
    ``mu1 < 0`` partner and vice versa; the right curve (z2) swaps the sign
    of ``mu2``.  A sonic state is its own mirror.
    """
    rho, q = state
    if rho <= 0:
        raise DomainError("density must be positive")
    curve = InvariantCurve.through(law, state, side)
    rho_ext = curve.extremum_density()
    if rho_ext <= 0 or (side == "left" and q <= 0) or (side == "right" and q >= 0):
        raise DomainError(f"{side} state {tuple(state)} has no mirror state")
    if math.isclose(rho, rho_ext, rel_tol=1e-13):
        return State(rho, q)
    if rho > rho_ext:
        # subsonic side back to the supersonic root on (0, rho_ext)
        s = -curve._sign
        f = lambda r: s * (curve_eval(curve, r) - q)
        return State(_bisect(f, 0.0, rho_ext, tol=1e-15 * rho_ext, max_iter=400), q)
    mu1, mu2 = eigenvalues(law, state)
    if (side == "left" and mu1 < 0) or (side == "right" and mu2 > 0):
        raise DomainError(f"{side} state {tuple(state)} is inconsistent with its curve")
    return State(branch_inverse(curve, q), q)


def _left_interval(law: PressureLaw, u: State, curve: InvariantCurve):
    """Admissible momentum interval ``(lo, hi)`` for the left junction state, and its kind."""
    mu1, mu2 = eigenvalues(law, u)
    alpha = law.alpha
    top = curve.extremum()
    # density where mu2 = z1 - (alpha - 1) c vanishes on this curve
    q_mu2 = -math.inf
    if alpha > 1 and curve.constant > 0:
        q_mu2 = curve_eval(curve, rho_from_sound_speed(law, curve.constant / (alpha - 1.0)))
    if mu1 >= 0:
        return -math.inf, min(float(u[1]), top), "left_mirror"
    if mu2 <= 0:
        return -math.inf, (q_mu2 if q_mu2 > -math.inf else top), "left_stay"
    return q_mu2, top, "left_subsonic"


def _right_interval(law: PressureLaw, u: State, curve: InvariantCurve):
    mu1, mu2 = eigenvalues(law, u)
    alpha = law.alpha
    bottom = curve.extremum()
    q_mu1 = math.inf
    if alpha > 1 and curve.constant < 0:
        q_mu1 = curve_eval(curve, rho_from_sound_speed(law, -curve.constant / (alpha - 1.0)))
    if mu2 <= 0:
        return bottom, float(u[1]), "right_mirror"
    if mu1 >= 0:
        return (q_mu1 if q_mu1 < math.inf else bottom), math.inf, "right_stay"
    return bottom, q_mu1, "right_subsonic"


def constrained_solve(law: PressureLaw, kappa: float, u_left: State, u_right: State):
    """Junction states for arbitrary regimes following the invariant-curve rules.

    Returns ``(q*, rho*_l, rho*_r, kind)``; raises :class:`Unsupported` when no
    admissible state satisfies the transmission condition.
    """
    _check_gamma(law)
    left = InvariantCurve.through(law, u_left, "left")
    right = InvariantCurve.through(law, u_right, "right")
    l_lo, l_hi, l_kind = _left_interval(law, u_left, left)
    r_lo, r_hi, r_kind = _right_interval(law, u_right, right)
    lo, hi = max(l_lo, r_lo), min(l_hi, r_hi)
    kind = f"{l_kind}+{r_kind}"
    if not lo < hi:
        raise Unsupported("no_admissible_intersection", f"{kind}: empty momentum interval")

    # the right branch always bounds q from below and the left one from above
    g = lambda q: q - kappa * (branch_inverse(left, q) - branch_inverse(right, q))
    if not (g(lo) < 0 < g(hi)):
        raise Unsupported("no_admissible_intersection", f"{kind}: no root of the transmission condition")
    q_star = _bisect(g, lo, hi, tol=Q_TOL)
    return q_star, branch_inverse(left, q_star), branch_inverse(right, q_star), kind


@dataclass(frozen=True)
class RiemannJunction:
    q_star: float
    rho_star_l: float
    rho_star_r: float


def riemann_junction_solve(law: PressureLaw, kappa: float, u_left: State, u_right: State):
    """Dispatch on the regimes of the data; returns ``(solution | None, Applicability)``."""
    try:
        _check_gamma(law)
        if u_left[0] <= 0 or u_right[0] <= 0:
            raise Unsupported("vacuum", "junction data must have positive density")
        sub_l = classify(law, u_left) is Regime.SUBSONIC
        sub_r = classify(law, u_right) is Regime.SUBSONIC
        if sub_l and sub_r:
            q, rl, rr = subsonic_solve(law, kappa, u_left, u_right)
            return RiemannJunction(q, rl, rr), Applicability("subsonic")
        q, rl, rr, kind = constrained_solve(law, kappa, u_left, u_right)
        return RiemannJunction(q, rl, rr), Applicability("supersonic", kind=kind)
    except Unsupported as exc:
        return None, Applicability("unsupported", reason=exc.reason)
