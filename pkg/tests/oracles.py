"""Independent reference computations used by the tests.

These avoid the package's own closed forms: curves are scanned on fine
grids, roots are bracketed from scratch and integrals are summed directly.
"""

import math

import numpy as np


def sound(p0, gamma, rho):
    return np.sqrt(p0 * gamma * np.power(rho, gamma - 1.0))


def left_curve(p0, gamma, z1, rho):
    return z1 * rho - 2.0 / (gamma - 1.0) * rho * sound(p0, gamma, rho)


def right_curve(p0, gamma, z2, rho):
    return z2 * rho + 2.0 / (gamma - 1.0) * rho * sound(p0, gamma, rho)


def invariants(p0, gamma, rho, q):
    c = math.sqrt(p0 * gamma * rho ** (gamma - 1.0))
    a = 2.0 / (gamma - 1.0)
    return q / rho + a * c, q / rho - a * c


def scan_intersection(p0, gamma, left, right, rho_max=50.0, n=2_000_001):
    """Nonzero crossing of the invariant curves by a sign-change scan and refinement."""
    z1 = invariants(p0, gamma, *left)[0]
    z2 = invariants(p0, gamma, *right)[1]
    rho = np.linspace(rho_max / n, rho_max, n)
    d = left_curve(p0, gamma, z1, rho) - right_curve(p0, gamma, z2, rho)
    idx = np.flatnonzero(np.sign(d[:-1]) != np.sign(d[1:]))
    assert idx.size == 1, idx
    a, b = rho[idx[0]], rho[idx[0] + 1]
    for _ in range(100):
        m = 0.5 * (a + b)
        dm = left_curve(p0, gamma, z1, m) - right_curve(p0, gamma, z2, m)
        da = left_curve(p0, gamma, z1, a) - right_curve(p0, gamma, z2, a)
        if np.sign(dm) == np.sign(da):
            a = m
        else:
            b = m
    r = 0.5 * (a + b)
    return r, float(left_curve(p0, gamma, z1, r))


def grid_search_junction(p0, gamma, kappa, left, right, step=1e-4, rho_hi=None, allow_none=False):
    """Subsonic junction states by scanning the left density on a uniform grid.

    Along the subsonic part of the left invariant curve the momentum is known;
    the right density with the same momentum is read off a tabulated right
    curve, and the sign change of the transmission residual is located on
    the grid and refined by linear interpolation.  Returns ``(q, rho_l, rho_r)``,
    or None when ``allow_none`` is set and the residual never changes sign.
    """
    z1 = invariants(p0, gamma, *left)[0]
    z2 = invariants(p0, gamma, *right)[1]
    hi = rho_hi if rho_hi is not None else 4.0 * max(left[0], right[0]) + 1.0
    rho = np.arange(step, hi, step)
    c = sound(p0, gamma, rho)
    ql = left_curve(p0, gamma, z1, rho)
    qr = right_curve(p0, gamma, z2, rho)
    sub_l = np.abs(ql) < rho * c
    sub_r = np.abs(qr) < rho * c
    rl, ql = rho[sub_l], ql[sub_l]
    rr_tab, qr_tab = rho[sub_r], qr[sub_r]
    inside = (ql >= qr_tab.min()) & (ql <= qr_tab.max())
    rl, ql = rl[inside], ql[inside]
    rr = np.interp(ql, qr_tab, rr_tab)  # right subsonic branch is increasing in q
    res = ql - kappa * (rl - rr)
    flips = np.flatnonzero(np.sign(res[:-1]) != np.sign(res[1:]))
    if res.size and np.any(res == 0):
        k = int(np.flatnonzero(res == 0)[0])
        return float(ql[k]), float(rl[k]), float(rr[k])
    if flips.size == 0 and allow_none:
        return None
    assert flips.size == 1, flips
    k = int(flips[0])
    w = res[k] / (res[k] - res[k + 1])
    lerp = lambda a: float(a[k] + w * (a[k + 1] - a[k]))
    return lerp(ql), lerp(rl), lerp(rr)


def bisect(f, a, b, iters=200):
    fa = f(a)
    for _ in range(iters):
        m = 0.5 * (a + b)
        fm = f(m)
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def entropy_flux(p0, gamma, rho, q):
    u = q / rho
    return 0.5 * rho * u**3 + p0 * gamma / (gamma - 1.0) * rho**gamma * u


def hll_step_closed_arc(p0, gamma, rho, q, lam, ratio):
    """One explicit HLL step on a walled arc, written with plain loops."""
    n = len(rho)
    R = [rho[0]] + list(rho) + [rho[-1]]
    Q = [-q[0]] + list(q) + [-q[-1]]

    def flux(r, m):
        if r == 0:
            return 0.0, 0.0
        return m, m * m / r + p0 * r**gamma

    F = []
    for j in range(n + 1):
        fa, fb = flux(R[j], Q[j]), flux(R[j + 1], Q[j + 1])
        F.append((0.5 * (fa[0] + fb[0]) - 0.5 * lam * (R[j + 1] - R[j]),
                  0.5 * (fa[1] + fb[1]) - 0.5 * lam * (Q[j + 1] - Q[j])))
    new_r = [rho[j] - ratio * (F[j + 1][0] - F[j][0]) for j in range(n)]
    new_q = [q[j] - ratio * (F[j + 1][1] - F[j][1]) for j in range(n)]
    return np.array(new_r), np.array(new_q)


def two_arc_network_toml(rho_l, q_l, rho_r, q_r, kappa=1.0, length=2.0, cells=40, gamma=2.0, t_end=1.0,
                         solver="relaxation", extra_sim=""):
    return f"""
[pressure]
p0 = 1.0
gamma = {gamma}

[[arc]]
id = "l"
tail = "a"
head = "J"
length = {length}
cells = {cells}

[[arc]]
id = "r"
tail = "J"
head = "b"
length = {length}
cells = {cells}

[[node]]
id = "a"
kind = "outer"

[[node]]
id = "J"
kind = "junction"
kappa = {kappa}

[[node]]
id = "b"
kind = "outer"

[[initial]]
arc = "l"
kind = "constant"
rho0 = {rho_l}
q0 = {q_l}

[[initial]]
arc = "r"
kind = "constant"
rho0 = {rho_r}
q0 = {q_r}

[sim]
t_end = {t_end}
junction_solver = "{solver}"
{extra_sim}
"""
