import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gasnet.junction_riemann import (InvariantCurve, Unsupported, curve_eval, intersection_point,
                                     riemann_junction_solve, subsonic_solve, supersonic_mirror)
from gasnet.model import DomainError, PressureLaw, State, eigenvalues, riemann_invariants, sonic_curves
from oracles import bisect, grid_search_junction, scan_intersection

LAW = PressureLaw(1.0, 2.0)


def test_curve_through_source_and_origin():
    left = InvariantCurve.through(LAW, State(1.0, 0.0), "left")
    assert curve_eval(left, 1.0) == pytest.approx(0.0, abs=1e-14)
    assert curve_eval(left, 0.0) == 0.0
    right = InvariantCurve.through(LAW, State(2.0, 0.7), "right")
    assert curve_eval(right, 2.0) == pytest.approx(0.7)


@pytest.mark.parametrize("gamma", [1.4, 2.0, 3.0])
def test_left_curve_maximum(gamma):
    law = PressureLaw(1.0, gamma)
    curve = InvariantCurve.through(law, State(1.0, 1.0), "left")
    rho_m = curve.extremum_density()
    c = math.sqrt(gamma * rho_m ** (gamma - 1))
    assert c == pytest.approx((gamma - 1) / (gamma + 1) * curve.constant)
    h = 1e-6 * rho_m
    slope = (curve_eval(curve, rho_m + h) - curve_eval(curve, rho_m - h)) / (2 * h)
    assert abs(slope) < 1e-6 * max(1.0, abs(curve.constant))
    assert curve_eval(curve, rho_m) > curve_eval(curve, 0.9 * rho_m)
    assert curve_eval(curve, rho_m) > curve_eval(curve, 1.1 * rho_m)


def test_intersection_symmetric():
    assert intersection_point(LAW, State(1.0, 0.0), State(1.0, 0.0)) == pytest.approx((1.0, 0.0), abs=1e-12)


def test_intersection_against_scan():
    expected = scan_intersection(1.0, 2.0, (1.5, 0.5), (1.0, 0.5))
    assert intersection_point(LAW, State(1.5, 0.5), State(1.0, 0.5)) == pytest.approx(expected, abs=1e-6)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.2, 5.0), st.floats(-0.8, 0.8), st.floats(0.2, 5.0), st.floats(-0.8, 0.8), st.floats(1.2, 3.0))
def test_intersection_against_scan_random(rl, ml, rr, mr, gamma):
    law = PressureLaw(1.0, gamma)
    cl, cr = math.sqrt(gamma * rl ** (gamma - 1)), math.sqrt(gamma * rr ** (gamma - 1))
    ul, ur = State(rl, ml * rl * cl), State(rr, mr * rr * cr)
    rho_i, q_i = intersection_point(law, ul, ur)
    ref = scan_intersection(1.0, gamma, ul, ur, rho_max=4 * rho_i + 1, n=400_001)
    assert (rho_i, q_i) == pytest.approx(ref, rel=1e-8, abs=1e-8)


def test_intersection_condition_violated():
    # z1(left) < z2(right): left moves fast backwards, right fast forwards
    with pytest.raises(Unsupported) as err:
        intersection_point(LAW, State(1.0, -10.0), State(1.0, 10.0))
    assert err.value.reason == "riemann_condition"


def test_gamma_above_three_unsupported():
    with pytest.raises(Unsupported) as err:
        intersection_point(PressureLaw(1.0, 3.5), State(1, 0), State(1, 0))
    assert err.value.reason == "gamma_above_3"
    sol, app = riemann_junction_solve(PressureLaw(1.0, 3.5), 1.0, State(1, 0), State(1, 0))
    assert sol is None and app.reason == "gamma_above_3"


def test_subsonic_rest():
    for kappa in (0.0, 1.0, 100.0):
        assert subsonic_solve(LAW, kappa, State(2.0, 0), State(2.0, 0)) == pytest.approx((0, 2, 2), abs=1e-10)


def test_subsonic_large_kappa_tends_to_intersection():
    ul, ur = State(1.5, 0.5), State(1.0, 0.5)
    rho_i, q_i = intersection_point(LAW, ul, ur)
    q, rl, rr = subsonic_solve(LAW, 1e8, ul, ur)
    assert q == pytest.approx(q_i, abs=1e-6)
    assert abs(rl - rr) < 1e-6


def test_subsonic_c1_against_grid_search():
    ul, ur = State(4.5, 0.5), State(4.0, 0.5)
    q, rl, rr = subsonic_solve(LAW, 1.0, ul, ur, check_monotone=True)
    assert (q, rl, rr) == pytest.approx(grid_search_junction(1.0, 2.0, 1.0, ul, ur), abs=1e-4)
    for rho in (rl, rr):
        lo, hi = sonic_curves(LAW, rho)
        assert lo < q < hi


def subsonic_pair(draw_rho, draw_mach):
    rho = draw_rho
    return State(rho, draw_mach * rho * math.sqrt(2 * rho))


@settings(max_examples=60, deadline=None)
@given(st.floats(0.2, 5.0), st.floats(-0.9, 0.9), st.floats(0.2, 5.0), st.floats(-0.9, 0.9), st.floats(0.01, 20.0))
def test_subsonic_random_against_grid_search(rl, ml, rr, mr, kappa):
    ul, ur = subsonic_pair(rl, ml), subsonic_pair(rr, mr)
    try:
        q, a, b = subsonic_solve(LAW, kappa, ul, ur, check_monotone=True)
    except Unsupported:
        return
    z1 = riemann_invariants(LAW, ul)[0]
    z2 = riemann_invariants(LAW, ur)[1]
    left, right = InvariantCurve("left", z1, LAW), InvariantCurve("right", z2, LAW)
    assert curve_eval(left, a) == pytest.approx(q, abs=1e-10 * max(1, abs(q)))
    assert curve_eval(right, b) == pytest.approx(q, abs=1e-10 * max(1, abs(q)))
    assert q == pytest.approx(kappa * (a - b), abs=1e-10 * max(1, kappa))
    assert (q, a, b) == pytest.approx(grid_search_junction(1.0, 2.0, kappa, ul, ur), abs=1e-4)


def test_mirror_example():
    u = State(1.0, 2.0)
    z1 = 2 + 2 * math.sqrt(2)
    expected = bisect(lambda r: 2 / r + 2 * math.sqrt(2) * math.sqrt(r) - z1, 1.2, 5.0)
    m = supersonic_mirror(LAW, u, "left")
    assert m.q == 2.0
    assert m.rho == pytest.approx(expected, abs=1e-10)
    assert m.rho == pytest.approx(1.601, abs=2e-3)  # quoted to three decimals; true root 1.60213
    assert eigenvalues(LAW, m)[0] < 0
    assert supersonic_mirror(LAW, m, "left").rho == pytest.approx(1.0, abs=1e-8)


def test_mirror_sonic_is_fixed():
    rho = 2.0
    q = sonic_curves(LAW, rho)[1]
    m = supersonic_mirror(LAW, State(rho, q), "left")
    assert m.rho == pytest.approx(rho, rel=1e-6)


def test_mirror_right_side():
    u = State(1.0, -2.0)
    m = supersonic_mirror(LAW, u, "right")
    assert eigenvalues(LAW, m)[1] > 0
    assert riemann_invariants(LAW, m)[1] == pytest.approx(riemann_invariants(LAW, u)[1])


def test_mirror_wrong_regime():
    with pytest.raises(DomainError):
        supersonic_mirror(LAW, State(1.0, -2.0), "left")


def test_dispatch_c3():
    ul, ur = State(2.5, 0.5), State(2.0, 0.5)
    sol, app = riemann_junction_solve(LAW, 1.0, ul, ur)
    assert app.ok
    assert (sol.q_star, sol.rho_star_l, sol.rho_star_r) == pytest.approx((0.5, 2.5, 2.0), abs=1e-9)


def test_dispatch_kappa100_unsupported():
    sol, app = riemann_junction_solve(LAW, 100.0, State(2.5, 200.0), State(0.5, 200.0))
    assert sol is None and not app.ok and app.reason


def test_dispatch_rest():
    sol, app = riemann_junction_solve(LAW, 1.0, State(3.0, 0.0), State(3.0, 0.0))
    assert app.status == "subsonic"
    assert (sol.q_star, sol.rho_star_l, sol.rho_star_r) == pytest.approx((0, 3, 3), abs=1e-10)


def test_dispatch_c4_left_supersonic():
    # left state supersonic with negative velocity (both eigenvalues negative)
    ul = State(0.1, -0.2)
    assert eigenvalues(LAW, ul)[1] < 0
    sol, app = riemann_junction_solve(LAW, 1.0, ul, State(0.3, -0.2))
    if app.ok:
        assert app.status == "supersonic" and "left_stay" in app.kind
        z1 = riemann_invariants(LAW, ul)[0]
        assert curve_eval(InvariantCurve("left", z1, LAW), sol.rho_star_l) == pytest.approx(sol.q_star)
        assert eigenvalues(LAW, State(sol.rho_star_l, sol.q_star))[1] < 0
        assert sol.q_star == pytest.approx(sol.rho_star_l - sol.rho_star_r)
    else:
        assert app.reason == "no_admissible_intersection"
