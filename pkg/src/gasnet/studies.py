"""Grid-convergence and long-time decay studies built on :mod:`gasnet.simulator`."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace

import numpy as np

from .model import DomainError
from .network import Config, Network
from .simulator import (NetworkState, Simulator, UnsupportedJunction, initial_state, total_mass,
                        two_arc_orientation)

FIELDS = ("rho", "q")


def refine(config: Config, dx: float) -> Config:
    """Copy of ``config`` with every arc discretised at spacing ``dx``."""
    arcs = []
    for a in config.network.arcs:
        cells = round(a.length / dx)
        if cells < 1 or not math.isclose(cells * dx, a.length, rel_tol=1e-9):
            raise DomainError(f"arc {a.id!r} of length {a.length} is not a multiple of dx={dx}")
        arcs.append(replace(a, cells=cells))
    return replace(config, network=Network(tuple(arcs), config.network.nodes))


def restrict(values: np.ndarray, cells: int) -> np.ndarray:
    """Average a fine cell array onto ``cells`` equal coarse cells."""
    values = np.asarray(values, dtype=float)
    if cells < 1 or values.size % cells:
        raise DomainError(f"cannot restrict {values.size} cells onto {cells}")
    return values.reshape(cells, -1).mean(axis=1)


def l1_error(coarse: NetworkState, reference: NetworkState) -> dict:
    """``{(field, arc): dx * sum |v - restrict(v_ref)|}`` over every arc."""
    if coarse.grids.keys() != reference.grids.keys():
        raise DomainError("runs are defined on different arcs")
    if not math.isclose(coarse.t, reference.t, rel_tol=1e-12, abs_tol=1e-14):
        raise DomainError(f"runs end at different times {coarse.t} and {reference.t}")
    out = {}
    for arc_id, g in coarse.grids.items():
        ref = reference.grids[arc_id]
        if not math.isclose(g.dx * g.rho.size, ref.dx * ref.rho.size, rel_tol=1e-9):
            raise DomainError(f"arc {arc_id!r} has different lengths in the two runs")
        for name in FIELDS:
            v = getattr(g, name)
            out[(name, arc_id)] = float(g.dx * np.sum(np.abs(v - restrict(getattr(ref, name), v.size))))
    return out


@dataclass(frozen=True)
class ConvergenceRow:
    dx: float
    errors: dict  # (field, arc) -> L1 error
    orders: dict  # (field, arc) -> observed order against the next coarser level


def observed_order(err_coarse: float, err_fine: float, dx_coarse: float, dx_fine: float) -> float:
    """``log(e_c / e_f) / log(dx_c / dx_f)``; NaN when either error vanishes."""
    if err_coarse <= 0 or err_fine <= 0:
        return math.nan
    return math.log(err_coarse / err_fine) / math.log(dx_coarse / dx_fine)


def solve_at(config: Config, dx: float, t_end=None) -> NetworkState:
    cfg = refine(config, dx)
    final, _, _ = Simulator(cfg).run(t_end=t_end, snapshot_times=(), record=False)
    return final


def convergence_study(config: Config, dx_levels, reference_dx: float, t_end=None, progress=None):
    """Errors against a fine reference run and observed orders.

    The order of the first requested level needs the error at twice its
    spacing, which is computed as an extra, unreported level.
    """
    levels = sorted((float(d) for d in dx_levels), reverse=True)
    if not levels:
        raise DomainError("no grid levels requested")
    if not reference_dx < levels[-1]:
        raise DomainError("the reference grid must be finer than every level")
    say = progress or (lambda msg: None)
    say(f"reference run at dx={reference_dx:g}")
    reference = solve_at(config, reference_dx, t_end)
    errors = {}
    for dx in [2 * levels[0]] + levels:
        say(f"level dx={dx:g}")
        errors[dx] = l1_error(solve_at(config, dx, t_end), reference)
    rows = []
    previous = 2 * levels[0]
    for dx in levels:
        orders = {k: observed_order(errors[previous][k], errors[dx][k], previous, dx) for k in errors[dx]}
        rows.append(ConvergenceRow(dx, errors[dx], orders))
        previous = dx
    return rows


def _keys(network: Network):
    return [(f, a.id) for a in network.arcs for f in FIELDS]


def convergence_csv(network: Network, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    keys = _keys(network)
    w.writerow(["dx"] + [c for f, a in keys for c in (f"err_{f}_{a}", f"order_{f}_{a}")])
    for row in rows:
        w.writerow([repr(row.dx)] + [repr(v) for k in keys for v in (row.errors[k], row.orders[k])])
    return buf.getvalue()


# -- long-time decay ----------------------------------------------------------


def decay_fit(times, errors, t_min: float = 0.5):
    """Fit ``e(t) = C t**(-p)`` by least squares in log-log space.

    Parameters
    ----------
    times, errors : array_like
        Sample times and error values; samples with ``t < t_min`` are dropped.
    t_min : float
        Start of the fitting window.

    Returns
    -------
    (C, p) : tuple of float
        Prefactor and decay exponent.
    """
    t = np.asarray(times, dtype=float)
    e = np.asarray(errors, dtype=float)
    if t.shape != e.shape:
        raise DomainError("times and errors differ in length")
    keep = t >= t_min
    t, e = t[keep], e[keep]
    if t.size < 3:
        raise DomainError(f"need at least 3 samples with t >= {t_min}, got {t.size}")
    if np.any(t <= 0) or np.any(e <= 0):
        raise DomainError("times and errors must be positive")
    slope, intercept = np.polyfit(np.log(t), np.log(e), 1)
    return float(math.exp(intercept)), float(-slope)


def asymptotic_density(config: Config, state: NetworkState = None) -> float:
    """Total mass over total length."""
    state = initial_state(config) if state is None else state
    return total_mass(state) / config.network.total_length


def deviation_norms(state: NetworkState, rho_bar: float) -> dict:
    """``{(norm, field, arc): ||v - v_bar||}`` with ``q_bar = 0``; norms ``L1`` and ``Linf``."""
    out = {}
    for arc_id, g in state.grids.items():
        for name, target in (("rho", rho_bar), ("q", 0.0)):
            dev = np.abs(getattr(g, name) - target)
            out[("L1", name, arc_id)] = float(g.dx * dev.sum())
            out[("Linf", name, arc_id)] = float(dev.max())
    return out


@dataclass(frozen=True)
class DecayResult:
    times: np.ndarray
    deviations: dict  # (norm, field, arc) -> array over times
    fits: dict  # (norm, field, arc) -> (C, exponent)


def decay_study(config: Config, t_end: float, sample_every: float, t_min: float = 0.5) -> DecayResult:
    """Sample the distance to the constant state over time and fit power laws."""
    if not (sample_every > 0 and t_end > t_min):
        raise DomainError("need sample_every > 0 and t_end > t_min")
    n = int(round(t_end / sample_every))
    times = [k * sample_every for k in range(1, n + 1)]
    sim = Simulator(config)
    rho_bar = asymptotic_density(config)
    _, _, snaps = sim.run(t_end=t_end, snapshot_times=times, record=False)
    ts = np.array([t for t in sorted(snaps) if t > 0])
    series = {}
    for t in ts:
        for k, v in deviation_norms(snaps[t], rho_bar).items():
            series.setdefault(k, []).append(v)
    series = {k: np.array(v) for k, v in series.items()}
    fits = {k: decay_fit(ts, v, t_min) for k, v in series.items()}
    return DecayResult(ts, series, fits)


def decay_csv(network: Network, result: DecayResult) -> str:
    """One row per norm with ``C`` and exponent columns per field and arc."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    keys = _keys(network)
    w.writerow(["norm"] + [c for f, a in keys for c in (f"C_{f}_{a}", f"exponent_{f}_{a}")])
    for norm in ("L1", "Linf"):
        w.writerow([norm] + [repr(v) for f, a in keys for v in result.fits[(norm, f, a)]])
    return buf.getvalue()


def decay_series_csv(network: Network, result: DecayResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    keys = [(n, f, a) for n in ("L1", "Linf") for f, a in _keys(network)]
    w.writerow(["t"] + [f"{n}_{f}_{a}" for n, f, a in keys])
    for i, t in enumerate(result.times):
        w.writerow([repr(float(t))] + [repr(float(result.deviations[k][i])) for k in keys])
    return buf.getvalue()


# -- junction solver comparison ----------------------------------------------


@dataclass(frozen=True)
class JunctionComparison:
    node_id: str
    left: str
    right: str
    times: np.ndarray
    relaxation: dict  # trace name -> array on ``times``
    riemann: dict  # same keys, interpolated onto ``times``; empty if unsupported
    unsupported: str = ""  # reason reported by the Riemann solver
    max_discrepancy: float = math.nan
    max_discrepancy_after: dict = None  # t_min -> discrepancy restricted to t >= t_min

    @property
    def ok(self) -> bool:
        return not self.unsupported


TRACE_NAMES = ("rho_star_l", "rho_star_r", "q_star_l", "q_star_r")


def _traces(sim_monitors, node_id, left, right, network):
    rl, ql = sim_monitors.trace(node_id, left)
    rr, qr = sim_monitors.trace(node_id, right)
    # report momenta in the left-to-right direction
    if not network.is_incoming(left, node_id):
        ql = -ql
    if network.is_incoming(right, node_id):
        qr = -qr
    return dict(zip(TRACE_NAMES, (rl, rr, ql, qr)))


def compare_junction_solvers(config: Config, t_end=None, after=(0.25,)) -> JunctionComparison:
    """Run both junction solvers on a two-arc network and compare junction traces.

    Riemann traces are linearly interpolated onto the relaxation time levels.
    The trace at a time level is the ghost state used by the step ending there.
    """
    junctions = list(config.network.junctions())
    if len(config.network.arcs) != 2 or len(junctions) != 1 or len(junctions[0].arcs) != 2:
        raise DomainError("junction comparison needs a network of two arcs and one junction")
    node = junctions[0]
    left, right = two_arc_orientation(config.network, node)
    _, relax, _ = Simulator(config.with_sim(junction_solver="relaxation")).run(t_end=t_end, snapshot_times=())
    times = relax.times
    relax_tr = _traces(relax, node.id, left, right, config.network)
    try:
        _, riem, _ = Simulator(config.with_sim(junction_solver="riemann")).run(t_end=t_end, snapshot_times=())
    except UnsupportedJunction as exc:
        return JunctionComparison(node.id, left, right, times, relax_tr, {}, exc.reason)
    riem_tr = _traces(riem, node.id, left, right, config.network)
    # the trace at a step end belongs to the solve at its start; align on step starts
    start_r = riem.times - riem.dts
    start_x = times - relax.dts
    riem_on = {k: np.interp(start_x, start_r, v) for k, v in riem_tr.items()}
    diff = np.max([np.abs(relax_tr[k] - riem_on[k]) for k in TRACE_NAMES], axis=0) if times.size else np.array([])
    worst = float(diff.max()) if diff.size else 0.0
    later = {a: float(diff[start_x >= a].max()) if np.any(start_x >= a) else 0.0 for a in after}
    return JunctionComparison(node.id, left, right, times, relax_tr, riem_on, "", worst, later)


def comparison_csv(result: JunctionComparison) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t"] + [f"relaxation.{k}" for k in TRACE_NAMES] + [f"riemann.{k}" for k in TRACE_NAMES])
    for i, t in enumerate(result.times):
        row = [repr(float(t))] + [repr(float(result.relaxation[k][i])) for k in TRACE_NAMES]
        if result.ok:
            row += [repr(float(result.riemann[k][i])) for k in TRACE_NAMES]
        else:
            row += ["Unsupported"] * len(TRACE_NAMES)
        w.writerow(row)
    return buf.getvalue()
