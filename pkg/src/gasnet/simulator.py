"""Time loop over a network, monitors and snapshot output."""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .grid import (ArcGrid, NumericalError, PositivityError, arc_speed, cfl_dt,
                   conservative_update, outer_ghost)
from .junction_relax import JunctionSolution, solve_node
from .junction_riemann import riemann_junction_solve
from .model import DomainError, PressureLaw, State, entropy, entropy_flux
from .network import Config, ConfigError, Network, SimSpec, sample_initial

logger = logging.getLogger(__name__)


class UnsupportedJunction(NumericalError):
    """The Riemann-invariant junction solver has no admissible solution."""

    def __init__(self, node_id, reason, t):
        super().__init__(f"node {node_id!r} at t={t:.6g}: riemann junction solver unsupported ({reason})")
        self.node_id = node_id
        self.reason = reason
        self.t = t


@dataclass
class NetworkState:
    t: float
    grids: dict  # arc id -> ArcGrid, in network arc order

    def copy(self) -> "NetworkState":
        return NetworkState(self.t, {k: g.copy() for k, g in self.grids.items()})


@dataclass
class StepRecord:
    t: float
    dt: float
    mass: float
    entropy: float
    delta_g: dict  # node id -> entropy-flux jump at the junction states
    junctions: dict  # node id -> JunctionSolution


@dataclass
class MonitorSeries:
    initial_mass: float
    initial_entropy: float
    records: list = field(default_factory=list)

    @property
    def times(self) -> np.ndarray:
        return np.array([r.t for r in self.records])

    @property
    def dts(self) -> np.ndarray:
        return np.array([r.dt for r in self.records])

    @property
    def mass(self) -> np.ndarray:
        return np.array([r.mass for r in self.records])

    @property
    def entropy(self) -> np.ndarray:
        return np.array([r.entropy for r in self.records])

    def delta_g(self, node_id: Optional[str] = None) -> np.ndarray:
        """Entropy-flux jump per step, summed over junctions unless a node is given."""
        if node_id is None:
            return np.array([sum(r.delta_g.values()) for r in self.records])
        return np.array([r.delta_g[node_id] for r in self.records])

    def trace(self, node_id: str, arc_id: str):
        """Junction ghost values ``(rho*, q*)`` of one arc over the run."""
        rho = np.array([r.junctions[node_id].ghost(arc_id).rho for r in self.records])
        q = np.array([r.junctions[node_id].ghost(arc_id).q for r in self.records])
        return rho, q


def total_mass(state: NetworkState) -> float:
    """``sum_i dx_i sum_j rho_ij``, accumulated in arc order."""
    return float(sum(g.dx * math.fsum(g.rho) for g in state.grids.values()))


def total_entropy(law: PressureLaw, state: NetworkState) -> float:
    return float(sum(g.dx * math.fsum(entropy(law, State(g.rho, g.q))) for g in state.grids.values()))


def junction_delta_g(law: PressureLaw, kappa: float, rho_l: float, rho_r: float) -> float:
    """Entropy-flux jump ``G_l - G_r`` at states obeying ``q = kappa (rho_l - rho_r)``."""
    if rho_l <= 0 or rho_r <= 0:
        raise DomainError("junction densities must be positive")
    jump = rho_l - rho_r
    g = law.gamma
    return (-0.5 * kappa**3 * jump**4 * (rho_r + rho_l) / (rho_r**2 * rho_l**2)
            + law.p0 * g / (g - 1.0) * kappa * jump * (rho_l ** (g - 1.0) - rho_r ** (g - 1.0)))


def entropy_bound_series(monitors: MonitorSeries) -> np.ndarray:
    """``S^0 - sum_{k<=n} dt_k dG_k`` after each recorded step."""
    if not monitors.records:
        return np.array([])
    return monitors.initial_entropy - np.cumsum(monitors.dts * monitors.delta_g())


def initial_state(config: Config) -> NetworkState:
    grids = {}
    for arc in config.network.arcs:
        rho, q = sample_initial(arc, config.initial[arc.id])
        grids[arc.id] = ArcGrid(arc.id, arc.dx, np.asarray(rho, float), np.asarray(q, float))
    return NetworkState(0.0, grids)


@dataclass(frozen=True)
class _Port:
    arc_id: str
    incoming: bool  # the arc's x = L end touches the node


class Simulator:
    """Explicit HLL time stepping with ghost states from node solvers."""

    def __init__(self, config: Config):
        self.config = config
        self.law = config.law
        self.network: Network = config.network
        self.spec: SimSpec = config.sim
        self.ports = {}
        for node in self.network.nodes:
            self.ports[node.id] = [_Port(a, self.network.is_incoming(a, node.id)) for a in node.arcs]
        if self.spec.junction_solver == "riemann":
            bad = [n.id for n in self.network.junctions() if len(n.arcs) != 2]
            if bad:
                raise ConfigError(f"riemann junction solver needs two-arc junctions; nodes {bad} are not")
        self.dx_min = min(a.dx for a in self.network.arcs)

    # -- per-step pieces -----------------------------------------------------

    def speeds(self, state: NetworkState) -> dict:
        lams = {k: arc_speed(self.law, g.state, self.spec.safety_factor) for k, g in state.grids.items()}
        top = max(lams.values())
        if top <= 0:
            top = 1.0
        # an arc entirely at vacuum rest borrows the largest network speed
        return {k: (v if v > 0 else top) for k, v in lams.items()}

    def stable_dt(self, lams: dict) -> float:
        return cfl_dt(self.dx_min, max(lams.values()), self.spec.cfl)

    @staticmethod
    def _adjacent(grid: ArcGrid, incoming: bool) -> State:
        j = -1 if incoming else 0
        return State(float(grid.rho[j]), float(grid.q[j]))

    def _solve_junction(self, node, state: NetworkState, lams: dict) -> JunctionSolution:
        ports = self.ports[node.id]
        adj = [self._adjacent(state.grids[p.arc_id], p.incoming) for p in ports]
        lam = [state.grids[p.arc_id].lam for p in ports]
        inc = [p.incoming for p in ports]
        if self.spec.junction_solver == "relaxation":
            return solve_node(node, adj, lam, inc)
        return self._riemann_node(node, adj, inc, state.t)

    def _riemann_node(self, node, adj, inc, t) -> JunctionSolution:
        # orient the pair as incoming (left) -> outgoing (right), flipping an arc if needed
        left_i, right_i = (0, 1) if inc[0] or not inc[1] else (1, 0)
        flip_l = not inc[left_i]
        flip_r = inc[right_i]
        ul = State(adj[left_i].rho, -adj[left_i].q if flip_l else adj[left_i].q)
        ur = State(adj[right_i].rho, -adj[right_i].q if flip_r else adj[right_i].q)
        kappa = float(node.kappa_matrix()[0, 1])
        sol, app = riemann_junction_solve(self.law, kappa, ul, ur)
        if sol is None:
            raise UnsupportedJunction(node.id, app.reason, t)
        rho_star = np.empty(2)
        q_star = np.empty(2)
        rho_star[left_i], rho_star[right_i] = sol.rho_star_l, sol.rho_star_r
        q_star[left_i] = -sol.q_star if flip_l else sol.q_star
        q_star[right_i] = -sol.q_star if flip_r else sol.q_star
        return JunctionSolution(node.id, tuple(node.arcs), np.asarray(inc, bool), rho_star, q_star)

    def ghosts(self, state: NetworkState, lams: dict):
        """Ghost states per arc as ``{arc: [left, right]}`` plus junction solutions."""
        ghosts = {k: [None, None] for k in state.grids}
        solutions = {}
        for node in self.network.nodes:
            if node.is_junction:
                sol = self._solve_junction(node, state, lams)
                solutions[node.id] = sol
                for p in self.ports[node.id]:
                    ghosts[p.arc_id][1 if p.incoming else 0] = sol.ghost(p.arc_id)
            else:
                (p,) = self.ports[node.id]
                adjacent = self._adjacent(state.grids[p.arc_id], p.incoming)
                ghosts[p.arc_id][1 if p.incoming else 0] = outer_ghost(adjacent)
        return ghosts, solutions

    def delta_g(self, solution: JunctionSolution) -> float:
        """Entropy flux entering the node from incoming arcs minus that leaving into outgoing ones."""
        g = entropy_flux(self.law, State(solution.rho_star, solution.q_star))
        return float(np.sum(np.where(solution.incoming, g, -g)))

    def prepare(self, state: NetworkState) -> dict:
        """Set the relaxation speed of every arc for the coming step and return them."""
        lams = self.speeds(state)
        for k, g in state.grids.items():
            g.lam = lams[k]
        return lams

    def junction_states(self, state: NetworkState) -> dict:
        """Junction solutions a step starting from ``state`` would use, by node id."""
        return self.ghosts(state, self.prepare(state))[1]

    def step(self, state: NetworkState, dt_max: float = math.inf, record: bool = True):
        """Advance one global step; returns ``(new_state, StepRecord)``.

        With ``record=False`` the monitors are skipped and only ``t``/``dt``
        of the record are meaningful.
        """
        lams = self.prepare(state)
        dt = min(self.stable_dt(lams), dt_max)
        ghosts, solutions = self.ghosts(state, lams)
        new = {}
        for k, g in state.grids.items():
            rho, q = conservative_update(self.law, g, ghosts[k][0], ghosts[k][1], dt)
            bad = np.flatnonzero((rho < 0) | ~np.isfinite(rho) | ~np.isfinite(q))
            if bad.size:
                j = int(bad[0])
                raise PositivityError(f"arc {k!r} cell {j + 1}: rho={rho[j]!r}, q={q[j]!r} at t={state.t + dt:.6g}")
            vac = np.flatnonzero((rho == 0) & (q != 0))
            if vac.size:
                j = int(vac[0])
                raise PositivityError(f"arc {k!r} cell {j + 1}: vacuum with momentum {q[j]!r}")
            new[k] = ArcGrid(k, g.dx, rho, q, g.lam)
        out = NetworkState(state.t + dt, new)
        if not record:
            return out, StepRecord(out.t, dt, math.nan, math.nan, {}, {})
        rec = StepRecord(
            out.t, dt, total_mass(out), total_entropy(self.law, out),
            {nid: self.delta_g(sol) for nid, sol in solutions.items()}, solutions)
        return out, rec

    def run(self, state: Optional[NetworkState] = None, t_end: Optional[float] = None,
            snapshot_times=None, on_step=None, record: bool = True):
        """Step until ``t_end``; returns ``(final_state, monitors, snapshots)``.

        ``snapshots`` maps each output time to a copy of the state.  Steps are
        shortened so that output times and ``t_end`` are hit exactly.
        ``record=False`` leaves the monitor series empty, which is faster on
        fine grids.
        """
        state = initial_state(self.config) if state is None else state
        t_end = self.spec.t_end if t_end is None else t_end
        if snapshot_times is None:
            snapshot_times = output_times(t_end, self.spec.output_every)
        targets = sorted(set(float(t) for t in snapshot_times if state.t < t <= t_end) | {t_end})
        monitors = MonitorSeries(total_mass(state), total_entropy(self.law, state))
        snapshots = {state.t: state.copy()}
        for target in targets:
            if target <= state.t:
                continue
            while state.t < target:
                remaining = target - state.t
                state, rec = self.step(state, remaining, record)
                if rec.dt >= remaining:
                    state.t = target
                    rec.t = target
                if record:
                    monitors.records.append(rec)
                if on_step is not None:
                    on_step(state, rec)
            snapshots[target] = state.copy()
        return state, monitors, snapshots


def output_times(t_end: float, every: float) -> list:
    times = [0.0]
    if every and every > 0:
        k = 1
        while k * every < t_end * (1 - 1e-12):
            times.append(k * every)
            k += 1
    if t_end > 0:
        times.append(t_end)
    return times


def run(config: Config, t_end: Optional[float] = None):
    """Run ``config`` and return ``(final_state, monitors, snapshots)``."""
    return Simulator(config).run(t_end=t_end)


# -- CSV output ---------------------------------------------------------------


def snapshot_rows(network: Network, state: NetworkState):
    for arc in network.arcs:
        g = state.grids[arc.id]
        x = arc.centers()
        for j in range(arc.cells):
            yield arc.id, j + 1, x[j], g.rho[j], g.q[j]


def _fmt(v) -> str:
    return repr(float(v))


def snapshot_csv(network: Network, state: NetworkState) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["arc_id", "cell_index", "x", "rho", "q"])
    for arc_id, j, x, rho, q in snapshot_rows(network, state):
        w.writerow([arc_id, j, _fmt(x), _fmt(rho), _fmt(q)])
    return buf.getvalue()


def monitor_columns(network: Network):
    cols = ["t", "dt", "mass", "entropy", "entropy_bound"]
    for node in network.junctions():
        cols.append(f"{node.id}.delta_g")
        if len(node.arcs) == 2:
            cols += [f"{node.id}.rho_star_l", f"{node.id}.rho_star_r", f"{node.id}.q_star"]
        else:
            for a in node.arcs:
                cols += [f"{node.id}.{a}.rho_star", f"{node.id}.{a}.q_star"]
    return cols


def two_arc_orientation(network: Network, node) -> tuple:
    """``(left_arc, right_arc)`` for a two-arc junction, left preferring the incoming arc."""
    a, b = node.arcs
    if network.is_incoming(a, node.id) or not network.is_incoming(b, node.id):
        return a, b
    return b, a


def monitor_csv(network: Network, monitors: MonitorSeries) -> str:
    """Monitor table; junction columns hold the ghost values used by each step."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(monitor_columns(network))
    bound = entropy_bound_series(monitors)
    for n, rec in enumerate(monitors.records):
        row = [_fmt(rec.t), _fmt(rec.dt), _fmt(rec.mass), _fmt(rec.entropy), _fmt(bound[n])]
        for node in network.junctions():
            sol = rec.junctions[node.id]
            row.append(_fmt(rec.delta_g[node.id]))
            if len(node.arcs) == 2:
                left, right = two_arc_orientation(network, node)
                gl, gr = sol.ghost(left), sol.ghost(right)
                row += [_fmt(gl.rho), _fmt(gr.rho), _fmt(gl.q if network.is_incoming(left, node.id) else -gl.q)]
            else:
                for a in node.arcs:
                    g = sol.ghost(a)
                    row += [_fmt(g.rho), _fmt(g.q)]
        w.writerow(row)
    return buf.getvalue()
