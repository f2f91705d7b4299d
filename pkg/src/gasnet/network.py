"""Network data model, TOML configuration and initial data.

Arcs are oriented from ``tail`` (x = 0) to ``head`` (x = L); the sign of the
momentum follows that orientation.  At a node an arc is *incoming* when its
head touches the node and *outgoing* when its tail does.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Optional, Sequence, Union

import numpy as np
try:
    import tomllib as tomli
except ModuleNotFoundError:  # Python < 3.11
    import tomli
import tomli_w

from .model import PressureLaw, State


class ConfigError(ValueError):
    """Malformed configuration or a network violating structural rules."""

    def __init__(self, message, diagnostics=()):
        super().__init__(message)
        self.diagnostics = list(diagnostics)


@dataclass(frozen=True)
class Arc:
    id: str
    tail: str
    head: str
    length: float
    cells: int

    @property
    def dx(self) -> float:
        return self.length / self.cells

    def centers(self) -> np.ndarray:
        return (np.arange(self.cells) + 0.5) * self.dx


@dataclass(frozen=True)
class Node:
    """A network vertex.

    ``arcs`` lists the incident arcs in the order used to index ``kappa``.
    Outer nodes carry no permeability matrix.
    """

    id: str
    kind: str
    arcs: tuple = ()
    kappa: Optional[tuple] = None

    @property
    def is_junction(self) -> bool:
        return self.kind == "junction"

    def kappa_matrix(self) -> np.ndarray:
        if self.kappa is None:
            raise ConfigError(f"node {self.id!r} has no permeability matrix")
        return np.array(self.kappa, dtype=float)


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str

    def __str__(self):
        return f"[{self.code}] {self.message}"


@dataclass(frozen=True)
class Network:
    arcs: tuple
    nodes: tuple

    def arc(self, arc_id: str) -> Arc:
        for a in self.arcs:
            if a.id == arc_id:
                return a
        raise KeyError(arc_id)

    def node(self, node_id: str) -> Node:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def is_incoming(self, arc_id: str, node_id: str) -> bool:
        """True when the arc's x = L end sits on the node."""
        return self.arc(arc_id).head == node_id

    def junctions(self):
        return [n for n in self.nodes if n.is_junction]

    @property
    def total_length(self) -> float:
        return float(sum(a.length for a in self.arcs))


# -- initial data -------------------------------------------------------------


def gaussian(x, sigma, center):
    """``exp(-(x - center)**2 / (2 sigma**2))``."""
    return np.exp(-((x - center) ** 2) / (2.0 * sigma**2))


@dataclass(frozen=True)
class Constant:
    rho0: float
    q0: float = 0.0
    velocity: Optional[float] = None


@dataclass(frozen=True)
class GaussianBump:
    base: float
    amplitude: float
    sigma: float
    center: float
    q0: float = 0.0
    velocity: Optional[float] = None


@dataclass(frozen=True)
class PerturbedConstant:
    """``rho0 * (1 + eps * xi)`` with ``xi ~ U[-1, 1]`` drawn per cell."""

    rho0: float
    q0: float = 0.0
    perturbation_amplitude: float = 0.01
    rng_seed: int = 0
    velocity: Optional[float] = None


InitialCondition = Union[Constant, GaussianBump, PerturbedConstant]

_IC_KINDS = {"constant": Constant, "gaussian": GaussianBump, "perturbed": PerturbedConstant}
_IC_NAMES = {cls: name for name, cls in _IC_KINDS.items()}


def sample_initial(arc: Arc, ic: InitialCondition) -> State:
    """Cell values of ``ic`` on ``arc`` by midpoint evaluation.

    Returns a :class:`State` of two arrays of length ``arc.cells``.
    Vacuum cells are allowed only at rest.
    """
    x = arc.centers()
    if isinstance(ic, Constant):
        rho = np.full(arc.cells, float(ic.rho0))
    elif isinstance(ic, GaussianBump):
        rho = ic.base + ic.amplitude * gaussian(x, ic.sigma, ic.center)
    elif isinstance(ic, PerturbedConstant):
        rng = np.random.default_rng(ic.rng_seed)
        xi = rng.uniform(-1.0, 1.0, arc.cells)
        rho = ic.rho0 * (1.0 + ic.perturbation_amplitude * xi)
    else:
        raise TypeError(f"unknown initial condition {ic!r}")
    if ic.velocity is not None:
        q = ic.velocity * rho
    else:
        q = np.full(arc.cells, float(ic.q0))
    if not np.all(np.isfinite(rho)) or np.any(rho < 0):
        raise ConfigError(f"initial density on arc {arc.id!r} is negative or not finite")
    if np.any((rho == 0) & (q != 0)):
        raise ConfigError(f"initial data on arc {arc.id!r} has vacuum with nonzero momentum")
    return State(rho, q)


# -- simulation parameters ----------------------------------------------------

JUNCTION_SOLVERS = ("relaxation", "riemann")


@dataclass(frozen=True)
class SimSpec:
    cfl: float = 0.9
    t_end: float = 1.0
    output_every: float = 0.0  # 0 disables intermediate snapshots
    junction_solver: str = "relaxation"
    safety_factor: float = 1.0
    snapshot_dir: str = "snapshots"

    def problems(self):
        out = []
        if not (0 < self.cfl <= 1):
            out.append(Diagnostic("sim_range", f"cfl must lie in (0, 1], got {self.cfl}"))
        if not (self.t_end >= 0 and math.isfinite(self.t_end)):
            out.append(Diagnostic("sim_range", f"t_end must be nonnegative, got {self.t_end}"))
        if not self.output_every >= 0:
            out.append(Diagnostic("sim_range", "output_every must be nonnegative"))
        if self.junction_solver not in JUNCTION_SOLVERS:
            out.append(Diagnostic("sim_range", f"unknown junction_solver {self.junction_solver!r}"))
        if not self.safety_factor >= 1:
            out.append(Diagnostic("sim_range", f"safety_factor must be >= 1, got {self.safety_factor}"))
        return out


@dataclass(frozen=True)
class Config:
    law: PressureLaw
    network: Network
    initial: dict  # arc id -> InitialCondition
    sim: SimSpec = field(default_factory=SimSpec)

    def with_sim(self, **changes) -> "Config":
        sim = replace(self.sim, **changes)
        _raise_if(sim.problems())
        return replace(self, sim=sim)


# -- validation ---------------------------------------------------------------


def validate(network: Network) -> list:
    """Return every violated structural rule as a list of diagnostics."""
    diags = []
    if not network.arcs:
        diags.append(Diagnostic("no_arcs", "network has no arcs"))
    arc_ids = [a.id for a in network.arcs]
    node_ids = [n.id for n in network.nodes]
    for dup in sorted({i for i in arc_ids if arc_ids.count(i) > 1}):
        diags.append(Diagnostic("duplicate_id", f"arc id {dup!r} declared twice"))
    for dup in sorted({i for i in node_ids if node_ids.count(i) > 1}):
        diags.append(Diagnostic("duplicate_id", f"node id {dup!r} declared twice"))

    known_nodes = set(node_ids)
    incident = {n: [] for n in node_ids}
    for a in network.arcs:
        if not (a.length > 0 and math.isfinite(a.length)):
            diags.append(Diagnostic("nonpositive_length", f"arc {a.id!r} has length {a.length}"))
        if not a.cells >= 2:
            diags.append(Diagnostic("too_few_cells", f"arc {a.id!r} needs at least 2 cells"))
        if a.tail == a.head:
            diags.append(Diagnostic("self_loop", f"arc {a.id!r} starts and ends at {a.tail!r}"))
        for end in (a.tail, a.head):
            if end not in known_nodes:
                diags.append(Diagnostic("dangling_arc", f"arc {a.id!r} references unknown node {end!r}"))
            else:
                incident[end].append(a.id)

    for n in network.nodes:
        actual = incident.get(n.id, [])
        if n.kind not in ("outer", "junction"):
            diags.append(Diagnostic("node_kind", f"node {n.id!r} has unknown kind {n.kind!r}"))
            continue
        if n.arcs and sorted(n.arcs) != sorted(actual):
            diags.append(Diagnostic(
                "incidence_mismatch",
                f"node {n.id!r} lists arcs {list(n.arcs)} but arcs {actual} touch it"))
        if n.kind == "outer":
            if len(actual) != 1:
                diags.append(Diagnostic("outer_degree", f"outer node {n.id!r} touches {len(actual)} arcs"))
            if n.kappa is not None:
                diags.append(Diagnostic("outer_kappa", f"outer node {n.id!r} carries a kappa matrix"))
            continue
        if len(actual) < 2:
            diags.append(Diagnostic("junction_degree", f"junction {n.id!r} touches {len(actual)} arcs"))
        if n.kappa is None:
            diags.append(Diagnostic("missing_kappa", f"junction {n.id!r} has no kappa matrix"))
            continue
        k = np.array(n.kappa, dtype=float)
        size = len(n.arcs) if n.arcs else len(actual)
        if k.shape != (size, size):
            diags.append(Diagnostic("kappa_shape", f"junction {n.id!r}: kappa shape {k.shape}, expected {(size, size)}"))
            continue
        if not np.all(np.isfinite(k)):
            diags.append(Diagnostic("kappa_finite", f"junction {n.id!r}: kappa has non-finite entries"))
            continue
        if np.any(k < 0):
            diags.append(Diagnostic("negative_kappa", f"junction {n.id!r}: kappa has negative entries"))
        if np.any(np.diag(k) != 0):
            diags.append(Diagnostic("nonzero_diagonal", f"junction {n.id!r}: kappa diagonal must vanish"))
        if not np.array_equal(k, k.T):
            i, j = np.argwhere(k != k.T)[0]
            diags.append(Diagnostic(
                "asymmetric_kappa",
                f"junction {n.id!r}: kappa[{i}][{j}]={k[i, j]} differs from kappa[{j}][{i}]={k[j, i]}"))

    if network.arcs and not any(d.code == "dangling_arc" for d in diags):
        adjacency = {n: set() for n in node_ids}
        for a in network.arcs:
            adjacency[a.tail].add(a.head)
            adjacency[a.head].add(a.tail)
        seen = {node_ids[0]} if node_ids else set()
        stack = list(seen)
        while stack:
            for nb in adjacency[stack.pop()]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        if len(seen) != len(set(node_ids)):
            missing = sorted(set(node_ids) - seen)
            diags.append(Diagnostic("disconnected", f"nodes {missing} are not reachable"))
    return diags


def _raise_if(diags):
    if diags:
        raise ConfigError("invalid configuration:\n  " + "\n  ".join(map(str, diags)), diags)


# -- TOML parsing -------------------------------------------------------------

_TOP_KEYS = {"pressure", "arc", "node", "initial", "sim"}
_ARC_KEYS = {"id", "tail", "head", "length", "cells"}
_NODE_KEYS = {"id", "kind", "arcs", "kappa"}


def _check_keys(table, allowed, where):
    unknown = set(table) - set(allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")


def _require(table, key, where):
    if key not in table:
        raise ConfigError(f"{where}: missing key {key!r}")
    return table[key]


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _kappa_from_config(raw, size, where):
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        value = float(raw)
        return tuple(tuple(0.0 if i == j else value for j in range(size)) for i in range(size))
    if not isinstance(raw, list) or not all(isinstance(r, list) for r in raw):
        raise ConfigError(f"{where}: kappa must be a number or a list of rows")
    return tuple(tuple(_number(v, where) for v in row) for row in raw)


def config_from_dict(data: dict) -> Config:
    _check_keys(data, _TOP_KEYS, "config")
    pressure = data.get("pressure", {})
    _check_keys(pressure, {"p0", "gamma"}, "[pressure]")
    try:
        law = PressureLaw(_number(pressure.get("p0", 1.0), "[pressure] p0"),
                          _number(pressure.get("gamma", 2.0), "[pressure] gamma"))
    except ValueError as exc:
        raise ConfigError(f"[pressure]: {exc}") from exc

    arcs = []
    for i, raw in enumerate(data.get("arc", [])):
        where = f"[[arc]] #{i + 1}"
        _check_keys(raw, _ARC_KEYS, where)
        cells = _require(raw, "cells", where)
        if isinstance(cells, bool) or not isinstance(cells, int):
            raise ConfigError(f"{where}: cells must be an integer")
        arcs.append(Arc(str(_require(raw, "id", where)), str(_require(raw, "tail", where)),
                        str(_require(raw, "head", where)),
                        _number(_require(raw, "length", where), f"{where} length"), cells))
    if not arcs:
        raise ConfigError("config: at least one [[arc]] is required")

    incident = {}
    for a in arcs:
        incident.setdefault(a.tail, []).append(a.id)
        incident.setdefault(a.head, []).append(a.id)

    nodes = []
    for i, raw in enumerate(data.get("node", [])):
        where = f"[[node]] #{i + 1}"
        _check_keys(raw, _NODE_KEYS, where)
        node_id = str(_require(raw, "id", where))
        kind = _require(raw, "kind", where)
        arc_list = tuple(str(a) for a in raw.get("arcs", incident.get(node_id, [])))
        kappa = None
        if "kappa" in raw:
            kappa = _kappa_from_config(raw["kappa"], len(arc_list), where)
        nodes.append(Node(node_id, kind, arc_list, kappa))

    network = Network(tuple(arcs), tuple(nodes))
    _raise_if(validate(network))

    initial = {}
    for i, raw in enumerate(data.get("initial", [])):
        where = f"[[initial]] #{i + 1}"
        raw = dict(raw)
        arc_id = str(_require(raw, "arc", where))
        kind = _require(raw, "kind", where)
        if kind not in _IC_KINDS:
            raise ConfigError(f"{where}: unknown kind {kind!r}")
        cls = _IC_KINDS[kind]
        params = {k: v for k, v in raw.items() if k not in ("arc", "kind")}
        _check_keys(params, {f.name for f in fields(cls)}, where)
        if arc_id in initial:
            raise ConfigError(f"{where}: arc {arc_id!r} initialised twice")
        try:
            initial[arc_id] = cls(**params)
        except TypeError as exc:
            raise ConfigError(f"{where}: {exc}") from exc
    missing = [a.id for a in arcs if a.id not in initial]
    unknown = [k for k in initial if k not in {a.id for a in arcs}]
    if missing:
        raise ConfigError(f"config: no initial data for arcs {missing}")
    if unknown:
        raise ConfigError(f"config: initial data for unknown arcs {unknown}")

    sim_raw = data.get("sim", {})
    _check_keys(sim_raw, {f.name for f in fields(SimSpec)}, "[sim]")
    sim = SimSpec(**sim_raw)
    _raise_if(sim.problems())
    config = Config(law, network, initial, sim)
    for a in arcs:
        sample_initial(a, initial[a.id])
    return config


def parse_config(text: str) -> Config:
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"TOML parse error: {exc}") from exc
    return config_from_dict(data)


def load_config(path) -> Config:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def config_to_dict(config: Config) -> dict:
    out = {
        "pressure": {"p0": config.law.p0, "gamma": config.law.gamma},
        "arc": [{"id": a.id, "tail": a.tail, "head": a.head, "length": a.length, "cells": a.cells}
                for a in config.network.arcs],
        "node": [],
        "initial": [],
        "sim": {f.name: getattr(config.sim, f.name) for f in fields(SimSpec)},
    }
    for n in config.network.nodes:
        entry = {"id": n.id, "kind": n.kind, "arcs": list(n.arcs)}
        if n.kappa is not None:
            entry["kappa"] = [list(row) for row in n.kappa]
        out["node"].append(entry)
    for arc_id, ic in config.initial.items():
        entry = {"arc": arc_id, "kind": _IC_NAMES[type(ic)]}
        for f in fields(ic):
            value = getattr(ic, f.name)
            if value is not None:
                entry[f.name] = value
        out["initial"].append(entry)
    return out


def serialize_config(config: Config) -> str:
    return tomli_w.dumps(config_to_dict(config))


def apply_overrides(data: dict, overrides: Sequence[str]) -> dict:
    """Apply ``section.key=value`` overrides; values use TOML literal syntax."""
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form KEY=VALUE")
        key, raw = item.split("=", 1)
        path = key.strip().split(".")
        try:
            value = tomli.loads(f"v = {raw.strip()}")["v"]
        except tomli.TOMLDecodeError:
            value = raw.strip()
        table = data
        for part in path[:-1]:
            if not isinstance(table.get(part, {}), dict):
                raise ConfigError(f"override {item!r}: {part!r} is not a table")
            table = table.setdefault(part, {})
        table[path[-1]] = value
    return data
