"""Command-line front end.

Every subcommand reads a TOML configuration (a path or the name of a bundled
example), applies ``--override section.key=value`` edits and writes CSV files
into ``--out``.
"""

from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path

from . import studies
from .grid import NumericalError
from .model import DomainError
from .network import ConfigError, apply_overrides, config_from_dict, tomli
from .simulator import Simulator, entropy_bound_series, monitor_csv, snapshot_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

DEFAULT_LEVELS = (0.00625, 0.003125, 0.0015625, 0.00078125)


def bundled_configs() -> list:
    return sorted(p.name[:-5] for p in resources.files("gasnet.configs").iterdir() if p.name.endswith(".toml"))


def read_config_text(spec: str) -> str:
    path = Path(spec)
    if path.exists():
        return path.read_text(encoding="utf-8")
    name = spec[:-5] if spec.endswith(".toml") else spec
    if name in bundled_configs():
        return resources.files("gasnet.configs").joinpath(f"{name}.toml").read_text(encoding="utf-8")
    raise ConfigError(f"no config file {spec!r} and no bundled example of that name "
                      f"(bundled: {', '.join(bundled_configs())})")


def load(spec: str, overrides=()):
    try:
        data = tomli.loads(read_config_text(spec))
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{spec}: TOML parse error: {exc}") from exc
    return config_from_dict(apply_overrides(data, overrides))


def _write(out: Path, name: str, text: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text, encoding="utf-8")
    return path


def _say(args, msg):
    if not args.quiet:
        print(msg)


def cmd_run(args) -> int:
    config = load(args.config, args.override)
    final, monitors, snapshots = Simulator(config).run()
    out = Path(args.out)
    snap_dir = out / config.sim.snapshot_dir
    for t, state in sorted(snapshots.items()):
        _write(snap_dir, f"t_{t:.6f}.csv", snapshot_csv(config.network, state))
    _write(out, "monitors.csv", monitor_csv(config.network, monitors))
    _say(args, f"{len(monitors.records)} steps to t={final.t:g}; "
               f"{len(snapshots)} snapshots in {snap_dir}")
    return EXIT_OK


def cmd_entropy(args) -> int:
    config = load(args.config, args.override)
    _, monitors, _ = Simulator(config).run(snapshot_times=())
    _write(Path(args.out), "monitors.csv", monitor_csv(config.network, monitors))
    bound = entropy_bound_series(monitors)
    dg = monitors.delta_g()
    _write(Path(args.out), "entropy.csv", "t,entropy,entropy_bound,delta_g\n" + "".join(
        f"{t!r},{s!r},{b!r},{g!r}\n" for t, s, b, g in
        zip(map(float, monitors.times), map(float, monitors.entropy), map(float, bound), map(float, dg))))
    if dg.size:
        _say(args, f"delta_g in [{dg.min():.6g}, {dg.max():.6g}]; "
                   f"entropy {monitors.initial_entropy:.6g} -> {monitors.entropy[-1]:.6g}; "
                   f"bound {bound[-1]:.6g}")
    return EXIT_OK


def cmd_converge(args) -> int:
    config = load(args.config, args.override)
    levels = args.levels or DEFAULT_LEVELS
    progress = None if args.quiet else print
    rows = studies.convergence_study(config, levels, args.reference_dx, progress=progress)
    path = _write(Path(args.out), "convergence.csv", studies.convergence_csv(config.network, rows))
    _say(args, path.read_text())
    return EXIT_OK


def cmd_decay(args) -> int:
    config = load(args.config, args.override)
    result = studies.decay_study(config, args.t_end, args.sample_every, args.t_min)
    _write(Path(args.out), "decay_series.csv", studies.decay_series_csv(config.network, result))
    path = _write(Path(args.out), "decay.csv", studies.decay_csv(config.network, result))
    _say(args, path.read_text())
    return EXIT_OK


def cmd_compare(args) -> int:
    config = load(args.config, args.override)
    try:
        result = studies.compare_junction_solvers(config)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    _write(Path(args.out), "compare_junction.csv", studies.comparison_csv(result))
    if result.ok:
        _say(args, f"max junction discrepancy {result.max_discrepancy:.6g}")
    else:
        _say(args, f"riemann solver unsupported: {result.unsupported}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gasnet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="TOML file or bundled example name")
        p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                       help="edit a config entry, e.g. sim.t_end=2 (repeatable)")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--quiet", action="store_true", help="suppress the summary on stdout")
        return p

    common(sub.add_parser("run", help="simulate and write snapshots and monitors")).set_defaults(func=cmd_run)
    common(sub.add_parser("entropy", help="entropy, bound and junction flux jump")).set_defaults(func=cmd_entropy)
    p = common(sub.add_parser("converge", help="grid convergence table"))
    p.add_argument("--levels", type=float, nargs="+", help="grid spacings, default 0.05/8 .. 0.05/64")
    p.add_argument("--reference-dx", type=float, default=0.05 / 1024)
    p.set_defaults(func=cmd_converge)
    p = common(sub.add_parser("decay", help="power-law fit of the approach to the constant state"))
    p.add_argument("--t-end", type=float, default=10.0)
    p.add_argument("--sample-every", type=float, default=0.05)
    p.add_argument("--t-min", type=float, default=0.5)
    p.set_defaults(func=cmd_decay)
    common(sub.add_parser("compare-junction", help="relaxation against Riemann junction solver")
           ).set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, DomainError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
