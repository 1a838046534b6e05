"""Command-line front end.

Exit codes: 0 success, 1 replay mismatch, 2 configuration error,
3 calibration or connectivity failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import sys
from collections import defaultdict
from dataclasses import replace

from . import experiments
from .churn import EventStream, gen_event_stream, run_session
from .config import ParseError, RunConfig, emit_csv, format_csv, parse_config
from .metrics import DegenerateFit, fit_exponential
from .network import (
    CalibrationFailed,
    ConnectivityExhausted,
    Network,
    WaxmanParams,
    calibrate_beta,
    generate_waxman,
)
from .prng import derive_seed
from .routing import build_distance_table

EXIT_OK, EXIT_MISMATCH, EXIT_CONFIG, EXIT_CALIBRATION, EXIT_IO = 0, 1, 2, 3, 4

SWEEPS = {
    "sweep-omega": "omega",
    "sweep-degree": "degree",
    "sweep-size": "size",
    "sweep-sources": "sources",
    "dynamic": "dynamic",
    "stability": "stability",
}


def _network(cfg: RunConfig) -> Network:
    grid = (cfg.grid_width, cfg.grid_height)
    beta = cfg.beta
    if beta is None:
        beta = calibrate_beta(cfg.nodes, grid, cfg.alpha, cfg.degree,
                              derive_seed(cfg.seed, "calibrate"), cfg.connect)
    params = WaxmanParams(cfg.nodes, beta, cfg.alpha, grid, derive_seed(cfg.seed, "repeat", 0))
    return generate_waxman(params, cfg.connect)


def _write(text: str, path: str) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit(records, cfg: RunConfig) -> None:
    if cfg.output:
        emit_csv(records, cfg.output, cfg.precision)
    else:
        sys.stdout.write(format_csv(records, cfg.precision))


def cmd_gen(cfg: RunConfig, args) -> int:
    _write(_network(cfg).dumps(), cfg.output)
    return EXIT_OK


def _load_network(cfg: RunConfig, args) -> Network:
    if args.network:
        with open(args.network, encoding="utf-8") as fh:
            return Network.loads(fh.read())
    return _network(cfg)


def cmd_run(cfg: RunConfig, args) -> int:
    net = _load_network(cfg, args)
    dt = build_distance_table(net)
    records = run_session(net, dt, cfg.algorithm(), cfg.scenario())
    _emit([replace(r, degree=cfg.degree) for r in records], cfg)
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, args) -> int:
    family = SWEEPS[args.command]
    spec = cfg.experiment(family)
    result = experiments.FAMILY_RUNNERS[family](spec)
    _emit(result.records, cfg)
    if result.optima:
        for algo, best in result.optima.items():
            print(f"# optimum {algo}: avg_delay omega={best['avg_delay']:g} "
                  f"max_delay omega={best['max_delay']:g}", file=sys.stderr)
    for algo, fit in result.fits.items():
        print(f"# fit {algo}: h,a,b,rms = {fit.csv_row(cfg.precision)}", file=sys.stderr)
    if family == "stability":
        for label, st in result.per_algo.items():
            print(f"# {label}: worst={st.worst_level:.3f} best={st.best_level:.3f} gap={st.gap:.3f}",
                  file=sys.stderr)
    return EXIT_OK


def cmd_fit(cfg: RunConfig, args) -> int:
    """Average ``y`` per distinct ``x`` from a CSV and fit the exponential law."""
    groups = defaultdict(list)
    with open(args.csv, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            if args.algo and row.get("algo") != args.algo:
                continue
            groups[float(row[args.x])].append(float(row[args.y]))
    points = [(x, sum(ys) / len(ys)) for x, ys in sorted(groups.items())]
    try:
        fit = fit_exponential(points)
    except DegenerateFit as exc:
        fit = exc.result
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print("h,a,b,rms")
    print(fit.csv_row(cfg.precision))
    return EXIT_OK


def cmd_replay(cfg: RunConfig, args) -> int:
    """Compare a stored event stream with the one the config generates, and
    optionally replay the stored stream through ``algo``."""
    with open(args.events, encoding="utf-8") as fh:
        stored_text = fh.read()
    stored = EventStream.loads(stored_text)
    fresh = gen_event_stream(cfg.scenario(), cfg.nodes).dumps()
    status = EXIT_OK
    if fresh != stored_text:
        a, b = fresh.splitlines(), stored_text.splitlines()
        first = next((i for i, (x, y) in enumerate(zip(a, b)) if x != y), min(len(a), len(b)))
        print(f"mismatch at event line {first + 1}", file=sys.stderr)
        status = EXIT_MISMATCH
    else:
        print(f"match: {len(stored)} events", file=sys.stderr)
    if cfg.output:
        net = _load_network(cfg, args)
        records = run_session(net, build_distance_table(net), cfg.algorithm(), cfg.scenario(), stored)
        emit_csv(records, cfg.output, cfg.precision)
    return status


def cmd_events(cfg: RunConfig, args) -> int:
    _write(gen_event_stream(cfg.scenario(), cfg.nodes).dumps(), cfg.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mcastsim", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", help="key = value configuration file")
    common.add_argument("-s", "--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one configuration key (repeatable)")
    common.add_argument("-o", "--output", help="output path (default: stdout)")
    common.add_argument("--precision", type=int, help="decimals for floats in CSV output")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("gen", parents=[common], help="write a calibrated Waxman network")
    p = sub.add_parser("run", parents=[common], help="one session, CSV of target-size records")
    p.add_argument("--network", help="network dump to use instead of generating one")
    for name in SWEEPS:
        sub.add_parser(name, parents=[common], help=f"{SWEEPS[name]} experiment family")
    p = sub.add_parser("fit", parents=[common], help="fit y = h - a*exp(-x/b) to a CSV column pair")
    p.add_argument("csv")
    p.add_argument("--x", default="group_size")
    p.add_argument("--y", default="avg_delay")
    p.add_argument("--algo", help="only rows of this algorithm")
    p = sub.add_parser("replay", parents=[common], help="golden test of a stored event stream")
    p.add_argument("events")
    p.add_argument("--network")
    sub.add_parser("events", parents=[common], help="write the configured event stream")
    return parser


COMMANDS = {"gen": cmd_gen, "run": cmd_run, "fit": cmd_fit, "replay": cmd_replay, "events": cmd_events}
COMMANDS.update({name: cmd_sweep for name in SWEEPS})


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {}
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            print(f"error: --set expects KEY=VALUE, got {item!r}", file=sys.stderr)
            return EXIT_CONFIG
        overrides[key.strip()] = value.strip()
    if args.output:
        overrides["output"] = args.output
    if args.precision is not None:
        overrides["precision"] = str(args.precision)
    try:
        text = ""
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        cfg = parse_config(text, overrides)
    except ParseError as exc:
        print(f"config error:\n{exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        return COMMANDS[args.command](cfg, args)
    except (CalibrationFailed, ConnectivityExhausted) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CALIBRATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
