"""Command-line entry point: ``erlsmc run|compare|sweep|validate``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import yaml

from ..motor import SimulationDivergence
from .engine import run_scenario
from .metrics import compare_laws, compute_metrics, sweep
from .plots import emit_plots
from .scenario import ConfigError, load_scenario
from .trace import export_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3
EXIT_IO = 4

log = logging.getLogger("erlsmc")


def _fmt(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _print_metrics(m, out) -> None:
    for key, value in m.as_dict().items():
        if key != "segments":
            print(f"  {key:26s} {_fmt(value)}", file=out)


def cmd_run(args, out) -> int:
    s = load_scenario(args.scenario)
    tr = run_scenario(s)
    m = compute_metrics(tr, s.mode)
    print(f"{s.name} ({s.mode}, {s.duration:g} s)", file=out)
    _print_metrics(m, out)
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        csv_path = export_csv(tr, out_dir / f"{s.name}.csv")
        (out_dir / f"{s.name}_metrics.json").write_text(json.dumps(m.as_dict(), indent=2) + "\n")
        plots = [] if args.no_plots else emit_plots(tr, out_dir)
        print(f"wrote {csv_path} and {len(plots)} plot(s) to {out_dir}", file=out)
    return EXIT_OK


def cmd_compare(args, out) -> int:
    s = load_scenario(args.scenario)
    c = compare_laws(s, workers=args.workers)
    print(f"{s.name}: constant-rate vs ERL at matched reaching time", file=out)
    print(f"  {'gain':8s} {'S0':>10s} {'k_const':>10s} {'k_erl':>10s} {'tr':>10s} {'tr_erl':>10s}",
          file=out)
    for name, (tr_c, tr_e) in c.analytic_reaching_time.items():
        print(f"  {name:8s} {c.s0[name]:10.4g} {c.base_gains[name]:10.4g} "
              f"{c.matched_gains[name]:10.4g} {tr_c:10.4g} {tr_e:10.4g}", file=out)
    print(f"  {'metric':26s} {'constant':>12s} {'erl':>12s}", file=out)
    a, b = c.constant.as_dict(), c.erl.as_dict()
    for key in a:
        if key != "segments":
            print(f"  {key:26s} {_fmt(a[key]):>12s} {_fmt(b[key]):>12s}", file=out)
    print(f"  chattering ratio (erl / constant): {c.chattering_ratio:.4g}", file=out)
    return EXIT_OK


def cmd_sweep(args, out) -> int:
    s = load_scenario(args.scenario)
    values = [yaml.safe_load(v) for v in args.values.split(",") if v.strip()]
    if not values:
        raise ConfigError("--values is empty")
    table = sweep(s, args.axis, values, workers=args.workers)
    keys = ("overshoot", "settling_time", "steady_state_error", "chattering_index", "settled")
    print(f"{s.name}: sweep over {args.axis}", file=out)
    print("  " + f"{'value':>10s} " + " ".join(f"{k:>20s}" for k in keys), file=out)
    diverged = 0
    for value, cell in table.items():
        if isinstance(cell, str):
            diverged += 1
            print(f"  {_fmt(value):>10s} {cell}", file=out)
        else:
            d = cell.as_dict()
            print(f"  {_fmt(value):>10s} " + " ".join(f"{_fmt(d[k]):>20s}" for k in keys), file=out)
    return EXIT_DIVERGED if diverged == len(table) else EXIT_OK


def cmd_validate(args, out) -> int:
    s = load_scenario(args.scenario)
    print(f"{args.scenario}: ok ({s.mode}, {s.duration:g} s, {s.n_ticks} ticks)", file=out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="erlsmc", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate a scenario and report metrics")
    run.add_argument("scenario")
    run.add_argument("--out", help="directory for the CSV trace, metrics and plots")
    run.add_argument("--no-plots", action="store_true")
    run.set_defaults(func=cmd_run)

    cmp_ = sub.add_parser("compare", help="constant-rate vs ERL at matched reaching time")
    cmp_.add_argument("scenario")
    cmp_.add_argument("--workers", type=int, default=1)
    cmp_.set_defaults(func=cmd_compare)

    sw = sub.add_parser("sweep", help="one run per value of a config path")
    sw.add_argument("scenario")
    sw.add_argument("--axis", required=True, help="dotted config path, e.g. plant_scale.J")
    sw.add_argument("--values", required=True, help="comma-separated values")
    sw.add_argument("--workers", type=int, default=1)
    sw.set_defaults(func=cmd_sweep)

    val = sub.add_parser("validate", help="check a scenario file without running it")
    val.add_argument("scenario")
    val.set_defaults(func=cmd_validate)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SimulationDivergence as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
