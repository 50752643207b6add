"""Command-line front end.

    nswp run --preset fig1 [--preset fig2 --jobs 2]
    nswp run --config my.cfg --out runs/mine
    nswp compare runs/fig1/psi_final_numeric.csv runs/fig1/psi_final_exact.csv --tol 1e-4
    nswp decompose --preset fig2 --times 0 10 50.3
    nswp pulse-table --preset fig1 --points 401

Exit codes: 0 success, 2 configuration error, 3 numerical abort, 4 comparison failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .config import ConfigError, ExperimentConfig, load_config, preset, with_out_dir
from .harness import PULSE_TABLE_COLUMNS, CompareError, compare, decompose_report, pulse_table, run_experiment
from .io import fmt, write_table
from .propagate import PropagationAborted

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_COMPARE = 0, 2, 3, 4

log = logging.getLogger("nswp")


def _configs(args) -> list[ExperimentConfig]:
    configs = [preset(name) for name in args.preset or []]
    configs += [load_config(path) for path in args.config or []]
    if not configs:
        raise ConfigError("give at least one --preset or --config")
    if getattr(args, "out", None):
        if len(configs) > 1:
            raise ConfigError("--out needs exactly one configuration")
        configs = [with_out_dir(configs[0], args.out)]
    return configs


def _single_config(args) -> ExperimentConfig:
    configs = _configs(args)
    if len(configs) != 1:
        raise ConfigError("this command takes exactly one --preset or --config")
    return configs[0]


def _run_one(config: ExperimentConfig) -> str:
    result = run_experiment(config)
    return str(result.out_dir)


def cmd_run(args) -> int:
    configs = [c.validate() for c in _configs(args)]
    if args.jobs > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            outputs = list(pool.map(_run_one, configs))
    else:
        outputs = [_run_one(c) for c in configs]
    for out in outputs:
        print(f"wrote {out}")
    return EXIT_OK


def _parse_tolerances(items) -> dict:
    tolerances = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--col-tol expects column=value, got {item!r}")
        tolerances[name] = float(value)
    return tolerances


def cmd_compare(args) -> int:
    report = compare(args.run_a, args.run_b, default_tol=args.tol, tolerances=_parse_tolerances(args.col_tol))
    print(report.summary())
    if args.report:
        with open(args.report, "w") as fh:
            json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    return EXIT_OK if report.passed else EXIT_COMPARE


def _default_times(config: ExperimentConfig, points: int) -> np.ndarray:
    t_end = config.prop.t_end_cycles * config.params.period
    return np.linspace(0.0, t_end, points)


def cmd_decompose(args) -> int:
    config = _single_config(args)
    times = np.asarray(args.times, dtype=float) if args.times else _default_times(config, args.points)
    rows = decompose_report(config, times)
    out = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(rows[0].keys())
        for row in rows:
            writer.writerow(fmt(v) for v in row.values())
    finally:
        if args.output:
            out.close()
    return EXIT_OK


def cmd_pulse_table(args) -> int:
    config = _single_config(args)
    rows = pulse_table(config, _default_times(config, args.points))
    if args.output:
        write_table(args.output, PULSE_TABLE_COLUMNS, rows)
    else:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(PULSE_TABLE_COLUMNS)
        for row in rows:
            writer.writerow(fmt(v) for v in row)
    return EXIT_OK


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", action="append", choices=("fig1", "fig2"), help="built-in experiment")
    p.add_argument("--config", action="append", help="flat key = value configuration file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nswp", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="propagate an experiment and write CSV artifacts")
    _add_config_args(run)
    run.add_argument("--out", help="output directory (overrides out.dir)")
    run.add_argument("--jobs", type=int, default=1, help="parallel worker processes for several configs")
    run.set_defaults(func=cmd_run)

    cmp_ = sub.add_parser("compare", help="column-wise comparison of two CSV files or run directories")
    cmp_.add_argument("run_a")
    cmp_.add_argument("run_b")
    cmp_.add_argument("--tol", type=float, default=1e-6, help="default max-abs (or L2) tolerance")
    cmp_.add_argument("--col-tol", action="append", metavar="COLUMN=TOL", help="per-column tolerance")
    cmp_.add_argument("--report", help="write the machine-readable report here (JSON)")
    cmp_.set_defaults(func=cmd_compare)

    dec = sub.add_parser("decompose", help="H, H_tilde and H_c coefficients over time")
    _add_config_args(dec)
    dec.add_argument("--times", type=float, nargs="+", help="query times (default: evenly spaced)")
    dec.add_argument("--points", type=int, default=25)
    dec.add_argument("--output", help="CSV path (default: stdout)")
    dec.set_defaults(func=cmd_decompose)

    pt = sub.add_parser("pulse-table", help="export F(t), fs, fc and d(t)")
    _add_config_args(pt)
    pt.add_argument("--points", type=int, default=1201)
    pt.add_argument("--output", help="CSV path (default: stdout)")
    pt.set_defaults(func=cmd_pulse_table)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except (PropagationAborted, ArithmeticError) as exc:
        log.error("numerical abort: %s", exc)
        return EXIT_NUMERIC
    except CompareError as exc:
        log.error("comparison failed: %s", exc)
        return EXIT_COMPARE
    except ValueError as exc:
        # raised by grid/eigenstate checks, e.g. a domain too narrow for the requested state
        log.error("numerical abort: %s", exc)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
