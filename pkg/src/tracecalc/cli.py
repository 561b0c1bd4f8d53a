"""Command-line runner: ``tracecalc run|list|validate``.

Exit codes: 0 all checks pass, 1 a threshold check failed, 2 usage or
config error, 3 numerical error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from .config import make_config, parse_config_text, read_config, validate_values
from .errors import ConfigError, InputError, ParameterError, TracecalcError
from .experiments import REGISTRY, list_experiments, run_experiment

__all__ = ["main", "write_outputs", "build_record"]

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, (str, type(None))):
        return v
    if hasattr(v, "spec"):
        return v.spec()
    return str(v)


def write_csv(path, columns, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(v) for v in r])


def build_record(cfg, outcome, wall, params, tol_scale):
    checks = [{"criterion": c.criterion, "name": c.name, "value": c.value, "op": c.op, "threshold": c.threshold,
               "target": c.target, "passed": c.passed(tol_scale)} for c in outcome.checks]
    return _jsonable({
        "experiment": cfg.name,
        "criteria": list(REGISTRY[cfg.name].criteria),
        "config": cfg.source,
        "seed": cfg.seed,
        "threads": cfg.threads,
        "tolerance_scale": tol_scale,
        "inputs": {k: params[k] for k in sorted(params)},
        "outputs": outcome.scalars,
        "fits": outcome.fits,
        "checks": checks,
        "passed": all(c["passed"] for c in checks),
        "wall_time_s": round(wall, 3),
    })


def write_outputs(cfg, outcome, record):
    os.makedirs(cfg.out_dir, exist_ok=True)
    stem = os.path.join(cfg.out_dir, f"{cfg.prefix}{cfg.name}")
    paths = [stem + ".csv"]
    write_csv(paths[0], outcome.columns, outcome.rows)
    for name in sorted(outcome.tables):
        cols, rows = outcome.tables[name]
        paths.append(f"{stem}_{name}.csv")
        write_csv(paths[-1], cols, rows)
    paths.append(stem + ".json")
    with open(paths[-1], "w", encoding="utf-8") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths


def _load(target):
    """A config path, or a bare experiment name (run with defaults)."""
    if not os.path.exists(target) and target in REGISTRY:
        return make_config({"experiment.name": target})
    return read_config(target, REGISTRY)


def cmd_run(args):
    cfg = _load(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        cfg.threads = args.threads
    if args.out is not None:
        cfg.out_dir = args.out
    if not args.tolerance_scale > 0:
        raise ConfigError("--tolerance-scale must be positive")
    try:
        outcome, wall, params = run_experiment(cfg)
    except (ConfigError, InputError, ParameterError):
        raise
    except TracecalcError as exc:
        print(f"error: {cfg.name}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    record = build_record(cfg, outcome, wall, params, args.tolerance_scale)
    paths = write_outputs(cfg, outcome, record)
    for c in outcome.checks:
        tag = "PASS" if c.passed(args.tolerance_scale) else "FAIL"
        print(f"[{tag}] {c.describe(args.tolerance_scale)}")
    print(f"{cfg.name}: {'passed' if record['passed'] else 'FAILED'} in {wall:.1f} s; wrote {', '.join(paths)}")
    return EXIT_PASS if record["passed"] else EXIT_FAIL


def cmd_list(args):
    print(list_experiments())
    return EXIT_PASS


def cmd_validate(args):
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: cannot read {args.config}: {exc.strerror}", file=sys.stderr)
        return EXIT_USAGE
    values, lines, diags = parse_config_text(text, source=args.config)
    if not diags:
        diags = validate_values(values, lines, REGISTRY)
    for d in diags:
        print(f"{args.config}: {d}")
    if diags:
        return EXIT_USAGE
    print(f"{args.config}: ok ({values['experiment.name']})")
    return EXIT_PASS


def build_parser():
    p = argparse.ArgumentParser(prog="tracecalc", description="Run trace-formula and functional-calculus experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run an experiment from a config file (or by name with defaults)")
    r.add_argument("config")
    r.add_argument("--threads", type=int, default=None)
    r.add_argument("--out", default=None, help="output directory (overrides output.dir)")
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--tolerance-scale", type=float, default=1.0, help="multiply every threshold tolerance by T")
    r.set_defaults(func=cmd_run)
    ls = sub.add_parser("list", help="list experiments")
    ls.set_defaults(func=cmd_list)
    v = sub.add_parser("validate", help="check a config without running it")
    v.add_argument("config")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_PASS
    try:
        return args.func(args)
    except (ConfigError, InputError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TracecalcError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
