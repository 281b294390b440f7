"""Command-line front end.

Subcommands ``dmt``, ``cbar`` and ``select`` print CSV curves; ``simulate``
runs a Monte Carlo configuration file; ``validate`` runs the oracle suites.
Exit status is 0 on success, 1 on an internal or validation failure and 2
on a usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .curves import MacConfig, mac_dmt, mac_dmt_curve, max_multiplexing_gain
from .errors import DomainError, UnsupportedConfigurationError
from .exponent_solver import solve_cbar_mac, solve_cbar_mac_d
from .mac_sim import ConfigError, SimConfig, run_trials
from .selection_bounds import (
    SelectionBoundConfig,
    allowed_L,
    cbar_red_us,
    cbar_red_us_min,
    cbar_us,
    dbar_us,
    optimize_L,
)

OUTPUT_DIR_ENV = "MACDMT_OUTPUT_DIR"
NA = "NA"


class UsageError(Exception):
    """Bad flags or parameters; reported with exit status 2."""


def _fmt(x) -> str:
    if x is None:
        return NA
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if x == 0.0:
        x = 0.0  # drop the sign of -0.0
    return f"{x:.10g}"


def _r_values(args, K, n_r):
    if args.r is not None:
        rs = list(args.r)
    elif args.r_grid is not None:
        start, stop, count = args.r_grid
        try:
            count = int(count)
        except ValueError:
            raise UsageError(f"--r-grid count must be an integer, got {count!r}") from None
        if count < 1 or stop < start:
            raise UsageError("--r-grid needs START <= STOP and COUNT >= 1")
        rs = list(np.linspace(float(start), float(stop), count)) if count > 1 else [float(start)]
    else:
        raise UsageError("give --r values or --r-grid START STOP COUNT")
    rmax = max_multiplexing_gain(K, n_r)
    for r in rs:
        if not math.isfinite(r) or r < -1e-12 or r > rmax + 1e-12:
            raise UsageError(f"r={r} outside [0, {rmax:.10g}] for K={K}, n_r={n_r}")
    return [min(max(float(r), 0.0), rmax) for r in rs]


def _check_users(K, n_r):
    if K < 1 or n_r < 1:
        raise UsageError(f"need K >= 1 and n_r >= 1, got K={K}, n_r={n_r}")


def _emit(args, header, rows, t0):
    """Write a CSV with a manifest reference to ``--out`` or stdout."""
    argv = [args.command] + list(args._argv)
    manifest = {"command": args.command, "argv": argv, "version": __version__}
    buf = io.StringIO()
    if args.out:
        out = Path(args.out)
        side = out.with_name(out.name + ".manifest.json")
        buf.write(f"# manifest: {side.name}\n")
    else:
        buf.write(f"# manifest: {json.dumps(manifest, sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    text = buf.getvalue()
    if args.out:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
        manifest.update(outputs=[str(out)], duration_s=round(time.perf_counter() - t0, 6))
        side.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_dmt(args) -> int:
    t0 = time.perf_counter()
    _check_users(args.K, args.nr)
    if args.curve:
        curve = mac_dmt_curve(args.K, args.nr)
        rows = list(zip(curve.xs, curve.ys))
    else:
        rows = [(r, mac_dmt(MacConfig(args.K, args.nr, r))) for r in _r_values(args, args.K, args.nr)]
    _emit(args, ["r", "d_mac"], rows, t0)
    return 0


def _parse_selection(value, K, n_r):
    if value is None or value in ("min", "opt", "opt-forced"):
        return value
    try:
        L = int(value)
    except ValueError:
        raise UsageError(f"--selection takes an integer, 'opt', 'opt-forced' or 'min', got {value!r}") from None
    if L not in allowed_L(K, n_r):
        raise UsageError(f"L={L} not allowed for K={K}, n_r={n_r} (allowed: {allowed_L(K, n_r)})")
    return L


def _cbar_row(K, n_r, r, sel, reduced, d_target):
    if sel is None:
        cfg = MacConfig(K, n_r, r)
        if d_target is None:
            b = solve_cbar_mac(cfg)
        else:
            b = solve_cbar_mac_d(cfg, d_target)
        return r, b.value, "mac"
    if sel == "min":
        v, L = cbar_red_us_min(K, n_r, r)
        return r, v, f"red-us:L={L}"
    if sel in ("opt", "opt-forced"):
        L, _ = optimize_L(K, n_r, r, allow_all_users=(sel == "opt"))
        if L is None:
            return r, None, "us:L=NA"
    else:
        L = sel
    cfg = SelectionBoundConfig(K, n_r, L, r)
    if not cfg.feasible:
        return r, None, f"{'red-us' if reduced else 'us'}:L={L}"
    b = cbar_red_us(cfg) if reduced else cbar_us(cfg)
    return r, b.value, f"{'red-us' if reduced else 'us'}:L={L}"


def cmd_cbar(args) -> int:
    t0 = time.perf_counter()
    _check_users(args.K, args.nr)
    sel = _parse_selection(args.selection, args.K, args.nr)
    if args.reduced and sel is None:
        raise UsageError("--reduced requires --selection")
    if sel == "min" and not args.reduced:
        raise UsageError("--selection min is only defined with --reduced")
    if args.d_target is not None and sel is not None:
        raise UsageError("--d-target applies to the no-selection bound only")
    if args.d_target is not None and args.d_target < 0:
        raise UsageError("--d-target must be nonnegative")
    rows = [_cbar_row(args.K, args.nr, r, sel, args.reduced, args.d_target)
            for r in _r_values(args, args.K, args.nr)]
    _emit(args, ["r", "cbar", "method"], rows, t0)
    return 0


def cmd_select(args) -> int:
    t0 = time.perf_counter()
    K, n_r = args.K, args.nr
    _check_users(K, n_r)
    nu = min(K, n_r)
    rs = _r_values(args, K, n_r)

    def bound(L, r):
        cfg = SelectionBoundConfig(K, n_r, L, r)
        return dbar_us(cfg) if cfg.feasible else None

    if args.L is not None:
        if args.L not in allowed_L(K, n_r):
            raise UsageError(f"L={args.L} not allowed for K={K}, n_r={n_r}")
        if args.force_selection and args.L > nu:
            raise UsageError("--force-selection excludes L = K")
        _emit(args, ["r", "dbar_us"], [(r, bound(args.L, r)) for r in rs], t0)
    elif args.optimize:
        rows = []
        for r in rs:
            L, d = optimize_L(K, n_r, r, allow_all_users=not args.force_selection)
            rows.append((r, NA if L is None else f"L={L}", d))
        _emit(args, ["r", "L_opt", "dbar_us"], rows, t0)
    else:
        Ls = [L for L in allowed_L(K, n_r) if not (args.force_selection and L > nu)]
        rows = []
        for r in rs:
            L1, _ = optimize_L(K, n_r, r, allow_all_users=True)
            L2, _ = optimize_L(K, n_r, r, allow_all_users=False)
            rows.append([r] + [bound(L, r) for L in Ls]
                        + [f"L={L1}", NA if L2 is None else f"L={L2}"])
        _emit(args, ["r"] + [f"dbar_us_L{L}" for L in Ls] + ["L_star", "L_star_star"], rows, t0)
    return 0


def _field_line(text, field_name):
    needle = f'"{field_name}"'
    for i, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return i
    return None


def load_sim_config(path) -> SimConfig:
    """Parse and validate a simulation config file.

    Raises
    ------
    UsageError
        With a ``file:line:col`` or ``file:line: field`` diagnostic.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"{path}: cannot read config ({exc.strerror})") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    if not isinstance(data, dict):
        raise UsageError(f"{path}:1: config must be a JSON object")
    try:
        return SimConfig.from_dict(data)
    except ConfigError as exc:
        line = _field_line(text, exc.field)
        loc = f"{path}:{line}" if line else str(path)
        raise UsageError(f"{loc}: {exc}") from None
    except (DomainError, UnsupportedConfigurationError) as exc:
        raise UsageError(f"{path}: {exc}") from None


def cmd_simulate(args) -> int:
    t0 = time.perf_counter()
    cfg = load_sim_config(args.config)
    out_dir = Path(args.out_dir or os.environ.get(OUTPUT_DIR_ENV) or "macdmt-out")
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    report = run_trials(cfg, workers=args.workers)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {name: out_dir / name for name in ("report.json", "report.csv", "manifest.json")}

    doc = report.to_dict()
    doc["manifest"] = "manifest.json"
    paths["report.json"].write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    buf = io.StringIO()
    buf.write("# manifest: manifest.json\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(report.CSV_COLUMNS)
    for row in report.csv_rows():
        w.writerow([_fmt(v) for v in row])
    paths["report.csv"].write_text(buf.getvalue(), encoding="utf-8")

    manifest = {
        "command": "simulate",
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "version": __version__,
        "workers": args.workers,
        "outputs": [str(paths["report.json"]), str(paths["report.csv"])],
        "duration_s": round(time.perf_counter() - t0, 3),
    }
    paths["manifest.json"].write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    d, c = report.estimated_diversity, report.estimated_complexity
    print(f"wrote {out_dir}: diversity slope {_fmt(d.slope)}{' (flagged)' if d.flagged else ''}, "
          f"complexity slope {_fmt(c.slope)}{' (flagged)' if c.flagged else ''}")
    return 0


def cmd_validate(args) -> int:
    from . import validation

    if args.suite == "all":
        names = list(validation.FAST_SUITES)
    elif args.suite in validation.SUITES:
        names = [args.suite]
    else:
        raise UsageError(f"unknown suite {args.suite!r}; choose from all, {', '.join(validation.SUITES)}")
    failed = 0
    for name in names:
        for check in validation.SUITES[name]():
            print(f"[{name}] {check.line()}")
            failed += not check.passed
    print(f"{'FAILED' if failed else 'OK'}: {failed} failing check(s)")
    return 1 if failed else 0


def _add_r_args(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--r", type=float, nargs="+", help="multiplexing gain values")
    g.add_argument("--r-grid", nargs=3, metavar=("START", "STOP", "COUNT"),
                   type=str, help="COUNT evenly spaced values from START to STOP inclusive")
    p.add_argument("--out", help="write CSV here (plus a .manifest.json sidecar) instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="macdmt", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dmt", help="optimal MAC DMT curve")
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--nr", type=int, required=True)
    _add_r_args(p)
    p.add_argument("--curve", action="store_true", help="emit the curve breakpoints only")
    p.set_defaults(func=cmd_dmt)

    p = sub.add_parser("cbar", help="complexity exponent upper bounds")
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--nr", type=int, required=True)
    _add_r_args(p)
    p.add_argument("--d-target", type=float, help="diversity target (defaults to the MAC DMT)")
    p.add_argument("--selection", help="L, 'opt' (best L), 'opt-forced' (best L < K) or 'min' (with --reduced)")
    p.add_argument("--reduced", action="store_true", help="selection that keeps the MAC DMT")
    p.set_defaults(func=cmd_cbar)

    p = sub.add_parser("select", help="selection-aided DMT bounds and the best L")
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--nr", type=int, required=True)
    _add_r_args(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--L", type=int)
    g.add_argument("--optimize", action="store_true")
    p.add_argument("--force-selection", action="store_true", help="never allow L = K")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("simulate", help="run a Monte Carlo configuration")
    p.add_argument("config", help="JSON configuration file")
    p.add_argument("--out-dir", help=f"output directory (default ${OUTPUT_DIR_ENV} or ./macdmt-out)")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", help="run oracle cross-check suites")
    p.add_argument("--suite", default="all")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args._argv = argv[1:]
    if args.command in ("dmt", "cbar", "select") and args.r_grid is not None:
        try:
            args.r_grid = [float(args.r_grid[0]), float(args.r_grid[1]), args.r_grid[2]]
        except ValueError:
            parser.error("--r-grid START and STOP must be numbers")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"macdmt {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, UnsupportedConfigurationError) as exc:
        print(f"macdmt {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - reported as an internal failure
        print(f"macdmt {args.command}: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
