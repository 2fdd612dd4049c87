"""Command-line front end: run, sweep, compare, validate, and oracle."""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .config import ConfigError, SystemConfig, load_config_file
from .experiments import (SWEEP_VARIABLES, build_oracle_report, run_point,
                          run_sweep)
from .optimize import InfeasibleError
from .validation import run_validation_suite

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4

DEFAULT_SEED = 42


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="relay-ee",
        description="EE power allocation for a massive MIMO AF relay downlink: "
                    "Monte Carlo comparison of bisection, grid, and alternating "
                    "optimizers against the exhaustive baseline.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, with_out=True):
        sp.add_argument("--config", metavar="PATH",
                        help="key = value config file; omit for the built-in "
                             "reference scenario")
        sp.add_argument("--seed", type=int, default=None,
                        help=f"master seed (default: config seed, {DEFAULT_SEED})")
        if with_out:
            sp.add_argument("--out", metavar="PATH",
                            help="CSV output path (default: stdout)")
            sp.add_argument("--figdir", metavar="DIR",
                            help="also render figures into this directory")
            sp.add_argument("--mbit", action="store_true",
                            help="report EE columns in Mbit/J instead of bits/J")

    sp = sub.add_parser("run", help="one-trial comparison table at the configured scenario")
    common(sp)
    sp.add_argument("--trials", type=int, default=1)

    sp = sub.add_parser("compare", help="Monte Carlo comparison table at the configured scenario")
    common(sp)
    sp.add_argument("--trials", type=int, default=200)

    sp = sub.add_parser("sweep", help="Monte Carlo sweep over one scenario variable")
    common(sp)
    sp.add_argument("--variable", required=True, choices=sorted(SWEEP_VARIABLES),
                    help="scenario variable to sweep")
    sp.add_argument("--values", required=True,
                    help="comma-separated sweep values, e.g. 50,100,150,200")
    sp.add_argument("--trials", type=int, default=200)

    sp = sub.add_parser("validate", help="run the invariant suite and report pass/fail")
    common(sp, with_out=False)
    sp.add_argument("--n-symbols", type=int, default=100_000,
                    help="symbols for the signal-level SINR check")
    sp.add_argument("--bound-checks", type=int, default=20,
                    help="realizations for the bound-vs-root check")
    sp.add_argument("--probe-realizations", type=int, default=100,
                    help="realizations for the single-peak probe")

    sp = sub.add_parser("oracle", help="dense sweeps and bound cross-checks on one realization")
    common(sp)
    sp.add_argument("--trial", type=int, default=0,
                    help="trial id of the fixed realization")
    return p


def _load(args) -> tuple:
    if args.config:
        cfg = load_config_file(args.config)
    else:
        cfg = SystemConfig().validate()
    seed = args.seed if args.seed is not None else cfg.seed
    return cfg, seed


def _emit(args, text: str) -> int:
    if args.out:
        try:
            from .report import write_text
            write_text(args.out, text)
        except OSError as exc:
            print(f"error: cannot write {args.out!r}: {exc}", file=sys.stderr)
            return EXIT_IO
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _table_command(args, cfg: SystemConfig, seed: int) -> int:
    from . import report
    if args.command == "sweep":
        try:
            values = [float(tok) for tok in args.values.split(",") if tok.strip()]
        except ValueError:
            print(f"error: cannot parse sweep values {args.values!r}", file=sys.stderr)
            return EXIT_CONFIG
        table = run_sweep(cfg, args.variable, values, args.trials, seed)
    else:
        if args.trials < 1:
            raise ConfigError("trials must be >= 1")
        table = run_point(cfg, args.trials, seed)
    scale, suffix = (1e-6, "mbit") if args.mbit else (1.0, "")
    code = _emit(args, report.comparison_csv(table, scale, suffix))
    if code != EXIT_OK:
        return code
    if args.figdir:
        try:
            if args.command == "sweep":
                report.render_sweep_figures(table, args.figdir)
            else:
                report.render_compare_figures(table, args.figdir)
        except OSError as exc:
            print(f"error: cannot render figures in {args.figdir!r}: {exc}",
                  file=sys.stderr)
            return EXIT_IO
    all_infeasible = all(s.trials_feasible == 0
                         for row in table.rows for s in row.stats.values())
    return EXIT_INFEASIBLE if all_infeasible else EXIT_OK


def _validate_command(args, cfg: SystemConfig, seed: int) -> int:
    checks = run_validation_suite(cfg, seed, n_symbols=args.n_symbols,
                                  n_bound_checks=args.bound_checks,
                                  n_probe=args.probe_realizations)
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.detail}")
    return EXIT_OK if all(c.passed for c in checks) else 1


def _oracle_command(args, cfg: SystemConfig, seed: int) -> int:
    from . import report
    rep = build_oracle_report(cfg, seed, args.trial)
    code = _emit(args, report.oracle_csv(rep))
    if code != EXIT_OK:
        return code
    if args.figdir:
        try:
            report.render_oracle_figures(rep, args.figdir)
        except OSError as exc:
            print(f"error: cannot render figures in {args.figdir!r}: {exc}",
                  file=sys.stderr)
            return EXIT_IO
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg, seed = _load(args)
        if args.command in ("run", "compare", "sweep"):
            return _table_command(args, cfg, seed)
        if args.command == "validate":
            return _validate_command(args, cfg, seed)
        return _oracle_command(args, cfg, seed)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
