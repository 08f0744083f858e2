"""Command line entry point: ``hris-sim simulate`` and ``hris-sim gap-audit``."""

from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import replace

from .channels import generate_channels, trial_rng
from .config import DEFAULTS, ConfigError, load_config, parse_config
from .oracle import DEFAULT_ENUM_CAP, DEFAULT_MAX_N, BoundViolationError, OracleScaleError, gap_analysis
from .sweep import SweepError, SweepSpec, apply_sweep_value, emit_csv, run_sweep


def _csv_list(text):
    return [t.strip() for t in text.split(",") if t.strip()]


def _number(text):
    x = float(text)
    return int(x) if x.is_integer() else x


def _load(path):
    return load_config(path) if path else parse_config({})


def _db(x):
    return 10 * math.log10(x) if x > 0 else -math.inf


def cmd_simulate(args) -> int:
    bundle = _load(args.config)
    s = bundle.sweep
    try:
        sweep = SweepSpec(
            variable=args.sweep or s.variable,
            values=tuple(_number(v) for v in _csv_list(args.values)) if args.values else s.values,
            trials=args.trials if args.trials is not None else s.trials,
            root_seed=args.seed if args.seed is not None else s.root_seed,
            methods=tuple(_csv_list(args.methods)) if args.methods else s.methods,
            tie_rho_links=s.tie_rho_links if args.tie_rho_links is None else args.tie_rho_links,
            arbitrary_placements=args.arbitrary_placements or s.arbitrary_placements,
            oracle_cap=args.oracle_cap,
        )
        if args.sweep and args.sweep != s.variable and not args.values:
            raise ValueError(f"--values is required when sweeping {args.sweep!r}")
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    bundle = replace(bundle, sweep=sweep)
    for v in sweep.values:
        try:
            apply_sweep_value(bundle, v)
        except ValueError as exc:
            raise ConfigError(f"--values: {v!r} invalid for {sweep.variable}: {exc}") from exc

    rows = run_sweep(bundle, workers=args.workers)
    path = emit_csv(rows, args.out)
    print(f"wrote {len(rows)} rows to {path}")
    return 0


def cmd_gap_audit(args) -> int:
    bundle = _load(args.config)
    system = bundle.system
    seed = args.seed if args.seed is not None else bundle.sweep.root_seed
    if system.N > DEFAULT_MAX_N or math.comb(system.N, system.L) > args.oracle_cap:
        raise OracleScaleError(
            f"N={system.N}, L={system.L} is beyond the oracle limits "
            f"(N <= {DEFAULT_MAX_N}, C(N,L) <= {args.oracle_cap}); use a smaller config"
        )
    header = f"{'trial':>5} {'prop_dB':>9} {'opt_dB':>9} {'lb_dB':>9} {'ub_dB':>9} {'eps':>10} {'E':>10} {'E_bound':>10} {'eta_max':>10} {'E<=delta':>8}"
    print(header)
    n_ok = 0
    for t in range(args.trials):
        ch = generate_channels(system, bundle.geometry, bundle.fading, trial_rng(seed, t, 0))
        rep = gap_analysis(system, ch, args.delta, cap=args.oracle_cap)
        ok = rep.E <= args.delta
        n_ok += ok
        print(
            f"{t:>5} {_db(rep.gamma_prop):9.3f} {_db(rep.gamma_opt):9.3f} {_db(rep.gamma_lb):9.3f} "
            f"{_db(rep.gamma_ub):9.3f} {rep.epsilon:10.3e} {rep.E:10.3e} {rep.E_bound:10.3e} "
            f"{rep.eta_max:10.4g} {'yes' if ok else 'no':>8}"
        )
    print(f"eta = {system.eta:.6g}; E <= delta={args.delta} on {n_ok}/{args.trials} trials")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hris-sim", description="Hybrid RIS placement simulator")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a Monte-Carlo sweep and write a CSV")
    sim.add_argument("--config", help="TOML config file (defaults if omitted)")
    sim.add_argument("--sweep", choices=("rho", "eta_db", "L"))
    sim.add_argument("--values", help="comma separated sweep values")
    sim.add_argument("--trials", type=int)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--methods", help="comma separated subset of proposed,arbitrary,passive,active,no_ris,oracle")
    sim.add_argument("--arbitrary-placements", type=int, help=f"random placements per trial (default {DEFAULTS['arbitrary_placements']})")
    sim.add_argument("--tie-rho-links", dest="tie_rho_links", action="store_true", default=None)
    sim.add_argument("--no-tie-rho-links", dest="tie_rho_links", action="store_false")
    sim.add_argument("--workers", type=int, default=1)
    sim.add_argument("--oracle-cap", type=int, default=DEFAULT_ENUM_CAP)
    sim.add_argument("--out", required=True)
    sim.set_defaults(func=cmd_simulate)

    gap = sub.add_parser("gap-audit", help="compare the proposed solver with the exhaustive oracle")
    gap.add_argument("--config", help="TOML config file (defaults if omitted)")
    gap.add_argument("--delta", type=float, required=True)
    gap.add_argument("--trials", type=int, default=10)
    gap.add_argument("--seed", type=int)
    gap.add_argument("--oracle-cap", type=int, default=DEFAULT_ENUM_CAP)
    gap.set_defaults(func=cmd_gap_audit)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, OracleScaleError, SweepError, BoundViolationError, OSError) as exc:
        print(f"hris-sim: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
