"""Command-line front end for single runs, convergence profiles, and sweeps.

All subcommands accept a JSON config file using SystemConfig field names,
with individual flags overriding fields. The seed falls back to the
RSMA_SIM_SEED environment variable when --seed is absent. Exit status is 0
on success and 2 on configuration or I/O errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

from .config import SystemConfig, load_config
from .experiments import (
    SCHEMES,
    _round9,
    convergence_profile,
    emit_profile,
    emit_results,
    run_trial,
    sweep,
)

DEFAULT_SNR_VALUES = (0.0, 5.0, 10.0, 15.0, 20.0)
DEFAULT_PILOT_FRACTIONS = (0.01, 0.02, 0.03, 0.05, 0.08, 0.12, 0.20)
DEFAULT_USER_COUNTS = (2, 3, 4, 5, 6, 7, 8, 9, 10)


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="JSON file with SystemConfig fields")
    parser.add_argument("--out", help="output path (stdout when omitted)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--trials", type=int, help="Monte-Carlo trials per point")
    parser.add_argument("--seed", type=int, help="base seed (env RSMA_SIM_SEED as fallback)")
    parser.add_argument(
        "--schemes",
        default="abm_gradient",
        help=f"comma-separated subset of {', '.join(SCHEMES)}",
    )
    parser.add_argument("--jobs", type=int, default=1, help="parallel workers for trials")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rsmapc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_single = sub.add_parser("single", help="run one trial and print its trace")
    _add_common(p_single)
    p_single.add_argument("--trial-index", type=int, default=0)

    p_conv = sub.add_parser("converge", help="system degeneracy vs iteration")
    _add_common(p_conv)

    for name, help_text in (
        ("sweep-snr", "outage and throughput vs SNR"),
        ("sweep-pilot", "throughput vs pilot fraction"),
        ("sweep-users", "throughput vs number of users"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        p.add_argument("--values", help="comma-separated axis values")

    return parser


def _build_config(args) -> SystemConfig:
    config = load_config(args.config) if args.config else SystemConfig()
    if args.trials is not None:
        if args.trials < 1:
            raise ValueError("--trials must be positive")
        config = replace(config, trials=args.trials)
    seed = args.seed
    if seed is None and "RSMA_SIM_SEED" in os.environ:
        try:
            seed = int(os.environ["RSMA_SIM_SEED"])
        except ValueError as exc:
            raise ValueError(f"RSMA_SIM_SEED must be an integer: {exc}") from exc
    if seed is not None:
        config = replace(config, seed=seed)
    return config


def _parse_schemes(arg: str) -> list[str]:
    schemes = [s.strip() for s in arg.split(",") if s.strip()]
    if not schemes:
        raise ValueError("--schemes must name at least one scheme")
    for s in schemes:
        if s not in SCHEMES:
            raise ValueError(f"unknown scheme {s!r}; choose from {', '.join(SCHEMES)}")
    return schemes


def _parse_values(arg: str | None, defaults, as_int: bool = False) -> list:
    if arg is None:
        return list(defaults)
    try:
        vals = [int(v) if as_int else float(v) for v in arg.split(",") if v.strip()]
    except ValueError as exc:
        raise ValueError(f"--values must be comma-separated numbers: {exc}") from exc
    if not vals:
        raise ValueError("--values must name at least one value")
    return vals


def _emit_or_print(writer, rows, fmt: str, out: str | None, config: SystemConfig):
    if out is not None:
        writer(rows, fmt, out, config=config)
        return
    import tempfile

    with tempfile.NamedTemporaryFile("r", suffix=f".{fmt}", delete=False) as tmp:
        path = tmp.name
    try:
        writer(rows, fmt, path, config=config)
        with open(path) as fh:
            sys.stdout.write(fh.read())
    finally:
        os.unlink(path)


def _cmd_single(args) -> int:
    config = _build_config(args)
    scheme = _parse_schemes(args.schemes)[0]
    record = run_trial(
        config, args.trial_index, scheme, include_trace=True, record_powers=True
    )
    print(f"scheme={scheme} trial={args.trial_index} seed={config.seed}")
    if record.trace is not None:
        print(f"initial dsys: {record.trace.dsys_initial:.6g}")
        for it, d in enumerate(record.trace.dsys_per_iter, start=1):
            print(f"  iter {it:3d}: dsys={d:.6g}")
        print(f"stopped by {record.trace.converged_by} after {record.iterations} iterations")
        final = record.trace.final_powers
        print(f"final powers: common={final.common:.6g} private={[round(p, 6) for p in final.private]}")
    print(
        f"final dsys={record.final_dsys:.6g} feasible={record.feasible} "
        f"sum_rate={record.sum_rate:.6g} bits/s/Hz"
    )
    if args.out:
        payload = {
            "scheme": scheme,
            "trial_index": args.trial_index,
            "final_dsys": record.final_dsys,
            "per_user_d": list(record.per_user_d),
            "feasible": record.feasible,
            "sum_rate": record.sum_rate,
            "iterations": record.iterations,
            "dsys_per_iter": list(record.trace.dsys_per_iter) if record.trace else None,
            "config": config.to_dict(),
        }
        with open(args.out, "w") as fh:
            json.dump(_round9(payload), fh, indent=2)
            fh.write("\n")
    return 0


def _cmd_converge(args) -> int:
    config = _build_config(args)
    schemes = _parse_schemes(args.schemes)
    rows = convergence_profile(config, schemes=schemes, n_jobs=args.jobs)
    _emit_or_print(emit_profile, rows, args.format, args.out, config)
    return 0


def _cmd_sweep(args, axis: str, defaults, as_int: bool) -> int:
    config = _build_config(args)
    schemes = _parse_schemes(args.schemes)
    values = _parse_values(getattr(args, "values", None), defaults, as_int=as_int)
    rows = sweep(config, axis, values, schemes=schemes, n_jobs=args.jobs)
    _emit_or_print(emit_results, rows, args.format, args.out, config)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "single":
            return _cmd_single(args)
        if args.command == "converge":
            return _cmd_converge(args)
        if args.command == "sweep-snr":
            return _cmd_sweep(args, "snr_db", DEFAULT_SNR_VALUES, as_int=False)
        if args.command == "sweep-pilot":
            return _cmd_sweep(args, "pilot_fraction", DEFAULT_PILOT_FRACTIONS, as_int=False)
        if args.command == "sweep-users":
            return _cmd_sweep(args, "users", DEFAULT_USER_COUNTS, as_int=True)
        parser.error(f"unknown command {args.command!r}")
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
