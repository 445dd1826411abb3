"""Monte-Carlo experiment harness: paired trials, outage, sweeps, emitters.

Every trial draws its randomness from a stream keyed by (seed, trial_index),
so schemes compared at the same configuration see identical channels and any
trial subset can run in any order or degree of parallelism without changing
a single emitted float. Aggregates reduce records in trial order.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, replace

import numpy as np
from joblib import Parallel, delayed
from scipy.stats import norm

from .agents import AbmTrace, run_abm
from .centralized import minimax_bisection, solve_centralized
from .channel import draw_realization
from .config import SystemConfig
from .metrics import degeneracy_record
from .rsma import effective_gains, mmse_loading, sinr_report, sum_rate, zf_precoders

SCHEMES = ("abm_gradient", "abm_heuristic", "abm_no_structural", "centralized", "minimax_oracle")
SWEEP_AXES = ("snr_db", "pilot_fraction", "users")

CSV_COLUMNS = (
    "scheme",
    "axis",
    "axis_value",
    "snr_db",
    "K",
    "M_t",
    "M_r",
    "tau_p",
    "tau_c",
    "impairment",
    "trials",
    "outage_sys",
    "union_bound",
    "mean_rate",
    "eff_throughput",
    "ci_halfwidth",
    "mean_iters",
)


@dataclass
class TrialRecord:
    """Outcome of one scheme on one channel realization."""

    scheme: str
    final_dsys: float
    per_user_d: np.ndarray
    feasible: bool
    sum_rate: float
    iterations: int
    trace: AbmTrace | None = None


@dataclass
class AggregateResult:
    """Outage statistics and throughput summaries over a batch of trials."""

    outage_sys: float
    outage_per_user: np.ndarray
    union_bound: float
    mean_rate: float
    eff_throughput: float
    ci_halfwidth: float
    mean_iters: float
    trials: int


@dataclass
class SweepRow:
    """One (scheme, axis value) cell of a sweep, ready for emission."""

    scheme: str
    axis: str
    axis_value: float
    snr_db: float
    K: int
    M_t: int
    M_r: int
    tau_p: int
    tau_c: int
    impairment: str
    trials: int
    outage_sys: float
    union_bound: float
    mean_rate: float
    eff_throughput: float
    ci_halfwidth: float
    mean_iters: float
    aggregate: AggregateResult | None = None


def trial_rng_streams(seed: int, trial_index: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent channel and solver generators for one (seed, trial) pair.

    The channel stream is scheme-independent, which is what makes paired
    comparisons across schemes (and impairment models) share true channels.
    """
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(trial_index,))
    ch_ss, solver_ss = ss.spawn(2)
    return np.random.default_rng(ch_ss), np.random.default_rng(solver_ss)


def run_trial(
    config: SystemConfig,
    trial_index: int,
    scheme: str,
    include_trace: bool = False,
    record_powers: bool = False,
) -> TrialRecord:
    """Draw one realization, run one scheme, score the final allocation."""
    if scheme not in SCHEMES:
        raise ValueError(f"scheme must be one of {SCHEMES}, got {scheme!r}")
    cfg = config.resolve()
    rng_ch, rng_solver = trial_rng_streams(cfg.seed, trial_index)
    chan = draw_realization(cfg, rng_ch)
    loading = mmse_loading(
        cfg.K, cfg.p_total, cfg.noise_var, float(np.mean(chan.error_variance))
    )
    precoders = zf_precoders(chan.estimated_channels, loading=loading)
    gains = effective_gains(chan.estimated_channels, precoders)

    trace = None
    if scheme in ("abm_gradient", "abm_heuristic", "abm_no_structural"):
        run_cfg = cfg
        mode = "heuristic" if scheme == "abm_heuristic" else "gradient"
        if scheme == "abm_no_structural":
            run_cfg = replace(
                cfg, weights=replace(cfg.weights, mu=0.0, nu=0.0, w1=0.0, w2=0.0, w3=1.0)
            )
        trace = run_abm(run_cfg, chan, mode=mode, precoders=precoders, record_powers=record_powers)
        powers = trace.final_powers
        iterations = trace.iterations
    elif scheme == "centralized":
        res = solve_centralized(cfg, chan, rng=rng_solver, precoders=precoders)
        powers = res.powers
        iterations = res.iterations
    else:
        res = minimax_bisection(gains, cfg)
        powers = res.powers
        iterations = res.bisection_iters

    report = sinr_report(
        powers, gains, cfg.sic_factors(), chan.error_variance, cfg.p_total, cfg.noise_var
    )
    record = degeneracy_record(cfg.gamma_target, report.private)
    rate = sum_rate(report, cfg.pilot.tau_p, cfg.pilot.tau_c)
    return TrialRecord(
        scheme=scheme,
        final_dsys=record.dsys,
        per_user_d=record.per_user,
        feasible=record.feasible,
        sum_rate=rate,
        iterations=iterations,
        trace=trace if include_trace else None,
    )


def run_trials(
    config: SystemConfig,
    scheme: str,
    trials: int | None = None,
    n_jobs: int = 1,
    include_trace: bool = False,
) -> list[TrialRecord]:
    """Run a batch of paired trials; results are in trial order regardless of n_jobs."""
    n = config.trials if trials is None else trials
    if n_jobs == 1:
        return [run_trial(config, i, scheme, include_trace=include_trace) for i in range(n)]
    return Parallel(n_jobs=n_jobs)(
        delayed(run_trial)(config, i, scheme, include_trace) for i in range(n)
    )


def effective_throughput(records: list[TrialRecord]) -> float:
    """Mean rate over feasible trials scaled by the feasibility probability.

    Zero when no trial was feasible.
    """
    if not records:
        raise ValueError("need at least one record")
    feasible_rates = [r.sum_rate for r in records if r.feasible]
    if not feasible_rates:
        return 0.0
    outage = 1.0 - len(feasible_rates) / len(records)
    return float(np.mean(feasible_rates)) * (1.0 - outage)


def estimate_outage(records: list[TrialRecord]) -> AggregateResult:
    """Monte-Carlo outage with its union bound and throughput summaries.

    outage_sys counts trials with system degeneracy above 1, which by
    construction lies between the largest per-user outage and the union
    bound min(1, sum of per-user outages).
    """
    if not records:
        raise ValueError("need at least one record")
    n = len(records)
    d_matrix = np.vstack([r.per_user_d for r in records])
    outage_per_user = np.mean(d_matrix > 1.0, axis=0)
    outage_sys = float(np.mean([not r.feasible for r in records]))
    union = float(min(1.0, outage_per_user.sum()))
    z = norm.ppf(0.975)
    ci = float(z * np.sqrt(outage_sys * (1.0 - outage_sys) / n))
    return AggregateResult(
        outage_sys=outage_sys,
        outage_per_user=outage_per_user,
        union_bound=union,
        mean_rate=float(np.mean([r.sum_rate for r in records])),
        eff_throughput=effective_throughput(records),
        ci_halfwidth=ci,
        mean_iters=float(np.mean([r.iterations for r in records])),
        trials=n,
    )


def _config_for_axis(base: SystemConfig, axis: str, value) -> SystemConfig | None:
    """Derive the per-point config for one sweep value; None means skip."""
    if axis == "snr_db":
        return replace(base, snr_db=float(value))
    if axis == "pilot_fraction":
        tau_p = int(round(float(value) * base.pilot.tau_c))
        if tau_p < base.K:
            warnings.warn(
                f"pilot fraction {value} gives tau_p={tau_p} < K={base.K}; point skipped",
                stacklevel=3,
            )
            return None
        pilot = replace(base.pilot, tau_p=tau_p, error_mode="pilot_derived")
        if base.pilot.pilot_power_per_user is None:
            # pilot power tracks the per-user data-power share
            pilot = replace(pilot, pilot_power_per_user=base.p_total / base.K)
        return replace(base, pilot=pilot)
    if axis == "users":
        k = int(value)
        if not isinstance(base.eps, (int, float)) and base.eps is not None:
            raise ValueError("users sweep needs a scalar (or unset) eps")
        if not isinstance(base.weights.lambda_k, (int, float)):
            raise ValueError("users sweep needs a scalar lambda_k")
        # pilot length tracks the user count; step size re-derives from K + 1
        pilot = replace(base.pilot, tau_p=None)
        weights = replace(base.weights, eta0=None)
        return replace(base, K=k, pilot=pilot, weights=weights, eps_tol=None)
    raise ValueError(f"axis must be one of {SWEEP_AXES}, got {axis!r}")


def sweep(
    config: SystemConfig,
    axis: str,
    values,
    schemes=("abm_gradient",),
    trials: int | None = None,
    n_jobs: int = 1,
) -> list[SweepRow]:
    """Run every scheme over every axis value with paired channel draws."""
    for scheme in schemes:
        if scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {scheme!r}")
    rows = []
    for scheme in schemes:
        for value in values:
            derived = _config_for_axis(config, axis, value)
            if derived is None:
                continue
            resolved = derived.resolve()
            records = run_trials(derived, scheme, trials=trials, n_jobs=n_jobs)
            agg = estimate_outage(records)
            rows.append(
                SweepRow(
                    scheme=scheme,
                    axis=axis,
                    axis_value=float(value),
                    snr_db=resolved.snr_db,
                    K=resolved.K,
                    M_t=resolved.M_t,
                    M_r=resolved.M_r,
                    tau_p=resolved.pilot.tau_p,
                    tau_c=resolved.pilot.tau_c,
                    impairment=resolved.impairment,
                    trials=agg.trials,
                    outage_sys=agg.outage_sys,
                    union_bound=agg.union_bound,
                    mean_rate=agg.mean_rate,
                    eff_throughput=agg.eff_throughput,
                    ci_halfwidth=agg.ci_halfwidth,
                    mean_iters=agg.mean_iters,
                    aggregate=agg,
                )
            )
    return rows


def convergence_profile(
    config: SystemConfig,
    schemes=("abm_gradient",),
    trials: int | None = None,
    n_jobs: int = 1,
) -> list[dict]:
    """Mean/median system degeneracy per iteration, per scheme.

    Iteration 0 is the uniform starting allocation; traces shorter than the
    longest one hold their final value, mirroring a converged system.
    """
    rows = []
    for scheme in schemes:
        if scheme not in ("abm_gradient", "abm_heuristic", "abm_no_structural"):
            raise ValueError(f"convergence profiles need an agent scheme, got {scheme!r}")
        records = run_trials(config, scheme, trials=trials, n_jobs=n_jobs, include_trace=True)
        curves = []
        for r in records:
            curves.append([r.trace.dsys_initial] + list(r.trace.dsys_per_iter))
        length = max(len(c) for c in curves)
        padded = np.array([c + [c[-1]] * (length - len(c)) for c in curves])
        for it in range(length):
            col = padded[:, it]
            rows.append(
                {
                    "scheme": scheme,
                    "iteration": it,
                    "dsys_mean": float(col.mean()),
                    "dsys_median": float(np.median(col)),
                }
            )
    return rows


def _round9(value):
    """Round floats to 9 significant digits for stable emission."""
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(f"{float(value):.9g}")
    if isinstance(value, dict):
        return {k: _round9(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round9(v) for v in value]
    return value


def _format_cell(value) -> str:
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.9g}"
    return str(value)


def emit_results(rows: list[SweepRow], fmt: str, path: str, config: SystemConfig | None = None):
    """Write sweep rows as CSV (fixed column set) or JSON (plus config echo)."""
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for row in rows:
                writer.writerow([_format_cell(getattr(row, col)) for col in CSV_COLUMNS])
    elif fmt == "json":
        payload = {
            "config": _round9(config.to_dict()) if config is not None else None,
            "rows": [_round9({col: getattr(row, col) for col in CSV_COLUMNS}) for row in rows],
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    else:
        raise ValueError(f"format must be 'csv' or 'json', got {fmt!r}")


def emit_profile(rows: list[dict], fmt: str, path: str, config: SystemConfig | None = None):
    """Write convergence-profile rows in the same two formats."""
    columns = ("scheme", "iteration", "dsys_mean", "dsys_median")
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_format_cell(row[col]) for col in columns])
    elif fmt == "json":
        payload = {
            "config": _round9(config.to_dict()) if config is not None else None,
            "rows": [_round9(dict(row)) for row in rows],
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    else:
        raise ValueError(f"format must be 'csv' or 'json', got {fmt!r}")
