"""Full-size acceptance gate for the simulator.

Each test checks one headline property of the package at realistic
Monte-Carlo sizes: oracle agreement for the analytic gradient and the
minimax solver, convergence-speed budgets, outage bound identities,
ordering claims across SNR, impairment, user count, and scheme, the
pilot-overhead trade-off, and bitwise reproducibility. Every test records
one PASS/FAIL line through the record_acceptance fixture; pytest prints
the collected lines in a terminal summary section.

The heavyweight Monte-Carlo batches live in module-scoped fixtures so the
bound tests and the ordering tests share one run.
"""

import time
from dataclasses import replace

import numpy as np
import pytest
from conftest import grid_minimax_dsys, random_gains, random_powers

from rsmapc.agents import agent_utility, utility_gradient
from rsmapc.centralized import minimax_bisection
from rsmapc.channel import draw_realization
from rsmapc.config import SystemConfig, UtilityWeights
from rsmapc.experiments import SCHEMES, emit_results, run_trials, sweep
from rsmapc.rsma import effective_gains, zf_precoders

SNR_VALUES = (0.0, 5.0, 10.0, 15.0, 20.0)
SNR_SCHEMES = ("abm_gradient", "abm_heuristic", "abm_no_structural", "minimax_oracle")
PILOT_FRACTIONS = (0.01, 0.02, 0.03, 0.05, 0.08, 0.12, 0.20)
BASE_SEED = 1234


def _verdict(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


@pytest.fixture(scope="module")
def snr_sweep_data():
    """SNR sweeps at K in {2, 8} for both impairments, 1000 paired trials."""
    t0 = time.perf_counter()
    rows = {}
    for k in (2, 8):
        for impairment in ("ideal", "practical"):
            cfg = SystemConfig(
                K=k, M_t=8, M_r=2, impairment=impairment, trials=1000, seed=BASE_SEED
            )
            rows[(k, impairment)] = sweep(
                cfg, "snr_db", SNR_VALUES, schemes=SNR_SCHEMES, trials=1000
            )
    return rows, time.perf_counter() - t0


@pytest.fixture(scope="module")
def pilot_sweep_data():
    """Pilot-fraction sweep at K=4 plus per-trial throughput samples."""
    base = SystemConfig(
        K=4, M_t=8, M_r=2, snr_db=16.0, impairment="practical",
        trials=500, seed=BASE_SEED,
    )
    base = replace(base, pilot=replace(base.pilot, tau_c=400))
    t0 = time.perf_counter()
    rows = sweep(base, "pilot_fraction", PILOT_FRACTIONS, schemes=("abm_gradient",), trials=500)
    # Re-run each point to keep the raw per-trial throughput samples; the
    # paired seeding makes these the exact trials behind the rows above.
    samples = {}
    for row in rows:
        pilot = replace(
            base.pilot,
            tau_p=row.tau_p,
            error_mode="pilot_derived",
            pilot_power_per_user=base.p_total / base.K,
        )
        cfg = replace(base, pilot=pilot)
        records = run_trials(cfg, "abm_gradient", trials=500)
        samples[row.axis_value] = np.array([r.sum_rate * r.feasible for r in records])
    return rows, samples, time.perf_counter() - t0


@pytest.fixture(scope="module")
def users_sweep_data():
    """User-count sweep to the antenna limit for every scheme, 500 trials."""
    cfg = SystemConfig(
        K=2, M_t=10, M_r=2, snr_db=22.0, impairment="ideal", trials=500, seed=BASE_SEED
    )
    t0 = time.perf_counter()
    rows = sweep(cfg, "users", list(range(2, 11)), schemes=SCHEMES, trials=500)
    return rows, time.perf_counter() - t0


def test_01_gradient_matches_finite_differences(record_acceptance):
    """Analytic own-power derivative vs central differences on random states."""
    t0 = time.perf_counter()
    weights = UtilityWeights(eta0=1.0)
    p_total, noise_var, gamma_target = 31.6227766017, 1.0, 3.16227766017
    tau_c = 200
    worst = 0.0
    checked = 0
    for i in range(100):
        k_users = (2, 4, 8)[i % 3]
        rng = np.random.default_rng(7000 + i)
        gains = random_gains(rng, k_users)
        powers = random_powers(rng, k_users, p_total)
        user = int(rng.integers(k_users))
        tau_p = 2 * k_users
        args = (
            user, gains, weights, tau_p, tau_c, 0.1, 0.008,
            p_total, noise_var, gamma_target,
        )

        def utility_at(p_k):
            shifted = replace(
                powers,
                private=np.where(np.arange(k_users) == user, p_k, powers.private),
            )
            return agent_utility(args[0], shifted, *args[1:])

        p_k = powers.private[user]
        h = 1e-6 * p_k
        numeric = (utility_at(p_k + h) - utility_at(p_k - h)) / (2.0 * h)
        analytic = utility_gradient(args[0], powers, *args[1:])
        worst = max(worst, abs(analytic - numeric) / max(abs(numeric), 1e-300))
        checked += 1
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-6 and elapsed < 5.0
    record_acceptance(
        f"{_verdict(ok)} 01 analytic gradient vs central differences: "
        f"{checked} states, worst rel err {worst:.2e} (< 1e-6), {elapsed:.1f}s (< 5s)"
    )
    assert worst < 1e-6
    assert elapsed < 5.0


def test_02_minimax_matches_grid_oracle(record_acceptance):
    """Bisection optimum vs exhaustive lattice search on two-user draws."""
    t0 = time.perf_counter()
    worst = 0.0
    for seed in range(1, 51):
        cfg = SystemConfig(K=2, M_t=4, M_r=2, snr_db=20.0, impairment="ideal").resolve()
        chan = draw_realization(cfg, np.random.default_rng(seed))
        gains = effective_gains(chan.estimated_channels, zf_precoders(chan.estimated_channels))
        p_c = cfg.p_total / 3.0
        solver = minimax_bisection(gains, cfg, p_c=p_c)
        grid = grid_minimax_dsys(gains, cfg, p_c, step=1e-3 * cfg.p_total)
        worst = max(worst, abs(solver.dsys - grid))
    elapsed = time.perf_counter() - t0
    ok = worst <= 2e-3 and elapsed < 60.0
    record_acceptance(
        f"{_verdict(ok)} 02 minimax bisection vs exhaustive grid: 50 seeds, "
        f"worst |gap| {worst:.2e} (<= 2e-3), {elapsed:.1f}s (< 60s)"
    )
    assert worst <= 2e-3
    assert elapsed < 60.0


def test_03_agent_loop_iteration_budgets(record_acceptance):
    """Median iterations to a feasible point stay within per-size budgets."""
    t0 = time.perf_counter()
    budgets = {2: 10, 4: 30, 8: 60}
    medians = {}
    improved = 0
    total = 0
    for k_users, budget in budgets.items():
        cfg = SystemConfig(
            K=k_users, M_t=8, M_r=2, snr_db=15.0, impairment="ideal",
            trials=200, seed=BASE_SEED, stop_on_feasible=True,
        )
        records = run_trials(cfg, "abm_gradient", include_trace=True)
        medians[k_users] = float(np.median([r.iterations for r in records]))
        for r in records:
            total += 1
            improved += r.trace.dsys_final <= r.trace.dsys_initial
    elapsed = time.perf_counter() - t0
    frac = improved / total
    ok = (
        all(medians[k] <= budgets[k] for k in budgets)
        and frac >= 0.95
        and elapsed < 120.0
    )
    med_text = ", ".join(f"K={k}: {medians[k]:.0f}/{budgets[k]}" for k in budgets)
    record_acceptance(
        f"{_verdict(ok)} 03 iteration medians within budget ({med_text}); "
        f"degeneracy never worsened on {frac:.1%} of trials (>= 95%), "
        f"{elapsed:.1f}s (< 120s)"
    )
    for k_users, budget in budgets.items():
        assert medians[k_users] <= budget
    assert frac >= 0.95
    assert elapsed < 120.0


def test_04_outage_bound_counting_identities(
    record_acceptance, snr_sweep_data, pilot_sweep_data, users_sweep_data
):
    """System outage obeys union and worst-user bounds on every aggregate."""
    snr_rows, _ = snr_sweep_data
    pilot_rows, _, _ = pilot_sweep_data
    users_rows, _ = users_sweep_data
    aggregates = [row.aggregate for rows in snr_rows.values() for row in rows]
    aggregates += [row.aggregate for row in pilot_rows]
    aggregates += [row.aggregate for row in users_rows]
    checked = 0
    violations = 0
    for agg in aggregates:
        n = agg.trials
        count_sys = round(agg.outage_sys * n)
        counts_user = [round(p * n) for p in agg.outage_per_user]
        if not (max(counts_user) <= count_sys <= min(n, sum(counts_user))):
            violations += 1
        if not (agg.outage_sys <= agg.union_bound):
            violations += 1
        checked += 1
    ok = violations == 0 and checked > 0
    record_acceptance(
        f"{_verdict(ok)} 04 outage within [worst user, union bound] as exact "
        f"counts on {checked} aggregates, {violations} violations"
    )
    assert checked > 0
    assert violations == 0


def test_05_outage_orderings_across_snr(record_acceptance, snr_sweep_data):
    """Outage falls with SNR, rises with impairment, and rises with load."""
    rows, elapsed = snr_sweep_data
    violations = []

    def curve(key, scheme):
        sub = sorted(
            (r for r in rows[key] if r.scheme == scheme), key=lambda r: r.axis_value
        )
        return sub

    for key in rows:
        for scheme in SNR_SCHEMES:
            sub = curve(key, scheme)
            out = [r.outage_sys for r in sub]
            ci = [r.ci_halfwidth for r in sub]
            ups = [
                (i, out[i + 1] - out[i])
                for i in range(len(out) - 1)
                if out[i + 1] > out[i]
            ]
            if len(ups) > 1 or any(d > ci[i] + ci[i + 1] for i, d in ups):
                violations.append(("snr_monotone", key, scheme))

    for k in (2, 8):
        for scheme in SNR_SCHEMES:
            for ri, rp in zip(curve((k, "ideal"), scheme), curve((k, "practical"), scheme)):
                if rp.outage_sys < ri.outage_sys:
                    violations.append(("practical_vs_ideal", k, scheme, ri.axis_value))

    for impairment in ("ideal", "practical"):
        for scheme in SNR_SCHEMES:
            for r2, r8 in zip(
                curve((2, impairment), scheme), curve((8, impairment), scheme)
            ):
                if r8.outage_sys < r2.outage_sys:
                    violations.append(("more_users_worse", impairment, scheme, r2.axis_value))

    ok = not violations and elapsed < 600.0
    record_acceptance(
        f"{_verdict(ok)} 05 outage orderings over SNR/impairment/users: "
        f"{len(violations)} violations on {4 * len(SNR_SCHEMES)} curves, "
        f"{elapsed:.0f}s (< 600s)"
    )
    assert violations == []
    assert elapsed < 600.0


def test_06_planner_rate_edge_at_two_users(record_acceptance):
    """The centralized planner keeps a small mean-rate edge at light load."""
    gaps = {}
    for snr_db in (10.0, 15.0, 20.0):
        cfg = SystemConfig(
            K=2, M_t=8, M_r=2, snr_db=snr_db, impairment="ideal",
            trials=1000, seed=BASE_SEED,
        )
        planner = np.mean([r.sum_rate for r in run_trials(cfg, "centralized")])
        agents = np.mean([r.sum_rate for r in run_trials(cfg, "abm_gradient")])
        gaps[snr_db] = (planner - agents) / agents
    ok = all(-0.02 <= g <= 0.15 for g in gaps.values())
    gap_text = ", ".join(f"{s:.0f} dB: {g:+.1%}" for s, g in gaps.items())
    record_acceptance(
        f"{_verdict(ok)} 06 planner vs agents mean-rate gap within [-2%, +15%] "
        f"at K=2 ({gap_text})"
    )
    for snr_db, gap in gaps.items():
        assert -0.02 <= gap <= 0.15, f"gap {gap:+.2%} at {snr_db} dB"


def test_07_structural_terms_raise_throughput(record_acceptance):
    """Coordination-aware agents beat the ablated variant beyond CI noise."""
    cfg = SystemConfig(
        K=8, M_t=8, M_r=2, snr_db=20.0, impairment="practical",
        trials=1000, seed=BASE_SEED,
    )
    with_terms = run_trials(cfg, "abm_gradient")
    ablated = run_trials(cfg, "abm_no_structural")
    diff = np.array(
        [
            a.sum_rate * a.feasible - b.sum_rate * b.feasible
            for a, b in zip(with_terms, ablated)
        ]
    )
    margin = float(diff.mean())
    halfwidth = float(1.96 * diff.std(ddof=1) / np.sqrt(len(diff)))
    ok = margin > halfwidth
    record_acceptance(
        f"{_verdict(ok)} 07 structural-term throughput margin {margin:+.4f} "
        f"exceeds 95% CI half-width {halfwidth:.4f} on {len(diff)} paired trials"
    )
    assert margin > halfwidth


def test_08_pilot_tradeoff_unimodal(record_acceptance, pilot_sweep_data):
    """Throughput versus pilot overhead rises to one interior peak then falls."""
    rows, samples, elapsed = pilot_sweep_data
    ordered = sorted(rows, key=lambda r: r.axis_value)
    fractions = [r.axis_value for r in ordered]
    means = np.array([samples[f].mean() for f in fractions])
    for row in ordered:
        assert row.eff_throughput == pytest.approx(
            samples[row.axis_value].mean(), rel=1e-9
        )
    peak = int(np.argmax(means))
    n = len(samples[fractions[0]])

    def paired_slack(i, j):
        gap = samples[fractions[j]] - samples[fractions[i]]
        return 1.96 * gap.std(ddof=1) / np.sqrt(n)

    unimodal = all(
        means[i + 1] >= means[i] - paired_slack(i, i + 1) for i in range(peak)
    ) and all(
        means[i + 1] <= means[i] + paired_slack(i, i + 1)
        for i in range(peak, len(means) - 1)
    )
    interior = 0.02 <= fractions[peak] <= 0.10
    ok = unimodal and interior and elapsed < 300.0
    record_acceptance(
        f"{_verdict(ok)} 08 pilot overhead trade-off unimodal with peak at "
        f"fraction {fractions[peak]:.2f} (within [0.02, 0.10]), {elapsed:.0f}s (< 300s)"
    )
    assert unimodal
    assert interior
    assert elapsed < 300.0


def test_09_throughput_knee_at_antenna_limit(record_acceptance, users_sweep_data):
    """Adding the tenth user onto ten antennas costs throughput everywhere."""
    rows, elapsed = users_sweep_data
    per_scheme = {}
    for row in rows:
        per_scheme.setdefault(row.scheme, {})[int(row.axis_value)] = row.eff_throughput
    knees = {s: vals[10] < vals[9] for s, vals in per_scheme.items()}
    growth = {s: vals[9] >= vals[2] for s, vals in per_scheme.items()}
    ok = all(knees.values()) and all(growth.values()) and set(per_scheme) == set(SCHEMES)
    text = ", ".join(
        f"{s}: K9={per_scheme[s][9]:.2f} K10={per_scheme[s][10]:.2f}" for s in SCHEMES
    )
    record_acceptance(
        f"{_verdict(ok)} 09 throughput knee at K=10 for every scheme and "
        f"K=9 >= K=2 ({text}), {elapsed:.0f}s"
    )
    assert set(per_scheme) == set(SCHEMES)
    for scheme in SCHEMES:
        assert knees[scheme], f"{scheme} lacks the knee at K=10"
        assert growth[scheme], f"{scheme} throughput shrank from K=2 to K=9"


def test_10_bitwise_reproducibility(record_acceptance, tmp_path):
    """Emitted bytes are identical across reruns and parallelism degrees."""
    cfg = SystemConfig(
        K=2, M_t=8, M_r=2, impairment="practical", trials=200, seed=BASE_SEED
    )

    def emitted(n_jobs, tag):
        rows = sweep(
            cfg, "snr_db", (10.0, 15.0),
            schemes=("abm_gradient", "minimax_oracle"),
            trials=200, n_jobs=n_jobs,
        )
        blobs = []
        for fmt in ("csv", "json"):
            path = tmp_path / f"{tag}_{n_jobs}.{fmt}"
            emit_results(rows, fmt, str(path), config=cfg)
            blobs.append(path.read_bytes())
        return blobs

    reference = emitted(1, "ref")
    repeats = {
        "rerun n_jobs=1": emitted(1, "rerun"),
        "n_jobs=2": emitted(2, "par2"),
        "n_jobs=3": emitted(3, "par3"),
    }
    mismatches = [name for name, blobs in repeats.items() if blobs != reference]
    ok = not mismatches
    record_acceptance(
        f"{_verdict(ok)} 10 emitted CSV/JSON bytes identical across reruns and "
        f"parallelism (checked {list(repeats)})"
    )
    assert mismatches == []
