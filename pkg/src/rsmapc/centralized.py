"""Centralized baselines: target fixed point, minimax scaling, rate planner.

yates_fixed_point drives private powers to exact per-user SINR targets
through the standard-interference iteration (monotone from a zero start).
minimax_bisection finds the smallest achievable system degeneracy for a
fixed common power by bisecting on a common target scale. solve_centralized
is the full-knowledge benchmark: multi-start projected gradient ascent on a
penalized sum-rate objective over all K+1 powers, with numerical gradients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization
from .config import SystemConfig
from .metrics import DEGENERACY_CAP, dissimilarity_matrix, stream_dissimilarity
from .rsma import (
    EffectiveGains,
    PowerAllocation,
    Precoders,
    effective_gains,
    mmse_loading,
    zf_precoders,
)

_DIVERGENCE_LIMIT = 1e15


@dataclass
class MinimaxResult:
    """Best achievable system degeneracy and the powers that attain it."""

    powers: PowerAllocation
    dsys: float
    feasible: bool
    bisection_iters: int


@dataclass
class CentralizedResult:
    """Benchmark allocation with its objective value and search effort."""

    powers: PowerAllocation
    objective: float
    starts_tried: int
    iterations: int


def interference_map(
    p: np.ndarray,
    gains: EffectiveGains,
    targets: np.ndarray,
    p_c: float,
    eps: list[float],
    sigma_e_sq: list[float],
    p_total: float,
    noise_var: float,
) -> np.ndarray:
    """One step of the standard-interference iteration for exact targets.

    Maps private powers to the smallest powers meeting each user's target
    against the interference the current powers create. Monotone and scale
    sub-homogeneous in p, hence a standard interference function.
    """
    eps_arr = np.asarray(eps, dtype=float)
    sige = np.asarray(sigma_e_sq, dtype=float)
    loaded = gains.cross @ p
    interference = loaded - p * np.diag(gains.cross)
    interference += eps_arr * p_c * gains.common_leak + p_total * sige + noise_var
    return targets / gains.own * interference


def yates_fixed_point(
    gains: EffectiveGains,
    targets: np.ndarray,
    p_c: float,
    eps: list[float],
    sigma_e_sq: list[float],
    p_total: float,
    noise_var: float,
    max_iters: int = 10_000,
    rel_tol: float = 1e-10,
) -> tuple[np.ndarray, bool]:
    """Iterate the interference map from zero until it stabilizes.

    Returns the power vector and a flag that is True only when the iteration
    stabilized and the result fits the budget p_c + sum(p) <= p_total. An
    infeasible target set makes the iterates grow without bound; that case
    (and any zero own-gain) reports converged=False.
    """
    targets = np.asarray(targets, dtype=float)
    if np.any(targets <= 0):
        raise ValueError("targets must be positive")
    if np.any(gains.own <= 0):
        return np.zeros_like(targets), False
    p = np.zeros_like(targets)
    for _ in range(max_iters):
        p_new = interference_map(p, gains, targets, p_c, eps, sigma_e_sq, p_total, noise_var)
        peak = float(p_new.max(initial=0.0))
        if not np.isfinite(peak) or peak > _DIVERGENCE_LIMIT:
            return p_new, False
        if float(np.max(np.abs(p_new - p))) <= rel_tol * max(peak, 1e-300):
            within_budget = p_c + float(p_new.sum()) <= p_total + 1e-12
            return p_new, within_budget
        p = p_new
    return p, False


def minimax_bisection(
    gains: EffectiveGains,
    config: SystemConfig,
    p_c: float | None = None,
    lo: float = 1e-6,
    hi: float = 1e6,
    tol: float = 1e-4,
    max_iters: int = 60,
) -> MinimaxResult:
    """Smallest system degeneracy reachable with the private-power budget.

    A degeneracy level t is achievable iff the targets scaled down by t are
    jointly supportable within p_total - p_c, which the interference fixed
    point decides exactly. Bisects t over [lo, hi] to tolerance tol. The
    common power defaults to the uniform split p_total / (K + 1) and is held
    fixed. When even t = hi is unachievable the result carries dsys = hi and
    zero powers.
    """
    cfg = config if config.eps is not None else config.resolve()
    n = cfg.K
    p_total = cfg.p_total
    if p_c is None:
        p_c = p_total / (n + 1)
    if not 0 <= p_c < p_total:
        raise ValueError("common power must be non-negative and below the budget")
    eps = cfg.sic_factors()
    sige = [cfg.pilot.error_variance()] * n
    targets = np.full(n, cfg.gamma_target)

    # The fixed point of the interference map at level t solves a linear
    # system: with A = diag(targets/t/own) @ offdiag(cross) and c the constant
    # interference scaled the same way, p* = (I - A)^-1 c. It exists and is
    # non-negative exactly when the spectral radius of A stays below 1, so
    # each attempt is a direct solve instead of an iteration to convergence.
    if np.any(gains.own <= 0):
        zero = PowerAllocation(common=p_c, private=np.zeros(n))
        return MinimaxResult(powers=zero, dsys=hi, feasible=False, bisection_iters=0)
    coupling = gains.cross.copy()
    np.fill_diagonal(coupling, 0.0)
    scale = targets / gains.own
    a_unit = scale[:, None] * coupling
    const_unit = scale * (
        np.asarray(eps) * p_c * gains.common_leak
        + p_total * np.asarray(sige)
        + cfg.noise_var
    )
    radius_unit = float(np.max(np.abs(np.linalg.eigvals(a_unit))))

    def attempt(t: float) -> tuple[np.ndarray, bool]:
        if radius_unit / t >= 1.0:
            return np.zeros(n), False
        p_star = np.linalg.solve(np.eye(n) - a_unit / t, const_unit / t)
        return p_star, p_c + float(p_star.sum()) <= p_total + 1e-12

    p_hi, ok_hi = attempt(hi)
    if not ok_hi:
        zero = PowerAllocation(common=p_c, private=np.zeros(n))
        return MinimaxResult(powers=zero, dsys=hi, feasible=False, bisection_iters=0)
    p_lo, ok_lo = attempt(lo)
    if ok_lo:
        return MinimaxResult(
            powers=PowerAllocation(common=p_c, private=p_lo),
            dsys=lo,
            feasible=lo <= 1.0,
            bisection_iters=0,
        )

    iters = 0
    best_p = p_hi
    while iters < max_iters and hi - lo > tol:
        mid = 0.5 * (lo + hi)
        p_mid, ok = attempt(mid)
        if ok:
            hi, best_p = mid, p_mid
        else:
            lo = mid
        iters += 1
    return MinimaxResult(
        powers=PowerAllocation(common=p_c, private=best_p),
        dsys=hi,
        feasible=hi <= 1.0,
        bisection_iters=iters,
    )


def centralized_objective(
    report,
    record,
    dwprs: np.ndarray,
    fsss: np.ndarray,
    config: SystemConfig,
) -> float:
    """Penalized planner objective: rate minus infeasibility plus structure.

    Sum rate at the pilot-overhead prelog, minus beta times the total amount
    by which per-user degeneracies exceed 1, plus lambda1/lambda2 times the
    DWPR and FSS totals.
    """
    bw = config.benchmark_weights
    prelog = config.prelog
    rate = prelog * float(np.log2(1.0 + report.common) + np.sum(np.log2(1.0 + report.private)))
    penalty = float(np.sum(np.maximum(0.0, record.per_user - 1.0)))
    return rate - bw.beta * penalty + bw.lambda1 * float(np.sum(dwprs)) + bw.lambda2 * float(np.sum(fsss))


class _ObjectiveContext:
    """Precomputed per-realization arrays for batched objective evaluation."""

    def __init__(self, config: SystemConfig, channel: ChannelRealization, precoders: Precoders):
        gains = effective_gains(channel.estimated_channels, precoders)
        n = config.K
        self.n = n
        self.cross_t = gains.cross.T.copy()
        self.diag = np.diag(gains.cross).copy()
        self.own = gains.own
        self.leak = gains.common_leak
        self.eps_leak = np.asarray(config.sic_factors()) * gains.common_leak
        self.floor = config.p_total * np.asarray(channel.error_variance) + config.noise_var
        self.prelog = config.prelog
        self.gamma_tar = config.gamma_target
        self.theta = config.theta
        self.d_ck = np.array(
            [stream_dissimilarity(precoders.common, precoders.private[k]) for k in range(n)]
        )
        if n > 1:
            dmat = dissimilarity_matrix(precoders.private)
            self.fss_sum = float(np.sum((np.sum(dmat < config.delta, axis=1) - 1) / (n - 1)))
        else:
            self.fss_sum = 0.0
        self.gains = gains

    def evaluate(self, x: np.ndarray, weights) -> np.ndarray:
        """Objective for a (B, K+1) batch of allocations; column 0 is common."""
        pc = x[:, 0]
        p = x[:, 1:]
        loaded = p @ self.cross_t
        denom_p = loaded - p * self.diag + pc[:, None] * self.eps_leak + self.floor
        gamma_p = p * self.own / denom_p
        gamma_c = pc[:, None] * self.leak / (loaded + self.floor)
        rate = self.prelog * (
            np.log2(1.0 + gamma_c.min(axis=1)) + np.log2(1.0 + gamma_p).sum(axis=1)
        )
        d = np.minimum(self.gamma_tar / np.maximum(gamma_p, 1e-300), DEGENERACY_CAP)
        penalty = np.maximum(0.0, d - 1.0).sum(axis=1)
        qualifies = np.where(gamma_c >= gamma_p, gamma_p >= self.theta, gamma_c >= self.theta)
        dwpr_sum = (0.5 * self.d_ck * qualifies).sum(axis=1)
        return (
            rate
            - weights.beta * penalty
            + weights.lambda1 * dwpr_sum
            + weights.lambda2 * self.fss_sum
        )


def solve_centralized(
    config: SystemConfig,
    channel: ChannelRealization,
    rng: np.random.Generator | None = None,
    precoders: Precoders | None = None,
    n_starts: int = 8,
    pga_iters: int = 500,
) -> CentralizedResult:
    """Multi-start projected gradient ascent on the planner objective.

    Starts from the uniform split plus n_starts - 1 Dirichlet draws on the
    budget simplex, takes central-difference gradients with step
    1e-5 * p_total, steps with the diminishing schedule eta0 / (1 + t / 50),
    and projects by clipping negatives then rescaling into the budget. The
    best allocation ever evaluated is returned, so the result is never worse
    than the uniform start. Ties between starts resolve to the earliest one.
    """
    cfg = config if config.eps is not None else config.resolve()
    if precoders is None:
        loading = mmse_loading(
            cfg.K, cfg.p_total, cfg.noise_var, float(np.mean(channel.error_variance))
        )
        precoders = zf_precoders(channel.estimated_channels, loading=loading)
    if rng is None:
        rng = np.random.default_rng(np.random.SeedSequence(entropy=cfg.seed, spawn_key=(0xC0,)))
    ctx = _ObjectiveContext(cfg, channel, precoders)
    n = cfg.K
    dim = n + 1
    p_total = cfg.p_total
    bw = cfg.benchmark_weights
    eta0 = 0.2 * p_total / dim
    h = 1e-5 * p_total

    x = np.empty((n_starts, dim))
    x[0] = p_total / dim
    for s in range(1, n_starts):
        x[s] = rng.dirichlet(np.ones(dim)) * p_total

    eye = np.eye(dim)

    def project(pts: np.ndarray) -> np.ndarray:
        pts = np.maximum(pts, 0.0)
        tot = pts.sum(axis=1)
        over = tot > p_total
        if np.any(over):
            pts[over] *= (p_total / tot[over])[:, None]
        return pts

    best_val = -np.inf
    best_x = x[0].copy()

    for t in range(pga_iters):
        plus = x[:, None, :] + h * eye[None, :, :]
        minus = np.maximum(x[:, None, :] - h * eye[None, :, :], 0.0)
        batch = np.concatenate(
            [x, plus.reshape(n_starts * dim, dim), minus.reshape(n_starts * dim, dim)]
        )
        vals = ctx.evaluate(batch, bw)
        f0 = vals[:n_starts]
        top = int(np.argmax(f0))
        if f0[top] > best_val:
            best_val = float(f0[top])
            best_x = x[top].copy()
        fp = vals[n_starts : n_starts + n_starts * dim].reshape(n_starts, dim)
        fm = vals[n_starts + n_starts * dim :].reshape(n_starts, dim)
        span = np.minimum(x, h) + h
        grad = (fp - fm) / span
        x = project(x + (eta0 / (1.0 + t / 50.0)) * grad)

    final_vals = ctx.evaluate(x, bw)
    top = int(np.argmax(final_vals))
    if final_vals[top] > best_val:
        best_val = float(final_vals[top])
        best_x = x[top].copy()

    powers = PowerAllocation(common=float(best_x[0]), private=best_x[1:].copy())
    return CentralizedResult(
        powers=powers, objective=best_val, starts_tried=n_starts, iterations=pga_iters
    )
