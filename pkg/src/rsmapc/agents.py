"""Per-user power-control agents and their best-response loop.

Each user runs a local agent that owns one private-stream power. Agents
maximize a utility trading rate against degeneracy, a linear power price,
and two structural bonuses (DWPR, FSS), under a shared budget enforced by a
base-station rescale. Updates are either projected gradient steps on the
utility or a metric-driven heuristic; both shrink their step as 1/(t+1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelRealization
from .config import SystemConfig, UtilityWeights
from .metrics import DEGENERACY_CAP, dissimilarity_matrix, local_degeneracy, stream_dissimilarity
from .rsma import (
    EffectiveGains,
    PowerAllocation,
    Precoders,
    effective_gains,
    mmse_loading,
    private_sinr,
    zf_precoders,
)

LN2 = math.log(2.0)

ABM_MODES = ("gradient", "heuristic")
STOP_REASONS = ("power_tolerance", "feasibility", "max_iters")


@dataclass
class AgentState:
    """One agent's power and the metric values it saw last."""

    power: float
    last_sinr: float = 0.0
    last_degeneracy: float = 0.0
    last_dwpr: float = 0.0
    last_fss: float = 0.0


@dataclass
class AbmTrace:
    """Iteration-level record of one agent-loop run.

    dsys_per_iter holds the post-rescale system degeneracy after each
    iteration (so its length equals iterations); dsys_initial is the value
    at the uniform starting allocation. powers_per_iter is filled only when
    power recording is enabled, to keep large sweeps lean.
    """

    dsys_initial: float
    dsys_per_iter: list[float] = field(default_factory=list)
    powers_per_iter: list[PowerAllocation] = field(default_factory=list)
    iterations: int = 0
    converged_by: str = "max_iters"
    final_powers: PowerAllocation | None = None
    final_states: list[AgentState] = field(default_factory=list)

    @property
    def dsys_final(self) -> float:
        return self.dsys_per_iter[-1] if self.dsys_per_iter else self.dsys_initial


def agent_utility(
    k: int,
    powers: PowerAllocation,
    gains: EffectiveGains,
    weights: UtilityWeights,
    tau_p: int,
    tau_c: int,
    eps_k: float,
    sigma_e_sq_k: float,
    p_total: float,
    noise_var: float,
    gamma_target: float,
    dwpr_k: float = 0.0,
    fss_k: float = 0.0,
) -> float:
    """Utility of agent k at the given allocation.

    Rate term scaled by the pilot overhead, minus the degeneracy penalty and
    the power price, plus the structural bonuses weighted by mu and nu. The
    structural metric values are passed in as data; they depend on powers
    only through threshold indicators.
    """
    gamma = private_sinr(k, powers, gains, eps_k, sigma_e_sq_k, p_total, noise_var)
    d_k = local_degeneracy(gamma_target, gamma)
    lam = weights.lambdas(len(powers.private))[k]
    prelog = 1.0 - tau_p / tau_c
    return (
        weights.alpha * prelog * math.log2(1.0 + gamma)
        - weights.beta * d_k
        - lam * float(powers.private[k])
        + weights.mu * dwpr_k
        + weights.nu * fss_k
    )


def utility_gradient(
    k: int,
    powers: PowerAllocation,
    gains: EffectiveGains,
    weights: UtilityWeights,
    tau_p: int,
    tau_c: int,
    eps_k: float,
    sigma_e_sq_k: float,
    p_total: float,
    noise_var: float,
    gamma_target: float,
) -> float:
    """Closed-form derivative of agent k's utility in its own power.

    The private SINR is linear in P_k with a P_k-free denominator, so its
    derivative is gamma/P_k and the degeneracy term differentiates to
    +beta * D_k / P_k. DWPR and FSS are piecewise constant in P_k and

    contribute nothing away from their threshold jumps. Requires P_k > 0.
    """
    p_k = float(powers.private[k])
    if p_k <= 0.0:
        raise ValueError("utility_gradient needs a strictly positive own power")
    gamma = private_sinr(k, powers, gains, eps_k, sigma_e_sq_k, p_total, noise_var)
    d_k = local_degeneracy(gamma_target, gamma)
    lam = weights.lambdas(len(powers.private))[k]
    prelog = 1.0 - tau_p / tau_c
    rate_slope = weights.alpha * prelog * gamma / (LN2 * p_k * (1.0 + gamma))
    return rate_slope + weights.beta * d_k / p_k - lam


def gradient_step(state: AgentState, grad: float, t: int, eta0: float, power_floor: float = 0.0) -> float:
    """Projected gradient update with diminishing step eta0 / (t + 1)."""
    if eta0 <= 0:
        raise ValueError("eta0 must be positive")
    if t < 0:
        raise ValueError("iteration index must be non-negative")
    return max(power_floor, state.power + eta0 / (t + 1) * grad)


def heuristic_step(
    state: AgentState,
    dwpr_k: float,
    fss_k: float,
    d_k: float,
    t: int,
    weights: UtilityWeights,
    power_floor: float = 0.0,
) -> float:
    """Metric-driven update: reward structure, adjust for degeneracy.

    As written, the degeneracy term drains power from degenerate users;
    the inverted sign releases power toward them instead.
    """
    if weights.eta0 is None:
        raise ValueError("weights.eta0 must be resolved before stepping")
    sign = -1.0 if weights.heuristic_d_sign == "as_written" else 1.0
    drift = weights.w1 * dwpr_k + weights.w2 * fss_k + sign * weights.w3 * d_k
    return max(power_floor, state.power + weights.eta0 / (t + 1) * drift)


def bs_rescale(powers: PowerAllocation, p_total: float) -> PowerAllocation:
    """Scale every power down uniformly when the allocation exceeds the budget.

    Allocations within budget pass through unchanged, so the map is
    idempotent and never scales up.
    """
    if p_total <= 0:
        raise ValueError("p_total must be positive")
    total = powers.total()
    if total <= p_total:
        return powers
    f = p_total / total
    return PowerAllocation(common=powers.common * f, private=powers.private * f)


def run_abm(
    config: SystemConfig,
    channel: ChannelRealization,
    mode: str = "gradient",
    precoders: Precoders | None = None,
    record_powers: bool = True,
) -> AbmTrace:
    """Run the full agent loop on one channel realization.

    Starts from the uniform split P_k = P_c = p_total / (K + 1) and iterates
    agent updates in Gauss-Seidel order (each agent sees its predecessors'
    fresh powers) or Jacobi order, followed by the base-station rescale.
    Stops when the largest per-user power change falls below eps_tol, when
    the system becomes feasible (only if config.stop_on_feasible is set), or
    after max_iters iterations.

    In gradient mode the drift is the closed-form utility gradient plus the
    structural steering term mu * DWPR_k + nu * FSS_k, so the structural
    weights shape the power trajectory even though their utility terms are
    flat between threshold crossings. The config must be resolved.
    """
    if mode not in ABM_MODES:
        raise ValueError(f"mode must be one of {ABM_MODES}, got {mode!r}")
    if precoders is None:
        loading = mmse_loading(
            config.K, config.p_total, config.noise_var, float(np.mean(channel.error_variance))
        )
        precoders = zf_precoders(channel.estimated_channels, loading=loading)
    gains = effective_gains(channel.estimated_channels, precoders)

    n = config.K
    p_total = config.p_total
    noise = config.noise_var
    gamma_tar = config.gamma_target
    theta = config.theta
    eps_tol = config.eps_tol
    if theta is None or eps_tol is None or config.eps is None:
        raise ValueError("config must be resolved before running the agent loop")
    w = config.weights
    eta0 = w.eta0
    lam = w.lambdas(n)
    eps = config.sic_factors()
    prelog = config.prelog
    floor = 1e-6 * p_total / (n + 1)
    gauss_seidel = config.update_order == "gauss_seidel"
    d_sign = -1.0 if w.heuristic_d_sign == "as_written" else 1.0
    gradient_mode = mode == "gradient"

    # plain-float views for the tight loop
    cross = gains.cross.tolist()
    own = gains.own.tolist()
    leak = gains.common_leak.tolist()
    floor_terms = [p_total * channel.error_variance[k] + noise for k in range(n)]
    d_ck = [stream_dissimilarity(precoders.common, precoders.private[k]) for k in range(n)]
    if n > 1:
        dmat = dissimilarity_matrix(precoders.private)
        fss = [float(np.sum(dmat[k] < config.delta) - 1) / (n - 1) for k in range(n)]
    else:
        fss = [0.0]

    p_c = p_total / (n + 1)
    p = [p_total / (n + 1)] * n

    def dsys_at(p_c_val: float, p_val: list[float]) -> float:
        worst = 0.0
        for k in range(n):
            row = cross[k]
            s = 0.0
            for j in range(n):
                s += p_val[j] * row[j]
            interf = s - p_val[k] * row[k] + eps[k] * p_c_val * leak[k] + floor_terms[k]
            gamma = p_val[k] * own[k] / interf
            d_k = DEGENERACY_CAP if gamma == 0.0 else min(gamma_tar / gamma, DEGENERACY_CAP)
            if d_k > worst:
                worst = d_k
        return worst

    trace = AbmTrace(dsys_initial=dsys_at(p_c, p))
    sinr_last = [0.0] * n
    d_last = [0.0] * n
    dwpr_last = [0.0] * n

    if config.stop_on_feasible and trace.dsys_initial <= 1.0:
        trace.converged_by = "feasibility"
        trace.final_powers = PowerAllocation(common=p_c, private=np.array(p))
        trace.final_states = [AgentState(power=p[k], last_fss=fss[k]) for k in range(n)]
        return trace

    for t in range(config.max_iters):
        p_prev = p.copy()
        eta_t = eta0 / (t + 1)
        base = p_prev if not gauss_seidel else p
        new_p = p if gauss_seidel else p.copy()
        for k in range(n):
            row = cross[k]
            s = 0.0
            for j in range(n):
                s += base[j] * row[j]
            # rescale can push a power below the floor, so divide at the
            # floored value to keep the 1/P_k terms finite
            p_k = base[k] if base[k] > floor else floor
            interf = s - base[k] * row[k] + eps[k] * p_c * leak[k] + floor_terms[k]
            gamma_p = base[k] * own[k] / interf
            gamma_c = p_c * leak[k] / (s + floor_terms[k])
            d_k = DEGENERACY_CAP if gamma_p == 0.0 else min(gamma_tar / gamma_p, DEGENERACY_CAP)
            if gamma_c >= gamma_p:
                dwpr_k = 0.5 * d_ck[k] if gamma_p >= theta else 0.0
            else:
                dwpr_k = 0.5 * d_ck[k] if gamma_c >= theta else 0.0
            sinr_last[k], d_last[k], dwpr_last[k] = gamma_p, d_k, dwpr_k
            if gradient_mode:
                rate_slope = w.alpha * prelog * (own[k] / interf) / (LN2 * (1.0 + gamma_p))
                drift = rate_slope + w.beta * d_k / p_k - lam[k] + w.mu * dwpr_k + w.nu * fss[k]
            else:
                drift = w.w1 * dwpr_k + w.w2 * fss[k] + d_sign * w.w3 * d_k
            cand = base[k] + eta_t * drift
            new_p[k] = cand if cand > floor else floor
        p = new_p

        total = p_c + sum(p)
        if total > p_total:
            f = p_total / total
            p_c *= f
            p = [x * f for x in p]

        trace.dsys_per_iter.append(dsys_at(p_c, p))
        if record_powers:
            trace.powers_per_iter.append(PowerAllocation(common=p_c, private=np.array(p)))
        trace.iterations = t + 1

        if max(abs(p[k] - p_prev[k]) for k in range(n)) < eps_tol:
            trace.converged_by = "power_tolerance"
            break
        if config.stop_on_feasible and trace.dsys_per_iter[-1] <= 1.0:
            trace.converged_by = "feasibility"
            break
    else:
        trace.converged_by = "max_iters"

    trace.final_powers = PowerAllocation(common=p_c, private=np.array(p))
    trace.final_states = [
        AgentState(
            power=p[k],
            last_sinr=sinr_last[k],
            last_degeneracy=d_last[k],
            last_dwpr=dwpr_last[k],
            last_fss=fss[k],
        )
        for k in range(n)
    ]
    return trace
