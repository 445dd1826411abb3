"""Configuration types shared across the simulator.

Everything downstream (channel draws, precoding, agents, solvers, sweeps)
reads from a single SystemConfig. Fields left as None are filled in by
SystemConfig.resolve(), which applies the impairment presets and the
scale-dependent defaults (budget-derived step sizes, pilot powers).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace

ERROR_MODES = ("pilot_derived", "fixed")
IMPAIRMENTS = ("ideal", "practical")
HEURISTIC_D_SIGNS = ("as_written", "inverted")
UPDATE_ORDERS = ("gauss_seidel", "jacobi")


@dataclass
class CorrelationSpec:
    """Exponential antenna-correlation coefficients at both ends of the link."""

    rho_t: float = 0.5
    rho_r: float = 0.3

    def __post_init__(self):
        for name in ("rho_t", "rho_r"):
            val = getattr(self, name)
            if not 0.0 <= val < 1.0:
                raise ValueError(f"{name} must lie in [0, 1), got {val}")


@dataclass
class PilotConfig:
    """Pilot-phase bookkeeping: frame split and estimation-error model.

    error_mode "pilot_derived" sets the estimation-error variance to
    noise_variance / (pilot_power_per_user * tau_p); "fixed" uses
    fixed_error_variance directly. None fields defer to SystemConfig.resolve().
    """

    tau_c: int = 200
    tau_p: int | None = None
    pilot_power_per_user: float | None = None
    noise_variance: float | None = None
    error_mode: str | None = None
    fixed_error_variance: float | None = None

    def __post_init__(self):
        if self.tau_c < 2:
            raise ValueError(f"tau_c must be at least 2, got {self.tau_c}")
        if self.tau_p is not None:
            if int(self.tau_p) != self.tau_p or self.tau_p < 1:
                raise ValueError(f"tau_p must be a positive integer, got {self.tau_p}")
            if self.tau_p >= self.tau_c:
                raise ValueError(f"tau_p ({self.tau_p}) must be smaller than tau_c ({self.tau_c})")
        if self.pilot_power_per_user is not None and self.pilot_power_per_user <= 0:
            raise ValueError("pilot_power_per_user must be positive")
        if self.noise_variance is not None and self.noise_variance <= 0:
            raise ValueError("noise_variance must be positive")
        if self.error_mode is not None and self.error_mode not in ERROR_MODES:
            raise ValueError(f"error_mode must be one of {ERROR_MODES}, got {self.error_mode!r}")
        if self.fixed_error_variance is not None and self.fixed_error_variance < 0:
            raise ValueError("fixed_error_variance must be non-negative")

    def error_variance(self) -> float:
        """Per-entry estimation-error variance implied by this (resolved) config."""
        if self.error_mode == "fixed":
            if self.fixed_error_variance is None:
                raise ValueError("fixed error mode needs fixed_error_variance")
            return float(self.fixed_error_variance)
        if self.error_mode == "pilot_derived":
            if self.pilot_power_per_user is None or self.noise_variance is None or self.tau_p is None:
                raise ValueError("pilot_derived error mode needs pilot power, noise variance and tau_p")
            return float(self.noise_variance / (self.pilot_power_per_user * self.tau_p))
        raise ValueError("error_mode is unresolved; call SystemConfig.resolve() first")


@dataclass
class UtilityWeights:
    """Weights of the per-agent utility and of both power-update rules.

    lambda_k may be a scalar (broadcast to all users) or a length-K list.
    eta0 is the base step size; None means 0.1 * p_total / (K + 1).
    w1..w3 weight the heuristic update's DWPR, FSS and degeneracy terms;
    heuristic_d_sign flips the degeneracy term ("inverted" releases power
    toward high-degeneracy users instead of away from them).
    """

    alpha: float = 1.0
    beta: float = 2.0
    lambda_k: float | list[float] = 0.01
    mu: float = 0.5
    nu: float = 0.5
    eta0: float | None = None
    w1: float = 1.0 / 3.0
    w2: float = 1.0 / 3.0
    w3: float = 1.0 / 3.0
    heuristic_d_sign: str = "as_written"

    def __post_init__(self):
        if self.heuristic_d_sign not in HEURISTIC_D_SIGNS:
            raise ValueError(
                f"heuristic_d_sign must be one of {HEURISTIC_D_SIGNS}, got {self.heuristic_d_sign!r}"
            )
        if self.eta0 is not None and self.eta0 <= 0:
            raise ValueError("eta0 must be positive")
        for name in ("w1", "w2", "w3"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if abs(self.w1 + self.w2 + self.w3 - 1.0) > 1e-9:
            raise ValueError("heuristic weights w1 + w2 + w3 must sum to 1")

    def lambdas(self, n_users: int) -> list[float]:
        """Per-user price coefficients, broadcasting a scalar if needed."""
        if isinstance(self.lambda_k, (int, float)):
            return [float(self.lambda_k)] * n_users
        lam = [float(x) for x in self.lambda_k]
        if len(lam) != n_users:
            raise ValueError(f"lambda_k has {len(lam)} entries for {n_users} users")
        return lam


@dataclass
class BenchmarkWeights:
    """Penalty/bonus weights of the centralized benchmark objective."""

    beta: float = 2.0
    lambda1: float = 0.5
    lambda2: float = 0.5


@dataclass
class SystemConfig:
    """Full description of one simulated system.

    snr_db fixes the downlink budget through p_total = noise_var * 10^(snr_db/10).
    impairment "ideal" forces zero estimation error and perfect SIC; "practical"
    defaults to a fixed estimation-error variance of 0.008 and residual SIC factor
    0.1, both overridable. eps is the per-user residual SIC factor (scalar
    broadcast or length-K list). theta is the QoS threshold used by the DWPR
    metric and defaults to the linear SINR target. eps_tol is the power-change
    stopping tolerance of the agent loop and defaults to 1e-4 * p_total.
    """

    K: int = 2
    M_t: int = 8
    M_r: int = 2
    correlation: CorrelationSpec = field(default_factory=CorrelationSpec)
    pilot: PilotConfig = field(default_factory=PilotConfig)
    snr_db: float = 15.0
    noise_var: float = 1.0
    gamma_target_db: float = 5.0
    eps: float | list[float] | None = None
    weights: UtilityWeights = field(default_factory=UtilityWeights)
    benchmark_weights: BenchmarkWeights = field(default_factory=BenchmarkWeights)
    theta: float | None = None
    delta: float = 0.8
    eps_tol: float | None = None
    max_iters: int = 200
    trials: int = 1000
    seed: int = 0
    impairment: str = "ideal"
    stop_on_feasible: bool = False
    update_order: str = "gauss_seidel"

    def __post_init__(self):
        if self.K < 1:
            raise ValueError(f"K must be at least 1, got {self.K}")
        if self.M_t < 1 or self.M_r < 1:
            raise ValueError("antenna counts must be positive")
        if self.noise_var <= 0:
            raise ValueError("noise_var must be positive")
        if not 0.0 < self.delta <= 1.0:
            raise ValueError(f"delta must lie in (0, 1], got {self.delta}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.impairment not in IMPAIRMENTS:
            raise ValueError(f"impairment must be one of {IMPAIRMENTS}, got {self.impairment!r}")
        if self.update_order not in UPDATE_ORDERS:
            raise ValueError(f"update_order must be one of {UPDATE_ORDERS}, got {self.update_order!r}")
        if self.eps_tol is not None and self.eps_tol <= 0:
            raise ValueError("eps_tol must be positive")
        if self.theta is not None and self.theta <= 0:
            raise ValueError("theta must be positive")

    @property
    def p_total(self) -> float:
        """Downlink power budget implied by the SNR convention."""
        return self.noise_var * 10.0 ** (self.snr_db / 10.0)

    @property
    def gamma_target(self) -> float:
        """Linear per-user SINR target."""
        return 10.0 ** (self.gamma_target_db / 10.0)

    @property
    def prelog(self) -> float:
        """Pilot-overhead rate factor 1 - tau_p / tau_c (resolved configs only)."""
        if self.pilot.tau_p is None:
            raise ValueError("tau_p is unresolved; call resolve() first")
        return 1.0 - self.pilot.tau_p / self.pilot.tau_c

    def sic_factors(self) -> list[float]:
        """Per-user residual SIC factors (resolved configs only)."""
        if self.eps is None:
            raise ValueError("eps is unresolved; call resolve() first")
        if isinstance(self.eps, (int, float)):
            return [float(self.eps)] * self.K
        eps = [float(x) for x in self.eps]
        if len(eps) != self.K:
            raise ValueError(f"eps has {len(eps)} entries for K={self.K} users")
        return eps

    def resolve(self) -> "SystemConfig":
        """Return a copy with every deferred field made concrete.

        Resolution order: pilot frame defaults, impairment presets (ideal
        forces zero error and perfect SIC; practical fills unset values with
        fixed variance 0.008 and residual factor 0.1), then budget-derived
        defaults for step size, QoS threshold and stopping tolerance.
        """
        p_tot = self.p_total
        pilot = replace(
            self.pilot,
            tau_p=self.pilot.tau_p if self.pilot.tau_p is not None else self.K,
            noise_variance=(
                self.pilot.noise_variance if self.pilot.noise_variance is not None else self.noise_var
            ),
        )
        if pilot.pilot_power_per_user is None:
            pilot = replace(pilot, pilot_power_per_user=p_tot / self.K)
        if pilot.tau_p < self.K:
            raise ValueError(f"tau_p ({pilot.tau_p}) must cover all K={self.K} users with orthogonal pilots")

        eps = self.eps
        if isinstance(eps, list) and len(eps) != self.K:
            raise ValueError(f"eps has {len(eps)} entries for K={self.K} users")
        if isinstance(eps, list):
            for val in eps:
                if not 0.0 <= val <= 1.0:
                    raise ValueError(f"residual SIC factors must lie in [0, 1], got {val}")
        if self.impairment == "ideal":
            pilot = replace(pilot, error_mode="fixed", fixed_error_variance=0.0)
            eps = 0.0
        else:
            if pilot.error_mode is None:
                pilot = replace(pilot, error_mode="fixed")
            if pilot.error_mode == "fixed" and pilot.fixed_error_variance is None:
                pilot = replace(pilot, fixed_error_variance=0.008)
            if eps is None:
                eps = 0.1

        eps_list = eps if isinstance(eps, list) else [float(eps)] * self.K
        if len(eps_list) != self.K:
            raise ValueError(f"eps has {len(eps_list)} entries for K={self.K} users")
        for val in eps_list:
            if not 0.0 <= val <= 1.0:
                raise ValueError(f"residual SIC factors must lie in [0, 1], got {val}")

        weights = self.weights
        if weights.eta0 is None:
            weights = replace(weights, eta0=0.1 * p_tot / (self.K + 1))
        weights.lambdas(self.K)

        return replace(
            self,
            pilot=pilot,
            eps=[float(x) for x in eps_list],
            weights=weights,
            theta=self.theta if self.theta is not None else self.gamma_target,
            eps_tol=self.eps_tol if self.eps_tol is not None else 1e-4 * p_tot,
        )

    def to_dict(self) -> dict:
        """Plain-dict form with the field names used by JSON config files."""
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "SystemConfig":
        """Build a config from a plain dict, rejecting unknown keys."""
        data = dict(data)
        nested = {
            "correlation": CorrelationSpec,
            "pilot": PilotConfig,
            "weights": UtilityWeights,
            "benchmark_weights": BenchmarkWeights,
        }
        kwargs = {}
        for key, sub_cls in nested.items():
            if key in data:
                sub = data.pop(key)
                if isinstance(sub, dict):
                    unknown = set(sub) - {f for f in sub_cls.__dataclass_fields__}
                    if unknown:
                        raise ValueError(f"unknown {key} fields: {sorted(unknown)}")
                    sub = sub_cls(**sub)
                kwargs[key] = sub
        unknown = set(data) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        kwargs.update(data)
        return cls(**kwargs)


def load_config(path: str) -> SystemConfig:
    """Read a SystemConfig from a JSON file."""
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"config file {path} must hold a JSON object")
    return SystemConfig.from_dict(data)
