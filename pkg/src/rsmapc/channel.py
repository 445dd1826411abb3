"""Spatially correlated MIMO channel draws and LS estimation error.

Channels follow the separable (Kronecker) correlation model
H = R_r^(1/2) G R_t^(1/2) with G iid complex normal and exponential
correlation profiles at both ends. Estimation error is injected additively,
either with the variance implied by least-squares pilot estimation or with a
fixed variance.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .config import CorrelationSpec, PilotConfig, SystemConfig


def exp_correlation_matrix(rho: float, n: int) -> np.ndarray:
    """Exponential correlation matrix with entries rho^|i-j|, shape (n, n)."""
    if not 0.0 <= rho < 1.0:
        raise ValueError(f"rho must lie in [0, 1), got {rho}")
    if n < 1:
        raise ValueError(f"matrix order must be positive, got {n}")
    idx = np.arange(n)
    return rho ** np.abs(idx[:, None] - idx[None, :])


@lru_cache(maxsize=64)
def _corr_sqrt(rho: float, n: int) -> np.ndarray:
    """Symmetric PSD square root of exp_correlation_matrix(rho, n), cached.

    Uses the eigendecomposition rather than Cholesky so the root is the
    unique symmetric one; tiny negative eigenvalues from roundoff are
    clipped to zero. The returned array is read-only.
    """
    mat = exp_correlation_matrix(rho, n)
    vals, vecs = np.linalg.eigh(mat)
    root = (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T
    root.setflags(write=False)
    return root


def sample_channel(spec: CorrelationSpec, m_r: int, m_t: int, rng: np.random.Generator) -> np.ndarray:
    """Draw one (m_r, m_t) channel with unit-variance entries and Kronecker correlation."""
    g = (rng.standard_normal((m_r, m_t)) + 1j * rng.standard_normal((m_r, m_t))) / np.sqrt(2.0)
    return _corr_sqrt(spec.rho_r, m_r) @ g @ _corr_sqrt(spec.rho_t, m_t)


def ls_estimate(
    true_channel: np.ndarray, cfg: PilotConfig, rng: np.random.Generator
) -> tuple[np.ndarray, float]:
    """Additive-error channel estimate and its per-entry error variance.

    In pilot_derived mode the variance is noise_variance / (pilot_power_per_user
    * tau_p), the LS estimator's error level under orthogonal pilots. In fixed
    mode it is taken from the config as-is. A zero variance returns the true
    channel unchanged (no rng draw).
    """
    sigma_e_sq = cfg.error_variance()
    if sigma_e_sq == 0.0:
        return true_channel.copy(), 0.0
    shape = true_channel.shape
    err = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * np.sqrt(sigma_e_sq / 2.0)
    return true_channel + err, sigma_e_sq


@dataclass
class ChannelRealization:
    """True and estimated channels of all users for one coherence block."""

    true_channels: list[np.ndarray]
    estimated_channels: list[np.ndarray]
    error_variance: list[float]

    def __post_init__(self):
        if not (len(self.true_channels) == len(self.estimated_channels) == len(self.error_variance)):
            raise ValueError("per-user lists must have equal length")


def draw_realization(config: SystemConfig, rng: np.random.Generator) -> ChannelRealization:
    """Sample one coherence block for a resolved SystemConfig.

    All true channels are drawn before any estimation error so that runs
    differing only in the error model share identical true channels when
    given identically seeded generators.
    """
    true = [
        sample_channel(config.correlation, config.M_r, config.M_t, rng) for _ in range(config.K)
    ]
    est = []
    var = []
    for h in true:
        h_hat, sigma_e_sq = ls_estimate(h, config.pilot, rng)
        est.append(h_hat)
        var.append(sigma_e_sq)
    return ChannelRealization(true, est, var)
