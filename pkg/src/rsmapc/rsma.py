"""Rate-splitting downlink physical layer: precoders, gains, SINRs, rate.

One common stream is superimposed on K private streams. Precoding is
zero-forcing on the receive-combined estimated channels; the common beam
points at the average user direction. Gains and SINRs are evaluated at the
output of the same receive combiner the design used, with imperfect SIC and
channel-estimation residues entering as extra interference power.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class PowerAllocation:
    """Common-stream power plus per-user private powers."""

    common: float
    private: np.ndarray

    def __post_init__(self):
        self.private = np.asarray(self.private, dtype=float)
        if self.private.ndim != 1:
            raise ValueError("private powers must form a 1-D array")
        if self.common < 0 or np.any(self.private < 0):
            raise ValueError("powers must be non-negative")

    def total(self) -> float:
        return float(self.common + self.private.sum())


@dataclass
class Precoders:
    """Unit-norm beamforming directions; powers are carried separately.

    private holds one direction per row, shape (K, M_t). effective_rows keeps
    the receive-combined channel rows the zero-forcing design was built from.
    """

    private: np.ndarray
    common: np.ndarray
    effective_rows: np.ndarray = field(repr=False)

    def __post_init__(self):
        norms = np.linalg.norm(self.private, axis=1)
        if not np.allclose(norms, 1.0, atol=1e-9):
            raise ValueError("private directions must have unit norm")
        if not np.isclose(np.linalg.norm(self.common), 1.0, atol=1e-9):
            raise ValueError("common direction must have unit norm")


@dataclass
class EffectiveGains:
    """Squared channel gains seen by each user for every beam.

    Gains are measured at the output of each user's receive combiner, so
    cross[k, j] = |h_k w_j|^2 where h_k is user k's combined channel row;
    own is the diagonal and common_leak[k] = |h_k w_c|^2. Interference that
    the combiner rejects does not appear in these numbers.
    """

    own: np.ndarray
    cross: np.ndarray
    common_leak: np.ndarray


@dataclass
class SinrReport:
    """Private SINR per user, common-stream SINR per user, and their min."""

    private: np.ndarray
    common_per_user: np.ndarray

    @property
    def common(self) -> float:
        """Decodability of the common stream is set by the weakest user."""
        return float(np.min(self.common_per_user))


def mmse_loading(
    n_users: int, p_total: float, noise_var: float, mean_error_var: float = 0.0
) -> float:
    """Diagonal loading matched to the effective noise the beams will face.

    The classic regularized inverse loads the Gram matrix with K * sigma^2 /
    P_t; imperfect estimation inflates each user's effective noise by
    p_total * mean_error_var, and the loading follows. The value only takes
    effect where zero-forcing needs regularizing (see zf_precoders).
    """
    if n_users <= 0:
        raise ValueError("n_users must be positive")
    if p_total <= 0:
        raise ValueError("p_total must be positive")
    if mean_error_var < 0.0:
        raise ValueError("mean_error_var must be non-negative")
    return n_users * (noise_var + p_total * mean_error_var) / p_total


def zf_precoders(
    estimated_channels: list[np.ndarray],
    rng: np.random.Generator | None = None,
    *,
    loading: float | None = None,
) -> Precoders:
    """Zero-forcing private beams and an average-direction common beam.

    Each user's matrix channel is collapsed to a row through its leading
    left singular vector; private directions are the normalized columns of
    the right pseudo-inverse of the stacked rows. The inversion is exact
    while the stack has fewer rows than transmit antennas and is well
    conditioned. Once the row count reaches the antenna count (or the
    condition number passes 1e8) a diagonal term regularizes the Gram
    matrix: at least a small numerical ridge, or `loading` when the caller
    supplies a channel-uncertainty level to beamform against. rng is unused
    by this design and accepted for interface uniformity.
    """
    if not estimated_channels:
        raise ValueError("need at least one user channel")
    rows = []
    for h in estimated_channels:
        u, _, _ = np.linalg.svd(h, full_matrices=False)
        rows.append(u[:, 0].conj() @ h)
    h_eff = np.asarray(rows)
    n_users, m_t = h_eff.shape
    row_norms = np.linalg.norm(h_eff, axis=1)
    if np.any(row_norms == 0.0):
        raise ValueError("zero effective channel row; cannot beamform")

    gram = h_eff @ h_eff.conj().T
    if n_users >= m_t or np.linalg.cond(h_eff) > 1e8:
        ridge = 1e-6 * float(np.mean(row_norms**2))
        if loading is not None:
            ridge = max(ridge, float(loading))
        inv = np.linalg.inv(gram + ridge * np.eye(n_users))
    else:
        inv = np.linalg.inv(gram)
    cols = h_eff.conj().T @ inv
    private = (cols / np.linalg.norm(cols, axis=0)).T

    common = np.sum(h_eff.conj() / row_norms[:, None], axis=0)
    common = common / np.linalg.norm(common)
    return Precoders(private=private, common=common, effective_rows=h_eff)


def effective_gains(estimated_channels: list[np.ndarray], precoders: Precoders) -> EffectiveGains:
    """Squared combined-channel gains |h_k w_j|^2 and |h_k w_c|^2.

    h_k is the receive-combined row stored in the precoders, built from the
    same estimated channel matrices passed here (they are only checked for
    dimension agreement). Energy arriving outside a user's combining
    direction is invisible to its detector and therefore excluded.
    """
    n_users = len(estimated_channels)
    if n_users != precoders.effective_rows.shape[0]:
        raise ValueError("user count mismatch between channels and precoders")
    for h in estimated_channels:
        if h.shape[1] != precoders.effective_rows.shape[1]:
            raise ValueError("channel and precoder antenna counts disagree")
    received = precoders.effective_rows @ np.concatenate(
        [precoders.private.T, precoders.common[:, None]], axis=1
    )
    power = np.abs(received) ** 2
    cross = power[:, :n_users]
    return EffectiveGains(own=np.diag(cross).copy(), cross=cross, common_leak=power[:, n_users])


def private_sinr(
    k: int,
    powers: PowerAllocation,
    gains: EffectiveGains,
    eps_k: float,
    sigma_e_sq_k: float,
    p_total: float,
    noise_var: float,
) -> float:
    """Private-stream SINR of user k after (imperfect) common-stream SIC.

    Residual common-stream power eps_k * P_c and an estimation-error floor
    proportional to the full budget p_total stay in the denominator.
    """
    p = powers.private
    interference = float(gains.cross[k] @ p) - float(p[k] * gains.cross[k, k])
    interference += eps_k * powers.common * gains.common_leak[k]
    interference += p_total * sigma_e_sq_k + noise_var
    return float(p[k] * gains.own[k]) / interference


def common_sinr(
    k: int,
    powers: PowerAllocation,
    gains: EffectiveGains,
    sigma_e_sq_k: float,
    p_total: float,
    noise_var: float,
) -> float:
    """Common-stream SINR at user k, decoded before any private stream."""
    denom = float(gains.cross[k] @ powers.private) + p_total * sigma_e_sq_k + noise_var
    return powers.common * gains.common_leak[k] / denom


def sinr_report(
    powers: PowerAllocation,
    gains: EffectiveGains,
    eps: list[float],
    sigma_e_sq: list[float],
    p_total: float,
    noise_var: float,
) -> SinrReport:
    """All users' private and common SINRs in one pass."""
    p = powers.private
    sige = np.asarray(sigma_e_sq, dtype=float)
    eps_arr = np.asarray(eps, dtype=float)
    loaded = gains.cross @ p
    floor = p_total * sige + noise_var
    denom_p = loaded - p * np.diag(gains.cross) + eps_arr * powers.common * gains.common_leak + floor
    private = p * gains.own / denom_p
    common_per_user = powers.common * gains.common_leak / (loaded + floor)
    return SinrReport(private=private, common_per_user=common_per_user)


def sum_rate(report: SinrReport, tau_p: int, tau_c: int) -> float:
    """Pilot-overhead-scaled sum rate of the common plus all private streams."""
    if not 0 < tau_p < tau_c:
        raise ValueError("need 0 < tau_p < tau_c")
    prelog = 1.0 - tau_p / tau_c
    return prelog * float(np.log2(1.0 + report.common) + np.sum(np.log2(1.0 + report.private)))
