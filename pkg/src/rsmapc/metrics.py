"""Degeneracy and structural-diversity metrics.

Degeneracy measures how far a user sits from its SINR target (values above 1
mean the target is missed). DWPR scores how much of a user's qualifying
stream set points in directions unlike its best stream; FSS measures how
substitutable beamforming directions are within a tolerance delta. Both
structural metrics depend on directions only through the scale-invariant
dissimilarity 1 - |<a, b>|^2 / (|a|^2 |b|^2).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .rsma import Precoders

DEGENERACY_CAP = 1e12


def local_degeneracy(gamma_target: float, gamma_achieved: float, cap: float = DEGENERACY_CAP) -> float:
    """Target-to-achieved SINR ratio, capped so downstream arithmetic stays finite."""
    if gamma_target <= 0:
        raise ValueError(f"gamma_target must be positive, got {gamma_target}")
    if gamma_achieved < 0:
        raise ValueError(f"gamma_achieved must be non-negative, got {gamma_achieved}")
    if gamma_achieved == 0.0:
        return cap
    return min(gamma_target / gamma_achieved, cap)


def system_degeneracy(per_user: list[float] | np.ndarray) -> float:
    """Worst per-user degeneracy; the system is feasible iff this is <= 1."""
    arr = np.asarray(per_user, dtype=float)
    if arr.size == 0:
        raise ValueError("need at least one user")
    return float(arr.max())


@dataclass
class DegeneracyRecord:
    """Per-user degeneracies with their max and the implied feasibility flag."""

    per_user: np.ndarray
    dsys: float
    feasible: bool


def degeneracy_record(gamma_target: float, private_sinrs: np.ndarray, cap: float = DEGENERACY_CAP) -> DegeneracyRecord:
    """Build a DegeneracyRecord from all users' private SINRs."""
    per_user = np.array([local_degeneracy(gamma_target, float(g), cap) for g in private_sinrs])
    dsys = system_degeneracy(per_user)
    return DegeneracyRecord(per_user=per_user, dsys=dsys, feasible=dsys <= 1.0)


def stream_dissimilarity(w_a: np.ndarray, w_b: np.ndarray) -> float:
    """1 - squared normalized inner product; 0 for aligned, 1 for orthogonal."""
    na = np.linalg.norm(w_a)
    nb = np.linalg.norm(w_b)
    if na == 0.0 or nb == 0.0:
        raise ValueError("directions must be non-zero")
    overlap = np.abs(np.vdot(w_a, w_b)) ** 2 / (na**2 * nb**2)
    return float(np.clip(1.0 - overlap, 0.0, 1.0))


def dissimilarity_matrix(directions: np.ndarray) -> np.ndarray:
    """Pairwise stream dissimilarities for unit-norm direction rows."""
    overlap = np.abs(directions @ directions.conj().T) ** 2
    norms = np.sum(np.abs(directions) ** 2, axis=1)
    return np.clip(1.0 - overlap / np.outer(norms, norms), 0.0, 1.0)


@dataclass
class StreamQoS:
    """One stream as seen by one user: integer id, achieved QoS, beam direction."""

    stream_id: int
    qos: float
    direction: np.ndarray


def dwpr(streams: list[StreamQoS], theta: float) -> float:
    """Degeneracy-weighted path redundancy of a stream set.

    Averages, over all streams, the dissimilarity to the highest-QoS stream
    counted only when the stream clears the threshold theta. Ties for the
    best stream go to the lowest stream id. Lies in [0, 1]; adding a
    below-threshold stream can only dilute the value.
    """
    if not streams:
        raise ValueError("need at least one stream")
    best = min(streams, key=lambda s: (-s.qos, s.stream_id))
    acc = 0.0
    for s in streams:
        if s.qos >= theta:
            acc += stream_dissimilarity(s.direction, best.direction)
    return acc / len(streams)


def pairwise_fss(entities: list[np.ndarray], delta: float) -> float:
    """Fraction of unordered direction pairs that are near-substitutable.

    A pair counts when its dissimilarity is below delta. With fewer than two
    entities there are no pairs and the score is 0 (a degenerate input).
    """
    n = len(entities)
    if n < 2:
        warnings.warn("pairwise_fss needs at least two entities; returning 0", stacklevel=2)
        return 0.0
    hits = 0
    for i in range(n):
        for j in range(i + 1, n):
            if stream_dissimilarity(entities[i], entities[j]) < delta:
                hits += 1
    return hits / (n * (n - 1) // 2)


def local_fss(k: int, precoders: Precoders, delta: float) -> float:
    """Fraction of other users whose private beam could stand in for user k's.

    Zero for a single-user system, where no substitute exists by definition.
    """
    n_users = precoders.private.shape[0]
    if not 0 <= k < n_users:
        raise ValueError(f"user index {k} out of range for {n_users} users")
    if n_users == 1:
        return 0.0
    w_k = precoders.private[k]
    hits = sum(
        1
        for j in range(n_users)
        if j != k and stream_dissimilarity(w_k, precoders.private[j]) < delta
    )
    return hits / (n_users - 1)
