"""Shared builders for tests plus the acceptance-summary reporting hook."""

import numpy as np
import pytest

from rsmapc.rsma import EffectiveGains, PowerAllocation

ACCEPTANCE_LINES = []


@pytest.fixture
def record_acceptance():
    """Collect one PASS/FAIL line per acceptance criterion for the run summary."""

    def _record(line: str):
        ACCEPTANCE_LINES.append(line)
        print(line)

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_gains(rng, n_users, own_level=4.0, cross_level=0.3, leak_level=0.5):
    """Diagonally dominant gains of the shape a zero-forcing setup produces."""
    cross = cross_level * rng.random((n_users, n_users))
    own = own_level * (0.5 + rng.random(n_users))
    cross[np.diag_indices(n_users)] = own
    return EffectiveGains(
        own=own, cross=cross, common_leak=leak_level * rng.random(n_users)
    )


def random_powers(rng, n_users, p_total):
    """A strictly interior random allocation within the budget."""
    shares = rng.dirichlet(np.ones(n_users + 1))
    scaled = 0.8 * p_total * shares
    return PowerAllocation(common=float(scaled[0]), private=scaled[1:])


def grid_minimax_dsys(gains, config, p_c, step):
    """Brute-force min-max degeneracy over a two-user private-power grid.

    Enumerates (p_1, p_2) on a square lattice inside the remaining budget,
    plus the budget-saturating face p_1 + p_2 = budget sampled at the same
    resolution, and evaluates max_k gamma_target / gamma_k directly from the
    SINR definition, independently of the bisection solver under test. The
    face must be included because every degeneracy strictly decreases when
    all private powers are scaled up together (the constant noise term is
    diluted), so the true optimum always spends the whole budget.
    """
    cfg = config if config.eps is not None else config.resolve()
    if cfg.K != 2:
        raise ValueError("grid oracle is written for exactly two users")
    p_total = cfg.p_total
    avail = p_total - p_c
    eps = np.asarray(cfg.sic_factors())
    sige = np.full(2, cfg.pilot.error_variance())
    const = eps * p_c * gains.common_leak + p_total * sige + cfg.noise_var
    gt = cfg.gamma_target

    def worst_degeneracy(p1, p2):
        with np.errstate(divide="ignore"):
            d1 = gt * (p2 * gains.cross[0, 1] + const[0]) / (p1 * gains.own[0])
            d2 = gt * (p1 * gains.cross[1, 0] + const[1]) / (p2 * gains.own[1])
        return np.maximum(d1, d2)

    axis = np.arange(0.0, avail + step, step)
    p1, p2 = np.meshgrid(axis, axis, indexing="ij")
    inside = p1 + p2 <= avail
    best = float(worst_degeneracy(p1, p2)[inside].min())
    face = np.clip(axis, 0.0, avail)
    best = min(best, float(worst_degeneracy(face, avail - face).min()))
    return best
