"""Tests for the closed-form bandwidth allocation and its LP cross-check."""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import make_scenario
from faropt.bandwidth import allocate, allocate_for_gains, best_user_index, equal_split, lp_oracle
from faropt.model import PortPlacement, channel_gains, spectral_efficiencies


def _unit_snr_scenario(n_users, bandwidth, min_rates):
    """Unit power and noise so that gains are SNRs."""
    scenario = make_scenario(
        [(50.0 + i, 10.0) for i in range(n_users)],
        tx_power=1.0,
        noise_power=1.0,
        total_bandwidth=bandwidth,
    )
    users = tuple(u.model_copy(update={"min_rate": r}) for u, r in zip(scenario.users, min_rates))
    return scenario.model_copy(update={"users": users})


def test_best_user_index():
    assert best_user_index([0.1, 0.3, 0.2]) == 1
    assert best_user_index([0.5, 0.5]) == 0
    assert best_user_index([0.7]) == 0
    with pytest.raises(ValueError, match="no users"):
        best_user_index([])


def test_two_user_closed_form():
    scenario = _unit_snr_scenario(2, 10e6, [2e6, 2e6])
    # SNR 3 and 1 give spectral efficiencies 2 and 1
    allocation = allocate_for_gains(scenario, [3.0, 1.0])
    assert allocation.best_user == 0
    assert_allclose(allocation.bandwidths, [8e6, 2e6])
    assert allocation.sum_rate == pytest.approx(18e6)
    assert allocation.feasible and allocation.rate_floor_met


def test_demand_above_budget_is_infeasible():
    scenario = _unit_snr_scenario(2, 1e6, [2e6, 2e6])
    allocation = allocate_for_gains(scenario, [3.0, 1.0])
    assert not allocation.feasible
    assert allocation.bandwidths[0] < 0
    assert not lp_oracle(scenario, [3.0, 1.0]).feasible


def test_best_user_below_its_floor_is_flagged():
    # b_k >= 0 but user k cannot reach R_k with what is left
    scenario = _unit_snr_scenario(2, 10e6, [19e6, 1e6])
    allocation = allocate_for_gains(scenario, [3.0, 1.0])
    assert allocation.feasible
    assert not allocation.rate_floor_met
    assert not allocation.satisfies_floors


def test_single_user_takes_everything(single_user):
    placement = PortPlacement(y1=3.0, z1=4.0, y2=10.0, z2=0.0)
    allocation = allocate(single_user, placement)
    efficiency = spectral_efficiencies(single_user, channel_gains(single_user, placement))
    assert_allclose(allocation.bandwidths, [single_user.total_bandwidth])
    assert allocation.sum_rate == pytest.approx(single_user.total_bandwidth * efficiency[0])
    assert allocation.feasible

    lp = lp_oracle(single_user, channel_gains(single_user, placement))
    assert_allclose(lp.bandwidths, [single_user.total_bandwidth], rtol=1e-9)


def test_closed_form_matches_lp_on_random_instances():
    rng = np.random.default_rng(7)
    bandwidth = 10e6
    checked = 0
    while checked < 500:
        n_users = int(rng.integers(1, 9))
        snr = rng.uniform(0.1, 100.0, size=n_users)
        efficiency = np.log2(1.0 + snr)
        # floors use at most 80% of the budget
        shares = rng.dirichlet(np.ones(n_users)) * 0.8 * bandwidth
        rates = shares * efficiency
        scenario = _unit_snr_scenario(n_users, bandwidth, rates)

        closed = allocate_for_gains(scenario, snr)
        lp = lp_oracle(scenario, snr)
        assert closed.feasible and lp.feasible
        assert lp.sum_rate == pytest.approx(closed.sum_rate, rel=1e-9)
        assert_allclose(lp.bandwidths, closed.bandwidths, rtol=0, atol=1e-9 * bandwidth)
        checked += 1


def test_equal_split(mirrored_pair):
    placement = PortPlacement(y1=10.0, z1=0.0, y2=10.0, z2=0.0)
    allocation = equal_split(mirrored_pair, placement)
    assert_allclose(allocation.bandwidths, [5e6, 5e6])
    assert_allclose(allocation.rates[0], allocation.rates[1], rtol=1e-12)
    assert allocation.feasible


def test_moving_bandwidth_off_the_best_user_never_helps():
    rng = np.random.default_rng(19)
    bandwidth = 10e6
    for _ in range(200):
        n_users = int(rng.integers(2, 9))
        snr = rng.uniform(0.1, 100.0, size=n_users)
        efficiency = np.log2(1.0 + snr)
        rates = rng.dirichlet(np.ones(n_users)) * 0.8 * bandwidth * efficiency
        scenario = _unit_snr_scenario(n_users, bandwidth, rates)

        allocation = allocate_for_gains(scenario, snr)
        k = allocation.best_user
        epsilon = rng.uniform(0.0, 1.0) * allocation.bandwidths[k]
        for n in range(n_users):
            if n == k:
                continue
            moved = np.array(allocation.bandwidths, dtype=float)
            moved[k] -= epsilon
            moved[n] += epsilon
            others = np.arange(n_users) != k
            assert np.all(moved[others] * efficiency[others] >= scenario.min_rates()[others] * (1.0 - 1e-9))
            assert float(moved @ efficiency) <= allocation.sum_rate * (1.0 + 1e-12)
