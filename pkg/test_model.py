"""Tests for the channel model."""
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from pydantic import ValidationError

from conftest import make_scenario
from faropt.model import (
    PortPlacement,
    Scenario,
    UserTerminal,
    achievable_rate,
    channel_gain,
    channel_gains,
    dist_portA_to_portB,
    dist_portB_to_bs,
    dist_user_to_portA,
    effective_lengths,
    gain_from_length,
)


def _user(x, y):
    return UserTerminal(position=(x, y), tx_power=1.0, min_rate=1.0)


def test_dist_user_to_port_a():
    assert dist_user_to_portA(_user(3.0, 0.0), 4.0, 0.0) == pytest.approx(5.0)
    assert dist_user_to_portA(_user(0.0, 7.0), 7.0, 0.0) == 0.0
    assert dist_user_to_portA(_user(1.0, 2.0), 2.0, 2.0) == pytest.approx(math.sqrt(5.0))


def test_dist_port_a_to_port_b():
    assert dist_portA_to_portB(20.0, 4.0, 6.0, 4.0, 6.0) == pytest.approx(20.0)
    assert dist_portA_to_portB(3.0, 0.0, 1.0, 4.0, 1.0) == pytest.approx(5.0)
    assert dist_portA_to_portB(2.0, 0.0, 0.0, 3.0, 6.0) == pytest.approx(7.0)


def test_dist_port_b_to_bs():
    reference = make_scenario([(100.0, 100.0)])
    assert dist_portB_to_bs(reference, 20.0, 20.0) == pytest.approx(math.sqrt(109100.0))

    coincident = make_scenario([(100.0, 100.0)], bs=(20.0, 7.0, 3.0))
    assert dist_portB_to_bs(coincident, 7.0, 3.0) == 0.0

    # zero wall width only exercises the formula; Scenario itself rejects it
    flat = Scenario.model_construct(wall_width=0.0, bs_position=(5.0, 0.0, 0.0))
    assert dist_portB_to_bs(flat, 0.0, 0.0) == pytest.approx(5.0)


def _unit_scenario(**kwargs):
    # user 3 m from port A, 3 m wall with A = 3, BS 6 m behind port B: L = 3 + 1 + 6
    fields = dict(bs=(9.0, 0.0, 0.0), wall_width=3.0, ref_gain=1.0, medium_factor=3.0, tx_power=1.0)
    fields.update(kwargs)
    return make_scenario([(3.0, 0.0)], **fields)


def test_channel_gain_from_effective_length():
    scenario = _unit_scenario()
    placement = PortPlacement(y1=0.0, z1=0.0, y2=0.0, z2=0.0)
    assert_allclose(effective_lengths(scenario, 0.0, 0.0, 0.0, 0.0), [10.0])
    assert channel_gain(scenario, 0, placement) == pytest.approx(0.01)
    assert gain_from_length(scenario, 1.0) == scenario.ref_gain


def test_channel_gain_matches_direct_evaluation():
    scenario = make_scenario([(100.0, 100.0)])
    placement = PortPlacement(y1=10.0, z1=10.0, y2=10.0, z2=10.0)
    d1 = math.sqrt(100.0**2 + 90.0**2 + 10.0**2)
    d2 = 20.0
    d3 = math.sqrt(330.0**2 + 20.0**2 + 20.0**2)
    expected = 1e-4 * (d1 + d2 / 3.0 + d3) ** -2.0
    assert channel_gain(scenario, 0, placement) == pytest.approx(expected, rel=1e-12)


def test_effective_lengths_broadcast_over_placements():
    scenario = make_scenario([(100.0, 100.0), (40.0, 250.0)])
    y1 = np.array([[0.0, 5.0], [10.0, 20.0]])
    lengths = effective_lengths(scenario, y1, 0.0, 20.0, 20.0)
    assert lengths.shape == (2, 2, 2)
    single = channel_gains(scenario, PortPlacement(y1=5.0, z1=0.0, y2=20.0, z2=20.0))
    assert_allclose(gain_from_length(scenario, lengths[0, 1]), single)


def test_achievable_rate():
    placement = PortPlacement(y1=0.0, z1=0.0, y2=0.0, z2=0.0)
    # gain 0.01 at unit power: noise 0.01 gives SNR 1, noise 0.01/3 gives SNR 3
    assert achievable_rate(_unit_scenario(noise_power=0.01), 0, placement, 1.0) == pytest.approx(1.0)
    assert achievable_rate(_unit_scenario(noise_power=0.01 / 3.0), 0, placement, 1e7) == pytest.approx(2e7)
    assert achievable_rate(_unit_scenario(noise_power=0.01), 0, placement, 0.0) == 0.0
    with pytest.raises(ValueError):
        achievable_rate(_unit_scenario(noise_power=0.01), 0, placement, -1.0)


def test_scenario_invariants():
    with pytest.raises(ValidationError, match="medium_factor must exceed 1"):
        make_scenario([(1.0, 1.0)], medium_factor=0.5)
    with pytest.raises(ValidationError):
        make_scenario([(1.0, 1.0)], y_bounds=(5.0, 1.0))
    with pytest.raises(ValidationError):
        make_scenario([])
    with pytest.raises(ValidationError):
        UserTerminal(position=(0.0, 0.0), tx_power=0.0, min_rate=1.0)


def test_scenario_helpers(reference):
    assert reference.center() == (10.0, 10.0)
    assert reference.contains(PortPlacement(y1=0.0, z1=20.0, y2=10.0, z2=10.0))
    assert not reference.contains(PortPlacement(y1=-0.1, z1=0.0, y2=10.0, z2=10.0))
    louder = reference.with_tx_power(1.0)
    assert_allclose(louder.tx_powers(), np.ones(reference.n_users))
    assert_allclose(louder.user_positions(), reference.user_positions())


def test_gain_invariant_under_reflection():
    rng = np.random.default_rng(21)
    for _ in range(200):
        users = [tuple(rng.uniform(0.0, 300.0, size=2)) for _ in range(3)]
        bs = (rng.uniform(30.0, 500.0), rng.uniform(-50.0, 100.0), rng.uniform(0.0, 50.0))
        y1, z1, y2, z2 = rng.uniform(0.0, 20.0, size=4)
        axis = rng.uniform(-100.0, 100.0)

        scenario = make_scenario(users, bs=bs)
        mirrored = make_scenario(
            [(x, 2.0 * axis - y) for x, y in users],
            bs=(bs[0], 2.0 * axis - bs[1], bs[2]),
            y_bounds=(2.0 * axis - 20.0, 2.0 * axis),
        )
        placement = PortPlacement(y1=y1, z1=z1, y2=y2, z2=z2)
        reflected = PortPlacement(y1=2.0 * axis - y1, z1=z1, y2=2.0 * axis - y2, z2=z2)
        assert_allclose(channel_gains(mirrored, reflected), channel_gains(scenario, placement), rtol=1e-9)


def test_gain_strictly_decreasing_in_each_distance():
    placement = PortPlacement(y1=10.0, z1=5.0, y2=12.0, z2=8.0)
    base = make_scenario([(100.0, 100.0)])
    gain = channel_gain(base, 0, placement)
    assert gain > 0

    # user farther from the wall: only d1 grows
    farther_user = make_scenario([(101.0, 100.0)])
    assert channel_gain(farther_user, 0, placement) < gain

    # thicker wall with the BS shifted by the same amount: only d2 grows
    thicker = make_scenario([(100.0, 100.0)], wall_width=21.0, bs=(351.0, 30.0, 30.0))
    assert dist_portB_to_bs(thicker, 12.0, 8.0) == pytest.approx(dist_portB_to_bs(base, 12.0, 8.0))
    assert channel_gain(thicker, 0, placement) < gain

    # BS farther away: only d3 grows
    farther_bs = make_scenario([(100.0, 100.0)], bs=(351.0, 30.0, 30.0))
    assert channel_gain(farther_bs, 0, placement) < gain

    lengths = np.linspace(1.0, 1000.0, 500)
    assert np.all(np.diff(gain_from_length(base, lengths)) < 0)


def test_rate_is_linear_in_bandwidth(reference):
    rng = np.random.default_rng(4)
    for _ in range(100):
        y1, z1, y2, z2 = rng.uniform(0.0, 20.0, size=4)
        placement = PortPlacement(y1=y1, z1=z1, y2=y2, z2=z2)
        n = int(rng.integers(reference.n_users))
        b1, b2 = rng.uniform(0.0, 5e6, size=2)
        combined = achievable_rate(reference, n, placement, b1 + b2)
        split = achievable_rate(reference, n, placement, b1) + achievable_rate(reference, n, placement, b2)
        assert split == pytest.approx(combined, rel=1e-12)


def test_distance_lower_bounds_on_random_placements():
    rng = np.random.default_rng(8)
    for _ in range(500):
        wall = rng.uniform(0.5, 50.0)
        bs = (rng.uniform(-200.0, 600.0), rng.uniform(-100.0, 100.0), rng.uniform(0.0, 60.0))
        scenario = make_scenario([(100.0, 100.0)], wall_width=wall, bs=bs)
        y1, z1, y2, z2 = rng.uniform(0.0, 20.0, size=4)
        assert dist_portA_to_portB(wall, y1, z1, y2, z2) >= wall
        assert dist_portB_to_bs(scenario, y2, z2) >= abs(wall - bs[0])
