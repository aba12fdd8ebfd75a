"""Shared fixtures for the faropt test suite."""
import pytest

from faropt.config import SolverConfig
from faropt.model import Scenario, UserTerminal
from faropt.scenario_io import reference_scenario


def make_scenario(positions, bs=(350.0, 30.0, 30.0), min_rate=1e5, tx_power=0.1, **kwargs):
    """Scenario on a 20 m wall with [0, 20]^2 port bounds unless overridden."""
    users = tuple(UserTerminal(position=p, tx_power=tx_power, min_rate=min_rate) for p in positions)
    fields = dict(
        users=users,
        bs_position=bs,
        wall_width=20.0,
        y_bounds=(0.0, 20.0),
        z_bounds=(0.0, 20.0),
        total_bandwidth=10e6,
    )
    fields.update(kwargs)
    return Scenario(**fields)


@pytest.fixture
def reference():
    return reference_scenario()


@pytest.fixture
def single_user():
    """One user at (50, 10); the BS sits so that port B lands on (10, 0)."""
    return make_scenario([(50.0, 10.0)], bs=(350.0, 10.0, 0.0))


@pytest.fixture
def mirrored_pair():
    """Two users mirrored about y = 10 with port B on the mirror line."""
    return make_scenario([(50.0, 5.0), (50.0, 15.0)], bs=(350.0, 10.0, 0.0))


@pytest.fixture
def tight_config():
    return SolverConfig(outer_tolerance=1e-12, inner_tolerance=1e-9, max_outer_iterations=200)
