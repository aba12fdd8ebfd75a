"""
Channel Model
Domain types, geometry and the deterministic two-hop channel of the
fluid antenna relay (FAR): user -> port A -> (through the wall) -> port B -> BS.

All quantities are SI: meters, Hz, Watts, bits/s. Port A sits at x = 0 and
port B at x = X; users are on the ground (height 0).
"""
import logging
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .config import (
    DEFAULT_MEDIUM_FACTOR,
    DEFAULT_NOISE_POWER_W,
    DEFAULT_PATH_LOSS_EXP,
    DEFAULT_REF_GAIN,
)

logger = logging.getLogger(__name__)


class UserTerminal(BaseModel):
    """A ground user: (u_n1, u_n2) position, transmit power p_n and rate floor R_n."""

    model_config = ConfigDict(frozen=True)

    position: Tuple[float, float]
    tx_power: float
    min_rate: float

    @field_validator("tx_power")
    @classmethod
    def _positive_power(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("tx_power must be positive")
        return value

    @field_validator("min_rate")
    @classmethod
    def _positive_rate(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("min_rate must be positive")
        return value


class PortPlacement(BaseModel):
    """Free coordinates of port A (y1, z1) and port B (y2, z2)."""

    model_config = ConfigDict(frozen=True)

    y1: float
    z1: float
    y2: float
    z2: float

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.y1, self.z1, self.y2, self.z2)


class Scenario(BaseModel):
    """
    Full description of one problem instance.

    `defaults_applied` lists the radio parameters that were filled in from
    defaults when the scenario was loaded; it travels into every report.
    """

    model_config = ConfigDict(frozen=True)

    users: Tuple[UserTerminal, ...] = Field(min_length=1)
    bs_position: Tuple[float, float, float]
    wall_width: float
    y_bounds: Tuple[float, float]
    z_bounds: Tuple[float, float]
    total_bandwidth: float
    noise_power: float = DEFAULT_NOISE_POWER_W
    ref_gain: float = DEFAULT_REF_GAIN
    path_loss_exp: float = DEFAULT_PATH_LOSS_EXP
    medium_factor: float = DEFAULT_MEDIUM_FACTOR
    description: str = ""
    defaults_applied: Tuple[str, ...] = ()

    @field_validator("wall_width")
    @classmethod
    def _wall(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("wall_width must be positive")
        return value

    @field_validator("total_bandwidth")
    @classmethod
    def _bandwidth(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("total_bandwidth must be positive")
        return value

    @field_validator("noise_power")
    @classmethod
    def _noise(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("noise_power must be positive")
        return value

    @field_validator("ref_gain")
    @classmethod
    def _ref_gain(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("ref_gain must be positive")
        return value

    @field_validator("path_loss_exp")
    @classmethod
    def _alpha(cls, value: float) -> float:
        if not value >= 1:
            raise ValueError("path_loss_exp must be at least 1")
        return value

    @field_validator("medium_factor")
    @classmethod
    def _medium(cls, value: float) -> float:
        if not value > 1:
            raise ValueError("medium_factor must exceed 1")
        return value

    @model_validator(mode="after")
    def _bounds(self) -> "Scenario":
        if self.y_bounds[0] > self.y_bounds[1]:
            raise ValueError("y_bounds must satisfy Y_min <= Y_max")
        if self.z_bounds[0] > self.z_bounds[1]:
            raise ValueError("z_bounds must satisfy Z_min <= Z_max")
        return self

    @property
    def n_users(self) -> int:
        return len(self.users)

    def user_positions(self) -> np.ndarray:
        """(N, 2) array of user (u_n1, u_n2)."""
        return np.array([u.position for u in self.users], dtype=float)

    def tx_powers(self) -> np.ndarray:
        return np.array([u.tx_power for u in self.users], dtype=float)

    def min_rates(self) -> np.ndarray:
        return np.array([u.min_rate for u in self.users], dtype=float)

    def center(self) -> Tuple[float, float]:
        return (
            0.5 * (self.y_bounds[0] + self.y_bounds[1]),
            0.5 * (self.z_bounds[0] + self.z_bounds[1]),
        )

    def contains(self, placement: PortPlacement, tol: float = 0.0) -> bool:
        """Whether both ports lie inside the feasible rectangle."""
        ylo, yhi = self.y_bounds
        zlo, zhi = self.z_bounds
        return all(
            lo - tol <= v <= hi + tol
            for v, lo, hi in (
                (placement.y1, ylo, yhi),
                (placement.y2, ylo, yhi),
                (placement.z1, zlo, zhi),
                (placement.z2, zlo, zhi),
            )
        )

    def radio_parameters(self) -> dict:
        """Parameters that make a result self-describing."""
        return {
            "total_bandwidth_hz": self.total_bandwidth,
            "noise_power_w": self.noise_power,
            "ref_gain": self.ref_gain,
            "path_loss_exp": self.path_loss_exp,
            "medium_factor": self.medium_factor,
            "defaults_applied": list(self.defaults_applied),
        }

    def with_tx_power(self, tx_power: float) -> "Scenario":
        """Copy of the scenario with every user transmitting at `tx_power` Watts."""
        users = tuple(u.model_copy(update={"tx_power": tx_power}) for u in self.users)
        return self.model_copy(update={"users": users})


# Distances. Arguments broadcast, so the same code serves
# scalar evaluation and lattice sweeps.

def dist_user_to_port_a(user_x, user_y, y1, z1):
    """Distance from a ground user at (user_x, user_y, 0) to port A at (0, y1, z1)."""
    return np.sqrt(np.square(user_x) + np.square(np.subtract(y1, user_y)) + np.square(z1))


def dist_port_a_to_port_b(wall_width, y1, z1, y2, z2):
    """Distance through the wall between port A (0, y1, z1) and port B (X, y2, z2)."""
    return np.sqrt(
        np.square(wall_width) + np.square(np.subtract(y1, y2)) + np.square(np.subtract(z1, z2))
    )


def dist_port_b_to_bs(scenario: Scenario, y2, z2):
    """Distance from port B (X, y2, z2) to the BS at (s1, s2, H)."""
    s1, s2, height = scenario.bs_position
    return np.sqrt(
        np.square(scenario.wall_width - s1)
        + np.square(np.subtract(y2, s2))
        + np.square(np.subtract(z2, height))
    )


def dist_user_to_portA(user: UserTerminal, y1: float, z1: float) -> float:
    return float(dist_user_to_port_a(user.position[0], user.position[1], y1, z1))


def dist_portA_to_portB(wall_width: float, y1: float, z1: float, y2: float, z2: float) -> float:
    return float(dist_port_a_to_port_b(wall_width, y1, z1, y2, z2))


def dist_portB_to_bs(scenario: Scenario, y2: float, z2: float) -> float:
    return float(dist_port_b_to_bs(scenario, y2, z2))


def effective_lengths(scenario: Scenario, y1, z1, y2, z2) -> np.ndarray:
    """
    Effective path length d_n1 + d2/A + d3 for every user.

    Placement coordinates may be arrays of a common shape S; the result has
    shape S + (N,).
    """
    positions = scenario.user_positions()
    y1 = np.asarray(y1, dtype=float)[..., None]
    z1 = np.asarray(z1, dtype=float)[..., None]
    y2 = np.asarray(y2, dtype=float)[..., None]
    z2 = np.asarray(z2, dtype=float)[..., None]
    d1 = dist_user_to_port_a(positions[:, 0], positions[:, 1], y1, z1)
    d2 = dist_port_a_to_port_b(scenario.wall_width, y1, z1, y2, z2)
    d3 = dist_port_b_to_bs(scenario, y2, z2)
    return d1 + d2 / scenario.medium_factor + d3


def gain_from_length(scenario: Scenario, length):
    """rho0 * length^(-alpha)."""
    return scenario.ref_gain * np.power(length, -scenario.path_loss_exp)


def channel_gains(scenario: Scenario, placement: PortPlacement) -> np.ndarray:
    """Vector of effective channel gains h_n at a placement."""
    return gain_from_length(scenario, effective_lengths(scenario, *placement.as_tuple()))


def channel_gain(scenario: Scenario, user_index: int, placement: PortPlacement) -> float:
    """Effective channel gain of one user."""
    return float(channel_gains(scenario, placement)[user_index])


def snrs_from_gains(scenario: Scenario, gains) -> np.ndarray:
    """Received SNR p_n h_n / sigma^2 for every user."""
    return scenario.tx_powers() * np.asarray(gains, dtype=float) / scenario.noise_power


def spectral_efficiencies(scenario: Scenario, gains) -> np.ndarray:
    """log2(1 + SNR_n) in bits/s/Hz."""
    return np.log2(1.0 + snrs_from_gains(scenario, gains))


def achievable_rate(
    scenario: Scenario, user_index: int, placement: PortPlacement, bandwidth: float
) -> float:
    """
    Achievable rate of one user.

    Args:
        scenario: Problem instance
        user_index: 0-based user index
        placement: Port locations
        bandwidth: Allocated bandwidth in Hz (>= 0)

    Returns:
        Rate in bits/s
    """
    if bandwidth < 0:
        raise ValueError("bandwidth must be non-negative")
    efficiency = spectral_efficiencies(scenario, channel_gains(scenario, placement))[user_index]
    return float(bandwidth * efficiency)
