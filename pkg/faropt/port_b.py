"""
Port B Placement
Closed-form location of the BS-facing port: the projection of the BS's
(s2, H) onto the feasible rectangle, which minimizes the port B -> BS distance.
"""
import logging
from typing import Tuple

from .model import Scenario

logger = logging.getLogger(__name__)


def clip(value: float, lo: float, hi: float) -> float:
    """min(max(value, lo), hi)."""
    if lo > hi:
        raise ValueError("empty interval")
    return min(max(value, lo), hi)


def optimal_port_b(scenario: Scenario) -> Tuple[float, float]:
    """
    Location (y2, z2) of port B closest to the BS.

    The objective sqrt((X-s1)^2 + (y2-s2)^2 + (z2-H)^2) separates in y2 and
    z2, so each coordinate is the BS coordinate clipped to its interval.
    """
    _, s2, height = scenario.bs_position
    y2 = clip(s2, *scenario.y_bounds)
    z2 = clip(height, *scenario.z_bounds)
    logger.debug(f"port B at ({y2:.3f}, {z2:.3f})")
    return y2, z2
