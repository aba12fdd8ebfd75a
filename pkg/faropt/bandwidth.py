"""
Bandwidth Allocation
Closed-form optimal bandwidth split for a fixed port placement, and a
generic LP solve of the same problem used as a cross-check.
"""
import logging
from dataclasses import dataclass
from typing import Dict, Sequence

import numpy as np
from scipy.optimize import linprog

from .errors import SolverError
from .model import PortPlacement, Scenario, channel_gains, spectral_efficiencies

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BandwidthAllocation:
    """
    Per-user bandwidths and the user k that absorbs the surplus.

    `feasible` means b_k >= 0 (every other user sits at its rate floor).
    `rate_floor_met` additionally checks that user k reaches R_k.
    """

    bandwidths: np.ndarray
    best_user: int
    sum_rate: float
    feasible: bool
    rate_floor_met: bool
    rates: np.ndarray

    @property
    def satisfies_floors(self) -> bool:
        return self.feasible and self.rate_floor_met

    def to_dict(self) -> Dict:
        return {
            "bandwidths_hz": [float(b) for b in self.bandwidths],
            "best_user": int(self.best_user),
            "sum_rate_bps": float(self.sum_rate),
            "feasible": bool(self.feasible),
            "rate_floor_met": bool(self.rate_floor_met),
        }


def best_user_index(gains: Sequence[float]) -> int:
    """
    Index of the user with the highest gain; ties go to the lowest index.

    Raises:
        ValueError: If `gains` is empty
    """
    gains = np.asarray(gains, dtype=float)
    if gains.size == 0:
        raise ValueError("no users")
    assert np.all(gains > 0), "channel gains must be positive"
    return int(np.argmax(gains))


def allocate_for_gains(scenario: Scenario, gains: Sequence[float]) -> BandwidthAllocation:
    """Closed-form allocation at a given gain vector."""
    gains = np.asarray(gains, dtype=float)
    k = best_user_index(gains)
    efficiency = spectral_efficiencies(scenario, gains)
    floors = scenario.min_rates()

    bandwidths = floors / efficiency
    bandwidths[k] = 0.0
    bandwidths[k] = scenario.total_bandwidth - bandwidths.sum()

    rates = bandwidths * efficiency
    feasible = bool(bandwidths[k] >= 0.0)
    rate_floor_met = bool(rates[k] >= floors[k] * (1.0 - 1e-9))
    return BandwidthAllocation(
        bandwidths=bandwidths,
        best_user=k,
        sum_rate=float(rates.sum()),
        feasible=feasible,
        rate_floor_met=rate_floor_met,
        rates=rates,
    )


def allocate(scenario: Scenario, placement: PortPlacement) -> BandwidthAllocation:
    """
    Optimal bandwidth allocation for a fixed placement.

    Every user except the best one gets exactly the bandwidth needed for
    its rate floor; the best user takes what is left of B.

    Args:
        scenario: Problem instance
        placement: Port locations

    Returns:
        BandwidthAllocation (infeasibility is a reported state)
    """
    return allocate_for_gains(scenario, channel_gains(scenario, placement))


def lp_oracle(scenario: Scenario, gains: Sequence[float]) -> BandwidthAllocation:
    """
    Solve the bandwidth LP with a generic simplex solver.

    Variables are bandwidth fractions x_n = b_n / B so the LP is well scaled:
    maximize sum c_n x_n  s.t.  c_n x_n >= R_n / B,  sum x_n <= 1,  x >= 0.

    Raises:
        SolverError: If the LP is reported unbounded or numerically unsolvable
    """
    gains = np.asarray(gains, dtype=float)
    n_users = gains.size
    if n_users == 0:
        raise ValueError("no users")
    efficiency = spectral_efficiencies(scenario, gains)
    floors = scenario.min_rates() / scenario.total_bandwidth

    a_ub = np.vstack([np.ones((1, n_users)), -np.diag(efficiency)])
    b_ub = np.concatenate([[1.0], -floors])
    result = linprog(
        -efficiency, A_ub=a_ub, b_ub=b_ub, bounds=[(0.0, None)] * n_users, method="highs-ds"
    )
    k = best_user_index(gains)

    if result.status == 2:
        logger.debug("bandwidth LP infeasible")
        return BandwidthAllocation(
            bandwidths=np.zeros(n_users),
            best_user=k,
            sum_rate=0.0,
            feasible=False,
            rate_floor_met=False,
            rates=np.zeros(n_users),
        )
    if result.status != 0:
        raise SolverError(
            f"bandwidth LP failed: {result.message}",
            diagnostics={"status": int(result.status), "efficiency": efficiency.tolist()},
        )

    bandwidths = np.asarray(result.x, dtype=float) * scenario.total_bandwidth
    rates = bandwidths * efficiency
    return BandwidthAllocation(
        bandwidths=bandwidths,
        best_user=k,
        sum_rate=float(rates.sum()),
        feasible=True,
        rate_floor_met=True,
        rates=rates,
    )


def equal_split(scenario: Scenario, placement: PortPlacement) -> BandwidthAllocation:
    """
    Equal bandwidth B / N for every user. Feasible iff every user reaches its floor.
    """
    gains = channel_gains(scenario, placement)
    efficiency = spectral_efficiencies(scenario, gains)
    bandwidths = np.full(scenario.n_users, scenario.total_bandwidth / scenario.n_users)
    rates = bandwidths * efficiency
    floors_met = bool(np.all(rates >= scenario.min_rates() * (1.0 - 1e-9)))
    return BandwidthAllocation(
        bandwidths=bandwidths,
        best_user=best_user_index(gains),
        sum_rate=float(rates.sum()),
        feasible=floors_met,
        rate_floor_met=floors_met,
        rates=rates,
    )
