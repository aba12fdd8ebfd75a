"""
Grid Oracle
Exhaustive lattice search over port locations, used as ground truth for the
SCA pipeline. Lattices are anchored at (Y_min, Z_min), include both end
points, and refine by halving so a finer lattice contains the coarser one.
"""
import logging
import math
import time
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .bandwidth import allocate
from .config import SolverConfig
from .model import PortPlacement, Scenario, effective_lengths, gain_from_length, spectral_efficiencies
from .orchestrator import FarSolver, Scheme, SolveReport
from .port_b import optimal_port_b

logger = logging.getLogger(__name__)

MAX_GRID_POINTS = 10_000_000


@dataclass(frozen=True)
class OracleResult:
    """Best lattice point found and how much of the lattice was feasible."""

    grid_resolution: float
    best_point: Optional[PortPlacement]
    best_sum_rate: float
    evaluated_points: int
    feasible_fraction: float
    joint: bool = False

    @property
    def found(self) -> bool:
        return self.best_point is not None

    def to_dict(self) -> Dict:
        return {
            "grid_resolution_m": self.grid_resolution,
            "best_point": self.best_point.model_dump() if self.best_point else None,
            "best_sum_rate_bps": self.best_sum_rate,
            "evaluated_points": self.evaluated_points,
            "feasible_fraction": self.feasible_fraction,
            "joint": self.joint,
        }


def lattice(lo: float, hi: float, resolution: float) -> np.ndarray:
    """Points lo + i * resolution up to hi, with hi itself always included."""
    if not resolution > 0:
        raise ValueError("resolution must be positive")
    count = int(math.floor((hi - lo) / resolution + 1e-9)) + 1
    points = lo + np.arange(count) * resolution
    points = points[points <= hi]
    if points.size == 0 or points[-1] < hi:
        points = np.append(points, hi)
    return points


def lattice_sum_rates(scenario: Scenario, y1, z1, y2, z2) -> Tuple[np.ndarray, np.ndarray]:
    """
    Closed-form sum rate (best user absorbs the surplus) at many placements.

    Returns:
        (sum rates, admissible mask) with the broadcast shape of the inputs;
        admissible means b_k >= 0 and every user meets its floor
    """
    lengths = effective_lengths(scenario, y1, z1, y2, z2)
    gains = gain_from_length(scenario, lengths)
    efficiency = spectral_efficiencies(scenario, gains)
    floors = scenario.min_rates()

    k = np.argmax(gains, axis=-1)
    is_best = np.arange(scenario.n_users) == k[..., None]
    pinned_bandwidth = np.where(is_best, 0.0, floors / efficiency)
    pinned_rate = np.sum(pinned_bandwidth * efficiency, axis=-1)
    leftover = scenario.total_bandwidth - np.sum(pinned_bandwidth, axis=-1)
    best_rate = leftover * np.take_along_axis(efficiency, k[..., None], axis=-1)[..., 0]

    admissible = (leftover >= 0.0) & (best_rate >= floors[k] * (1.0 - 1e-9))
    return pinned_rate + best_rate, admissible


def _search(scenario: Scenario, axes: Sequence[np.ndarray], resolution: float, joint: bool) -> OracleResult:
    y1s, z1s, y2s, z2s = axes
    total = int(np.prod([a.size for a in axes]))
    if total > MAX_GRID_POINTS:
        dims = 4 if joint else 2
        suggested = resolution * (total / MAX_GRID_POINTS) ** (1.0 / dims)
        raise ValueError(
            f"lattice has {total} points (limit {MAX_GRID_POINTS}); try resolution >= {suggested:.3g} m"
        )

    started = time.perf_counter()
    # lexicographic order (y1, z1, y2, z2): outer loop on y1, 'ij' mesh for the rest
    z1g, y2g, z2g = (a.ravel() for a in np.meshgrid(z1s, y2s, z2s, indexing="ij"))
    best_value = -math.inf
    best_index = None
    feasible = 0
    for y1 in y1s:
        rates, admissible = lattice_sum_rates(scenario, y1, z1g, y2g, z2g)
        feasible += int(np.count_nonzero(admissible))
        if not admissible.any():
            continue
        masked = np.where(admissible, rates, -math.inf)
        j = int(np.argmax(masked))
        if masked[j] > best_value:
            best_value = float(masked[j])
            best_index = (float(y1), float(z1g[j]), float(y2g[j]), float(z2g[j]))

    if best_index is None:
        best_point, best_rate = None, math.nan
    else:
        best_point = PortPlacement(y1=best_index[0], z1=best_index[1], y2=best_index[2], z2=best_index[3])
        best_rate = allocate(scenario, best_point).sum_rate

    logger.info(
        f"lattice search: {total} points at {resolution} m, {feasible / total:.1%} feasible, "
        f"{(time.perf_counter() - started):.2f}s"
    )
    return OracleResult(
        grid_resolution=resolution,
        best_point=best_point,
        best_sum_rate=best_rate,
        evaluated_points=total,
        feasible_fraction=feasible / total,
        joint=joint,
    )


def grid_2d(scenario: Scenario, y2: float, z2: float, resolution: float) -> OracleResult:
    """Search port A over the lattice with port B held at (y2, z2)."""
    axes = (
        lattice(*scenario.y_bounds, resolution),
        lattice(*scenario.z_bounds, resolution),
        np.array([float(y2)]),
        np.array([float(z2)]),
    )
    return _search(scenario, axes, resolution, joint=False)


def grid_4d(scenario: Scenario, resolution: float) -> OracleResult:
    """Search both ports jointly over the lattice (keep resolution coarse, >= 1 m)."""
    ys = lattice(*scenario.y_bounds, resolution)
    zs = lattice(*scenario.z_bounds, resolution)
    return _search(scenario, (ys, zs, ys, zs), resolution, joint=True)


def decoupling_gap(scenario: Scenario, resolution: float = 1.0, config: Optional[SolverConfig] = None) -> Dict:
    """
    How much the joint lattice search beats the decoupled pipeline
    (port B in closed form, port A by SCA).
    """
    joint = grid_4d(scenario, resolution)
    report = FarSolver(scenario, config).solve()
    gap = math.nan
    if joint.found and report.feasible and report.sum_rate > 0:
        gap = (joint.best_sum_rate - report.sum_rate) / report.sum_rate
    return {
        "joint": joint,
        "decoupled_sum_rate": report.sum_rate,
        "decoupled_placement": report.placement,
        "relative_gap": gap,
    }


def oracle_report(scenario: Scenario, resolution: float = 0.5) -> SolveReport:
    """Lattice search for port A (port B in closed form) packaged as a SolveReport."""
    started = time.perf_counter()
    y2, z2 = optimal_port_b(scenario)
    result = grid_2d(scenario, y2, z2, resolution)
    placement = result.best_point
    notes = [f"lattice resolution {resolution} m"]
    if placement is None:
        yc, zc = scenario.center()
        placement = PortPlacement(y1=yc, z1=zc, y2=y2, z2=z2)
        notes.append("no feasible lattice point")
    allocation = allocate(scenario, placement)
    rates = np.asarray(allocation.rates, dtype=float)
    return SolveReport(
        placement=placement,
        allocation=allocation,
        per_user_rates=rates,
        sum_rate=float(rates.sum()),
        chosen_k=allocation.best_user,
        scheme=Scheme.ORACLE,
        feasible=result.found and allocation.satisfies_floors,
        runtime_ms=(time.perf_counter() - started) * 1000.0,
        notes=notes,
        parameters=scenario.radio_parameters(),
    )
