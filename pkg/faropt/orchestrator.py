"""
Solver Pipeline
Alternating algorithm: port B in closed form, then for every hypothesis k a
multi-start SCA over port A, then the best k and the closed-form bandwidth.
Also the two comparison schemes (center location, equal bandwidth).
"""
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

from .bandwidth import BandwidthAllocation, allocate, equal_split
from .config import SolverConfig
from .model import PortPlacement, Scenario
from .port_b import optimal_port_b
from .sca_engine import ScaEngine, ScaTrace, Termination, start_points

logger = logging.getLogger(__name__)


class Scheme(str, Enum):
    PROPOSED = "proposed"
    FIXED_LOCATION = "fixed-location"
    EQUAL_BANDWIDTH = "equal-bandwidth"
    ORACLE = "oracle"


@dataclass
class SolveReport:
    """Outcome of one scheme on one scenario."""

    placement: PortPlacement
    allocation: BandwidthAllocation
    per_user_rates: np.ndarray
    sum_rate: float
    chosen_k: int
    scheme: Scheme
    feasible: bool
    runtime_ms: float = 0.0
    iterations: int = 0
    traces: Dict[Tuple[Optional[int], int], ScaTrace] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)
    parameters: Dict = field(default_factory=dict)

    def to_dict(self) -> Dict:
        """JSON-safe view of the report."""
        return {
            "scheme": self.scheme.value,
            "feasible": bool(self.feasible),
            "sum_rate_bps": float(self.sum_rate),
            "chosen_k": int(self.chosen_k),
            "placement": self.placement.model_dump(),
            "allocation": self.allocation.to_dict(),
            "per_user_rates_bps": [float(r) for r in self.per_user_rates],
            "iterations": int(self.iterations),
            "runtime_ms": float(self.runtime_ms),
            "traces": [
                {"k": k, "start": start, **trace.summary()}
                for (k, start), trace in self.traces.items()
            ],
            "notes": list(self.notes),
            "parameters": dict(self.parameters),
        }


def _run_sca(task) -> Tuple[PortPlacement, ScaTrace]:
    scenario, y2, z2, config, k, init = task
    return ScaEngine(scenario, y2, z2, config).optimize(k, init)


class FarSolver:
    """
    Runs the proposed scheme and its baselines on one scenario.
    """

    def __init__(self, scenario: Scenario, config: Optional[SolverConfig] = None):
        self.scenario = scenario
        self.config = config or SolverConfig()

    def solve(self) -> SolveReport:
        """
        Proposed scheme.

        Returns:
            SolveReport; `feasible` is False when no run yields an allocation
            meeting every rate floor
        """
        started = time.perf_counter()
        scenario = self.scenario
        y2, z2 = optimal_port_b(scenario)
        logger.info(f"port B fixed at ({y2:.3f}, {z2:.3f})")

        starts = start_points(scenario, self.config)
        keys = [(k, i) for k in range(scenario.n_users) for i in range(len(starts))]
        results = self._map([(scenario, y2, z2, self.config, k, starts[i]) for k, i in keys])
        traces = dict(zip(keys, (trace for _, trace in results)))
        for k in range(scenario.n_users):
            runs = [traces[(k, i)] for i in range(len(starts))]
            converged = sum(t.termination is Termination.CONVERGED for t in runs)
            logger.info(f"k={k}: {converged}/{len(runs)} runs converged")

        notes: List[str] = []
        best = None
        discarded = 0
        for (k, i), (placement, trace) in zip(keys, results):
            if trace.termination is Termination.INFEASIBLE_START:
                continue
            allocation = allocate(scenario, placement)
            if allocation.best_user != k:
                discarded += 1
                continue
            if not allocation.feasible:
                continue
            rank = (allocation.satisfies_floors, allocation.sum_rate)
            if best is None or rank > best[0]:
                best = (rank, k, i, placement, allocation)
        if discarded:
            logger.info(f"discarded {discarded} runs whose final best user differs from their hypothesis")

        if best is None:
            best = self._fallback(keys, results, notes, y2, z2)

        # the fixed-location placement competes with the SCA end points
        yc, zc = scenario.center()
        center = PortPlacement(y1=yc, z1=zc, y2=yc, z2=zc)
        center_allocation = allocate(scenario, center)
        if center_allocation.feasible:
            rank = (center_allocation.satisfies_floors, center_allocation.sum_rate)
            if rank > best[0]:
                logger.info(f"fixed-location placement beats every SCA run ({center_allocation.sum_rate:.6g})")
                notes.append("fixed-location placement beat every SCA run")
                best = (rank, center_allocation.best_user, -1, center, center_allocation)

        _, k, i, placement, allocation = best
        trace = traces.get((k, i))
        report = self._report(
            Scheme.PROPOSED, placement, allocation, started,
            iterations=trace.iterations if trace is not None else 0,
            traces=traces, notes=notes,
        )
        logger.info(
            f"proposed: k={report.chosen_k} sum_rate={report.sum_rate:.6g} feasible={report.feasible}"
        )
        return report

    def fixed_location_baseline(self) -> SolveReport:
        """Both ports at the center of the rectangle, closed-form bandwidth."""
        started = time.perf_counter()
        yc, zc = self.scenario.center()
        placement = PortPlacement(y1=yc, z1=zc, y2=yc, z2=zc)
        allocation = allocate(self.scenario, placement)
        return self._report(Scheme.FIXED_LOCATION, placement, allocation, started)

    def equal_bandwidth_baseline(self) -> SolveReport:
        """
        Bandwidth split equally; port A chosen by the equal-share SCA with
        port B in closed form (or both ports at the center when location
        optimization is switched off in the config).
        """
        started = time.perf_counter()
        scenario = self.scenario
        notes: List[str] = []
        traces: Dict[Tuple[Optional[int], int], ScaTrace] = {}
        iterations = 0

        if not self.config.equal_bandwidth_optimizes_location:
            yc, zc = scenario.center()
            placement = PortPlacement(y1=yc, z1=zc, y2=yc, z2=zc)
            notes.append("equal-bandwidth location: center (optimization disabled)")
        else:
            y2, z2 = optimal_port_b(scenario)
            starts = start_points(scenario, self.config)
            results = self._map([(scenario, y2, z2, self.config, None, init) for init in starts])
            best = None
            for i, (candidate, trace) in enumerate(results):
                traces[(None, i)] = trace
                if trace.termination is Termination.INFEASIBLE_START:
                    continue
                value = trace.final.true_objective
                if best is None or value > best[0]:
                    best = (value, candidate, trace.iterations)
            if best is None:
                yc, zc = scenario.center()
                placement = PortPlacement(y1=yc, z1=zc, y2=y2, z2=z2)
                notes.append("no feasible equal-share start; port A left at the center")
            else:
                _, placement, iterations = best
            notes.append("equal-bandwidth location: optimized")

        allocation = equal_split(scenario, placement)
        return self._report(
            Scheme.EQUAL_BANDWIDTH, placement, allocation, started,
            iterations=iterations, traces=traces, notes=notes,
        )

    def _fallback(self, keys, results, notes: List[str], y2: float, z2: float):
        """Best allocation over all run end points when no k-consistent run survives."""
        best = None
        for (k, i), (placement, trace) in zip(keys, results):
            if trace.termination is Termination.INFEASIBLE_START:
                continue
            allocation = allocate(self.scenario, placement)
            rank = (allocation.satisfies_floors, allocation.sum_rate)
            if best is None or rank > best[0]:
                best = (rank, allocation.best_user, i, placement, allocation)
        if best is not None:
            logger.warning("no run kept its best-user hypothesis; using the best run end point")
            notes.append("no k-consistent run; chose best end point by its own best user")
            return best

        logger.warning("every start is infeasible; reporting the center placement")
        notes.append("all starts infeasible")
        yc, zc = self.scenario.center()
        placement = PortPlacement(y1=yc, z1=zc, y2=y2, z2=z2)
        allocation = allocate(self.scenario, placement)
        return ((False, allocation.sum_rate), allocation.best_user, -1, placement, allocation)

    def _map(self, tasks):
        if self.config.workers > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=self.config.workers) as pool:
                return list(pool.map(_run_sca, tasks))
        return [_run_sca(task) for task in tasks]

    def _report(
        self,
        scheme: Scheme,
        placement: PortPlacement,
        allocation: BandwidthAllocation,
        started: float,
        iterations: int = 0,
        traces: Optional[Dict] = None,
        notes: Optional[List[str]] = None,
    ) -> SolveReport:
        notes = list(notes or [])
        if allocation.feasible and not allocation.rate_floor_met:
            notes.append(f"user {allocation.best_user} is below its rate floor")
        rates = np.asarray(allocation.rates, dtype=float)
        return SolveReport(
            placement=placement,
            allocation=allocation,
            per_user_rates=rates,
            sum_rate=float(rates.sum()),
            chosen_k=allocation.best_user,
            scheme=scheme,
            feasible=allocation.satisfies_floors,
            runtime_ms=(time.perf_counter() - started) * 1000.0,
            iterations=iterations,
            traces=traces or {},
            notes=notes,
            parameters=self.scenario.radio_parameters(),
        )


def solve(scenario: Scenario, config: Optional[SolverConfig] = None) -> SolveReport:
    return FarSolver(scenario, config).solve()


def fixed_location_baseline(scenario: Scenario, config: Optional[SolverConfig] = None) -> SolveReport:
    return FarSolver(scenario, config).fixed_location_baseline()


def equal_bandwidth_baseline(scenario: Scenario, config: Optional[SolverConfig] = None) -> SolveReport:
    return FarSolver(scenario, config).equal_bandwidth_baseline()
