"""
Power Sweep
Runs every requested scheme over a list of per-user transmit powers and
collects one row per (power, scheme) cell.
"""
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple, Union

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .config import SolverConfig, dbm_to_watts, watts_to_dbm
from .model import Scenario
from .oracle import oracle_report
from .orchestrator import FarSolver, Scheme, SolveReport

logger = logging.getLogger(__name__)

# largest proposed / fixed-location gain quoted for the published deployment
PUBLISHED_MAX_RATIO = 1.25

TABLE_COLUMNS = [
    "power_dbm",
    "power_w",
    "scheme",
    "sum_rate_bps",
    "feasible",
    "chosen_k",
    "y1_m",
    "z1_m",
    "y2_m",
    "z2_m",
    "iterations",
]


class SweepSpec(BaseModel):
    """
    What to sweep. The same transmit power is applied to every user.
    Values are dBm (any sign) or Watts (strictly positive).
    """

    model_config = ConfigDict(frozen=True)

    parameter: Literal["tx_power"] = "tx_power"
    values: Tuple[float, ...] = Field(min_length=1)
    unit: Literal["dbm", "w"] = "dbm"
    schemes: Tuple[Scheme, ...] = Field(min_length=1)
    oracle_resolution: float = Field(default=0.5, gt=0)

    @model_validator(mode="after")
    def _positive_watts(self) -> "SweepSpec":
        if self.unit == "w" and any(not v > 0 for v in self.values):
            raise ValueError("power values in W must be positive")
        if any(not math.isfinite(v) for v in self.values):
            raise ValueError("power values must be finite")
        if len(set(self.values)) != len(self.values) or len(set(self.schemes)) != len(self.schemes):
            raise ValueError("power values and schemes must not repeat")
        return self

    def powers(self) -> List[Tuple[float, float]]:
        """(dBm, W) pairs in sweep order."""
        if self.unit == "dbm":
            return [(v, dbm_to_watts(v)) for v in self.values]
        return [(watts_to_dbm(v), v) for v in self.values]


@dataclass
class SweepResult:
    table: pd.DataFrame
    summary: Dict = field(default_factory=dict)
    out_path: Optional[Path] = None


def _run_scheme(solver: FarSolver, scheme: Scheme, sweep: SweepSpec) -> SolveReport:
    if scheme is Scheme.PROPOSED:
        return solver.solve()
    if scheme is Scheme.FIXED_LOCATION:
        return solver.fixed_location_baseline()
    if scheme is Scheme.EQUAL_BANDWIDTH:
        return solver.equal_bandwidth_baseline()
    return oracle_report(solver.scenario, sweep.oracle_resolution)


def summarize(table: pd.DataFrame) -> Dict:
    """
    Headline numbers of a sweep table: the largest proposed / fixed-location
    ratio over powers where both are feasible, per-scheme monotonicity over
    feasible rows, and the order of the two baselines at each power.
    """
    summary: Dict = {
        "max_proposed_fixed_ratio": math.nan,
        "ratio_at_power_dbm": math.nan,
        "published_max_ratio": PUBLISHED_MAX_RATIO,
    }
    feasible = table[table["feasible"]]
    rates = feasible.pivot(index="power_dbm", columns="scheme", values="sum_rate_bps").sort_index()

    proposed, fixed = Scheme.PROPOSED.value, Scheme.FIXED_LOCATION.value
    if proposed in rates and fixed in rates:
        ratio = (rates[proposed] / rates[fixed]).dropna()
        if not ratio.empty:
            summary["max_proposed_fixed_ratio"] = float(ratio.max())
            summary["ratio_at_power_dbm"] = float(ratio.idxmax())

    summary["monotone"] = {
        scheme: bool(rates[scheme].dropna().is_monotonic_increasing) for scheme in rates.columns
    }

    equal = Scheme.EQUAL_BANDWIDTH.value
    if equal in rates and fixed in rates:
        both = rates[[equal, fixed]].dropna()
        summary["baseline_order"] = {
            float(p): (f"{equal}>={fixed}" if row[equal] >= row[fixed] else f"{fixed}>{equal}")
            for p, row in both.iterrows()
        }
    return summary


def _header_lines(scenario: Scenario, sweep: SweepSpec, config: SolverConfig) -> List[str]:
    return [
        f"scenario: {scenario.description or 'unnamed'} ({scenario.n_users} users)",
        f"radio: {scenario.radio_parameters()}",
        f"defaults_applied: {list(scenario.defaults_applied) or 'none'}",
        f"solver: {config.model_dump()}",
        f"sweep: {sweep.model_dump(mode='json')}",
    ]


def run_sweep(
    scenario: Scenario,
    sweep: SweepSpec,
    out_path: Optional[Union[str, Path]] = None,
    config: Optional[SolverConfig] = None,
) -> SweepResult:
    """
    Run the sweep and optionally write the table as CSV.

    Rows come out in (power, scheme) order as listed in `sweep`. The CSV
    starts with `#` comment lines recording the run configuration; floats
    are written with 12 significant digits.

    Raises:
        OSError: If `out_path` cannot be written
    """
    config = config or SolverConfig()
    rows = []
    for power_dbm, power_w in sweep.powers():
        solver = FarSolver(scenario.with_tx_power(power_w), config)
        for scheme in sweep.schemes:
            report = _run_scheme(solver, scheme, sweep)
            p = report.placement
            rows.append(
                {
                    "power_dbm": power_dbm,
                    "power_w": power_w,
                    "scheme": scheme.value,
                    "sum_rate_bps": report.sum_rate,
                    "feasible": bool(report.feasible),
                    "chosen_k": report.chosen_k,
                    "y1_m": p.y1,
                    "z1_m": p.z1,
                    "y2_m": p.y2,
                    "z2_m": p.z2,
                    "iterations": report.iterations,
                }
            )
            logger.info(
                f"sweep cell {power_dbm:g} dBm / {scheme.value}: "
                f"{report.sum_rate:.6g} bit/s (feasible={report.feasible})"
            )

    table = pd.DataFrame(rows, columns=TABLE_COLUMNS)
    result = SweepResult(table=table, summary=summarize(table))

    if out_path is not None:
        out_path = Path(out_path)
        with open(out_path, "w", newline="", encoding="utf-8") as handle:
            for line in _header_lines(scenario, sweep, config):
                handle.write(f"# {line}\n")
            table.to_csv(handle, index=False, float_format="%.12g")
        result.out_path = out_path
        logger.info(f"wrote {len(table)} rows to {out_path}")
    return result
