"""
faropt - uplink sum-rate optimization for a two-port fluid antenna relay.
"""
from .bandwidth import BandwidthAllocation, allocate, best_user_index, equal_split, lp_oracle
from .config import SolverConfig, dbm_to_watts, watts_to_dbm
from .errors import FarError, ScenarioError, SolverError
from .model import (
    PortPlacement,
    Scenario,
    UserTerminal,
    achievable_rate,
    channel_gain,
    channel_gains,
    dist_portA_to_portB,
    dist_portB_to_bs,
    dist_user_to_portA,
)
from .oracle import OracleResult, decoupling_gap, grid_2d, grid_4d, oracle_report
from .orchestrator import (
    FarSolver,
    Scheme,
    SolveReport,
    equal_bandwidth_baseline,
    fixed_location_baseline,
    solve,
)
from .port_b import optimal_port_b
from .sca_engine import ScaState, ScaTrace, Termination, sca_optimize_port_a, solve_subproblem
from .scenario_io import gen_scenario, load_scenario, reference_scenario, write_scenario
from .sweep import SweepResult, SweepSpec, run_sweep

__version__ = "0.1.0"

__all__ = [
    "BandwidthAllocation",
    "FarError",
    "FarSolver",
    "OracleResult",
    "PortPlacement",
    "ScaState",
    "ScaTrace",
    "Scenario",
    "ScenarioError",
    "Scheme",
    "SolveReport",
    "SolverConfig",
    "SolverError",
    "SweepResult",
    "SweepSpec",
    "Termination",
    "UserTerminal",
    "achievable_rate",
    "allocate",
    "best_user_index",
    "channel_gain",
    "channel_gains",
    "dbm_to_watts",
    "decoupling_gap",
    "dist_portA_to_portB",
    "dist_portB_to_bs",
    "dist_user_to_portA",
    "equal_bandwidth_baseline",
    "equal_split",
    "fixed_location_baseline",
    "gen_scenario",
    "grid_2d",
    "grid_4d",
    "load_scenario",
    "lp_oracle",
    "optimal_port_b",
    "oracle_report",
    "reference_scenario",
    "run_sweep",
    "sca_optimize_port_a",
    "solve",
    "solve_subproblem",
    "watts_to_dbm",
    "write_scenario",
]
