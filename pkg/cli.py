"""
Command line entry point for the FAR sum-rate solver.

    python cli.py solve scenarios/reference.json
    python cli.py sweep scenarios/reference.json --powers=-10:30:5 --out sweep.csv
    python cli.py oracle scenarios/reference.json --resolution 0.1
    python cli.py gen 42 5 --out scenarios/seed42.json

Exit codes: 0 success, 1 invalid input, 2 infeasible scenario, 3 solver failure.
"""
import argparse
import json
import logging
import math
import sys
from typing import List, Optional

import numpy as np
from pydantic import ValidationError

from faropt.config import DEFAULT_SWEEP_DBM, SolverConfig
from faropt.errors import ScenarioError, SolverError
from faropt.oracle import decoupling_gap, grid_2d
from faropt.orchestrator import FarSolver, Scheme
from faropt.port_b import optimal_port_b
from faropt.scenario_io import gen_scenario, load_scenario, write_scenario
from faropt.sweep import SweepSpec, run_sweep

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INFEASIBLE = 2
EXIT_SOLVER = 3


def parse_powers(text: str) -> List[float]:
    """'a,b,c' or an inclusive range 'start:stop:step'."""
    text = text.strip()
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
            raise argparse.ArgumentTypeError(f"bad power range '{text}', expected start:stop:step")
        start, stop, step = parts
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [float(v) for v in start + step * np.arange(count)]
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"bad power list '{text}'") from e


def _clean_for_json(obj):
    """Recursively clean object for JSON output (numpy scalars, non-finite floats)."""
    if isinstance(obj, dict):
        return {str(k): _clean_for_json(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean_for_json(item) for item in obj]
    if hasattr(obj, "item"):  # numpy types
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def _print(payload) -> None:
    print(json.dumps(_clean_for_json(payload), indent=2))


def _config(args) -> SolverConfig:
    return SolverConfig.from_env(workers=args.workers, multistart_grid=args.multistart_grid)


def cmd_solve(args) -> int:
    scenario = load_scenario(args.scenario)
    report = FarSolver(scenario, _config(args)).solve()
    payload = report.to_dict()
    if not args.traces:
        payload.pop("traces")
    _print(payload)
    return EXIT_OK if report.feasible else EXIT_INFEASIBLE


def cmd_sweep(args) -> int:
    scenario = load_scenario(args.scenario)
    sweep = SweepSpec(
        values=tuple(args.powers),
        unit=args.power_unit,
        schemes=tuple(s.strip() for s in args.schemes.split(",") if s.strip()),
        oracle_resolution=args.oracle_resolution,
    )
    result = run_sweep(scenario, sweep, args.out, _config(args))
    _print({"rows": len(result.table), "out": str(args.out) if args.out else None, **result.summary})
    if args.out is None:
        print(result.table.to_csv(index=False, float_format="%.12g"))
    return EXIT_OK if result.table["feasible"].any() else EXIT_INFEASIBLE


def cmd_oracle(args) -> int:
    scenario = load_scenario(args.scenario)
    config = _config(args)
    if args.joint4d:
        gap = decoupling_gap(scenario, args.resolution, config)
        joint = gap["joint"]
        _print(
            {
                "oracle": joint.to_dict(),
                "decoupled_sum_rate_bps": gap["decoupled_sum_rate"],
                "relative_gap": gap["relative_gap"],
            }
        )
        return EXIT_OK if joint.found else EXIT_INFEASIBLE

    y2, z2 = optimal_port_b(scenario)
    result = grid_2d(scenario, y2, z2, args.resolution)
    report = FarSolver(scenario, config).solve()
    gap = math.nan
    if result.found and report.feasible and report.sum_rate > 0:
        gap = (result.best_sum_rate - report.sum_rate) / report.sum_rate
    _print({"oracle": result.to_dict(), "proposed_sum_rate_bps": report.sum_rate, "relative_gap": gap})
    return EXIT_OK if result.found else EXIT_INFEASIBLE


def cmd_gen(args) -> int:
    scenario = gen_scenario(args.seed, args.n_users)
    path = write_scenario(scenario, args.out)
    print(str(path))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="FAR uplink sum-rate solver")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parser.add_argument("--workers", type=int, default=None, help="process pool size (FAR_WORKERS)")
    parser.add_argument(
        "--multistart-grid", type=int, default=None, help="g x g start grid (FAR_MULTISTART_GRID)"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run the proposed scheme on a scenario")
    p.add_argument("scenario")
    p.add_argument("--traces", action="store_true", help="include SCA trace summaries")
    p.set_defaults(handler=cmd_solve)

    p = sub.add_parser("sweep", help="sum rate versus per-user transmit power")
    p.add_argument("scenario")
    p.add_argument("--powers", type=parse_powers, default=list(DEFAULT_SWEEP_DBM))
    p.add_argument("--power-unit", choices=["dbm", "w"], default="dbm")
    p.add_argument(
        "--schemes",
        default=",".join(s.value for s in (Scheme.PROPOSED, Scheme.FIXED_LOCATION, Scheme.EQUAL_BANDWIDTH)),
        help="comma separated subset of proposed,fixed-location,equal-bandwidth,oracle",
    )
    p.add_argument("--oracle-resolution", type=float, default=0.5)
    p.add_argument("--out", default=None, help="CSV output path")
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("oracle", help="lattice search compared with the proposed scheme")
    p.add_argument("scenario")
    p.add_argument("--resolution", type=float, default=0.1)
    p.add_argument("--joint4d", action="store_true", help="search both ports jointly")
    p.set_defaults(handler=cmd_oracle)

    p = sub.add_parser("gen", help="write a seeded random scenario")
    p.add_argument("seed", type=int)
    p.add_argument("n_users", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_gen)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )
    try:
        return args.handler(args)
    except (ScenarioError, ValidationError) as e:
        logger.error(f"invalid input: {e}")
        return EXIT_INVALID
    except SolverError as e:
        logger.error(f"solver failure: {e} {e.diagnostics}", exc_info=True)
        return EXIT_SOLVER
    except (ValueError, OSError) as e:
        logger.error(f"invalid input: {e}")
        return EXIT_INVALID
    except Exception as e:
        logger.error(f"unexpected failure: {e}", exc_info=True)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
