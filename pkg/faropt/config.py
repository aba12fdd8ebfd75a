"""
Solver configuration and radio defaults.
Knobs can be given explicitly or through FAR_* environment variables.
"""
import math
import os
from typing import Tuple

from pydantic import BaseModel, ConfigDict, Field

# Radio defaults used when a scenario file omits them
DEFAULT_PATH_LOSS_EXP = 2.0
DEFAULT_REF_GAIN = 1e-4          # -40 dB at 1 m
DEFAULT_NOISE_POWER_W = 1e-12    # -90 dBm
DEFAULT_MEDIUM_FACTOR = 3.0
DEFAULT_MIN_RATE_BPS = 1e5
DEFAULT_TX_POWER_DBM = 20.0

# Reference deployment
REFERENCE_BS_POSITION: Tuple[float, float, float] = (350.0, 30.0, 30.0)
REFERENCE_WALL_WIDTH = 20.0
REFERENCE_BOUNDS: Tuple[float, float] = (0.0, 20.0)
REFERENCE_BANDWIDTH_HZ = 10e6
REFERENCE_USER_AREA = 300.0

DEFAULT_SWEEP_DBM: Tuple[float, ...] = (-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    return 10.0 * math.log10(watts) + 30.0


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(value: float) -> float:
    return 10.0 * math.log10(value)


class SolverConfig(BaseModel):
    """Tuning knobs for the SCA solver and the orchestrator."""

    model_config = ConfigDict(frozen=True)

    max_outer_iterations: int = Field(default=50, ge=1)
    outer_tolerance: float = Field(default=1e-6, gt=0)
    inner_tolerance: float = Field(default=1e-6, gt=0)
    max_inner_iterations: int = Field(default=5000, ge=1)
    multistart_grid: int = Field(default=3, ge=1)
    include_user_projections: bool = True
    equal_bandwidth_optimizes_location: bool = True
    workers: int = Field(default=1, ge=1)

    @classmethod
    def from_env(cls, **overrides) -> "SolverConfig":
        """
        Build a config from FAR_* environment variables.

        Args:
            **overrides: Explicit values, these win over the environment

        Returns:
            Validated SolverConfig
        """
        env_keys = {
            "max_outer_iterations": "FAR_MAX_OUTER_ITERATIONS",
            "outer_tolerance": "FAR_OUTER_TOLERANCE",
            "inner_tolerance": "FAR_INNER_TOLERANCE",
            "max_inner_iterations": "FAR_MAX_INNER_ITERATIONS",
            "multistart_grid": "FAR_MULTISTART_GRID",
            "workers": "FAR_WORKERS",
            "equal_bandwidth_optimizes_location": "FAR_EQUAL_BANDWIDTH_OPTIMIZES_LOCATION",
        }
        values = {}
        for field, env_name in env_keys.items():
            raw = os.getenv(env_name)
            if raw is not None:
                values[field] = raw
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls.model_validate(values)
