"""
Scenario Files
JSON scenario format with explicit unit suffixes, the seeded scenario
generator and the reference deployment.
"""
import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .config import (
    DEFAULT_MEDIUM_FACTOR,
    DEFAULT_MIN_RATE_BPS,
    DEFAULT_NOISE_POWER_W,
    DEFAULT_PATH_LOSS_EXP,
    DEFAULT_REF_GAIN,
    DEFAULT_TX_POWER_DBM,
    REFERENCE_BANDWIDTH_HZ,
    REFERENCE_BOUNDS,
    REFERENCE_BS_POSITION,
    REFERENCE_USER_AREA,
    REFERENCE_WALL_WIDTH,
    db_to_linear,
    dbm_to_watts,
)
from .errors import ScenarioError
from .model import Scenario, UserTerminal

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

GENERATOR_VERSION = "gen-v1"

REFERENCE_USER_POSITIONS: Tuple[Tuple[float, float], ...] = (
    (60.0, 120.0),
    (150.0, 40.0),
    (220.0, 260.0),
    (100.0, 200.0),
    (280.0, 90.0),
)


def _exclusive(record: BaseModel, linear: str, log: str) -> None:
    if getattr(record, linear) is not None and getattr(record, log) is not None:
        raise ValueError(f"give either {linear} or {log}, not both")


class UserRecord(BaseModel):
    """One entry of the `users` array."""

    model_config = ConfigDict(extra="forbid")

    x_m: float
    y_m: float
    tx_power_w: Optional[float] = None
    tx_power_dbm: Optional[float] = None
    min_rate_bps: Optional[float] = None

    @model_validator(mode="after")
    def _one_power_key(self) -> "UserRecord":
        _exclusive(self, "tx_power_w", "tx_power_dbm")
        return self


class ScenarioFile(BaseModel):
    """On-disk scenario layout; omitted radio parameters take documented defaults."""

    model_config = ConfigDict(extra="forbid")

    description: str = ""
    bs_position_m: Tuple[float, float, float]
    wall_width_m: float
    y_bounds_m: Tuple[float, float]
    z_bounds_m: Tuple[float, float]
    total_bandwidth_hz: float
    noise_power_w: Optional[float] = None
    noise_power_dbm: Optional[float] = None
    ref_gain: Optional[float] = None
    ref_gain_db: Optional[float] = None
    path_loss_exp: Optional[float] = None
    medium_factor: Optional[float] = None
    users: List[UserRecord] = Field(min_length=1)

    @model_validator(mode="after")
    def _one_key_per_pair(self) -> "ScenarioFile":
        _exclusive(self, "noise_power_w", "noise_power_dbm")
        _exclusive(self, "ref_gain", "ref_gain_db")
        return self

    def to_scenario(self) -> Scenario:
        defaults: List[str] = []

        def pick(name: str, value, default):
            if value is None:
                defaults.append(name)
                return default
            return value

        noise = self.noise_power_w
        if noise is None and self.noise_power_dbm is not None:
            noise = dbm_to_watts(self.noise_power_dbm)
        ref_gain = self.ref_gain
        if ref_gain is None and self.ref_gain_db is not None:
            ref_gain = db_to_linear(self.ref_gain_db)

        radio = {
            "noise_power": pick("noise_power", noise, DEFAULT_NOISE_POWER_W),
            "ref_gain": pick("ref_gain", ref_gain, DEFAULT_REF_GAIN),
            "path_loss_exp": pick("path_loss_exp", self.path_loss_exp, DEFAULT_PATH_LOSS_EXP),
            "medium_factor": pick("medium_factor", self.medium_factor, DEFAULT_MEDIUM_FACTOR),
        }

        users = []
        for i, record in enumerate(self.users):
            power = record.tx_power_w
            if power is None and record.tx_power_dbm is not None:
                power = dbm_to_watts(record.tx_power_dbm)
            users.append(
                UserTerminal(
                    position=(record.x_m, record.y_m),
                    tx_power=pick(f"users[{i}].tx_power", power, dbm_to_watts(DEFAULT_TX_POWER_DBM)),
                    min_rate=pick(f"users[{i}].min_rate", record.min_rate_bps, DEFAULT_MIN_RATE_BPS),
                )
            )

        return Scenario(
            users=tuple(users),
            bs_position=self.bs_position_m,
            wall_width=self.wall_width_m,
            y_bounds=self.y_bounds_m,
            z_bounds=self.z_bounds_m,
            total_bandwidth=self.total_bandwidth_hz,
            description=self.description,
            defaults_applied=tuple(defaults),
            **radio,
        )


def _describe(error: ValidationError, path: Path) -> str:
    first = error.errors()[0]
    location = ".".join(str(part) for part in first["loc"]) or "scenario"
    extra = f" (+{error.error_count() - 1} more)" if error.error_count() > 1 else ""
    return f"{path}: {location}: {first['msg']}{extra}"


def load_scenario(path: PathLike) -> Scenario:
    """
    Read and validate a scenario file.

    Args:
        path: JSON scenario file

    Returns:
        Validated Scenario; `defaults_applied` lists every default filled in

    Raises:
        ScenarioError: Unreadable file, malformed JSON, or an invalid field
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioError(f"cannot read scenario file {path}: {e}") from e
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"{path}: malformed JSON at line {e.lineno}, column {e.colno}: {e.msg}") from e

    try:
        scenario = ScenarioFile.model_validate(raw).to_scenario()
    except ValidationError as e:
        raise ScenarioError(_describe(e, path)) from e

    if scenario.defaults_applied:
        logger.info(f"{path}: defaults applied for {', '.join(scenario.defaults_applied)}")
    logger.info(f"loaded scenario {path} with {scenario.n_users} users")
    return scenario


def scenario_to_dict(scenario: Scenario) -> Dict:
    """File representation; keys that were defaulted at load time are left out."""
    defaulted = set(scenario.defaults_applied)
    payload: Dict = {}
    if scenario.description:
        payload["description"] = scenario.description
    payload.update(
        {
            "bs_position_m": list(scenario.bs_position),
            "wall_width_m": scenario.wall_width,
            "y_bounds_m": list(scenario.y_bounds),
            "z_bounds_m": list(scenario.z_bounds),
            "total_bandwidth_hz": scenario.total_bandwidth,
        }
    )
    for key, name in (
        ("noise_power_w", "noise_power"),
        ("ref_gain", "ref_gain"),
        ("path_loss_exp", "path_loss_exp"),
        ("medium_factor", "medium_factor"),
    ):
        if name not in defaulted:
            payload[key] = getattr(scenario, name)

    users = []
    for i, user in enumerate(scenario.users):
        entry = {"x_m": user.position[0], "y_m": user.position[1]}
        if f"users[{i}].tx_power" not in defaulted:
            entry["tx_power_w"] = user.tx_power
        if f"users[{i}].min_rate" not in defaulted:
            entry["min_rate_bps"] = user.min_rate
        users.append(entry)
    payload["users"] = users
    return payload


def write_scenario(scenario: Scenario, path: PathLike) -> Path:
    """Write `scenario` so that load_scenario reproduces it exactly."""
    path = Path(path)
    path.write_text(json.dumps(scenario_to_dict(scenario), indent=2) + "\n", encoding="utf-8")
    logger.info(f"wrote scenario to {path}")
    return path


def _deployment(users, description: str, defaults_applied: Tuple[str, ...] = ()) -> Scenario:
    return Scenario(
        users=tuple(users),
        bs_position=REFERENCE_BS_POSITION,
        wall_width=REFERENCE_WALL_WIDTH,
        y_bounds=REFERENCE_BOUNDS,
        z_bounds=REFERENCE_BOUNDS,
        total_bandwidth=REFERENCE_BANDWIDTH_HZ,
        noise_power=DEFAULT_NOISE_POWER_W,
        ref_gain=DEFAULT_REF_GAIN,
        path_loss_exp=DEFAULT_PATH_LOSS_EXP,
        medium_factor=DEFAULT_MEDIUM_FACTOR,
        description=description,
        defaults_applied=defaults_applied,
    )


def gen_scenario(seed: int, n_users: int) -> Scenario:
    """
    Random scenario on the reference deployment.

    Users are uniform over the [0, 300] m square, drawn from numpy's PCG64
    generator seeded with `seed`; the same seed always gives the same file.
    """
    if n_users < 1:
        raise ScenarioError("n_users must be at least 1")
    rng = np.random.default_rng(seed)
    positions = rng.uniform(0.0, REFERENCE_USER_AREA, size=(n_users, 2))
    users = [
        UserTerminal(
            position=(float(x), float(y)),
            tx_power=dbm_to_watts(DEFAULT_TX_POWER_DBM),
            min_rate=DEFAULT_MIN_RATE_BPS,
        )
        for x, y in positions
    ]
    return _deployment(
        users,
        description=f"{GENERATOR_VERSION} seed={seed} n_users={n_users}",
        defaults_applied=("noise_power", "ref_gain", "path_loss_exp", "medium_factor"),
    )


def reference_scenario() -> Scenario:
    """Five fixed users on the reference deployment (also in scenarios/reference.json)."""
    users = [
        UserTerminal(
            position=position,
            tx_power=dbm_to_watts(DEFAULT_TX_POWER_DBM),
            min_rate=DEFAULT_MIN_RATE_BPS,
        )
        for position in REFERENCE_USER_POSITIONS
    ]
    return _deployment(users, description="reference deployment")
