"""
Configuration

Tolerances and run settings as pydantic models. Precedence: command-line
flags, then environment (DEVSURF_LOG_LEVEL, DEVSURF_SEED, optionally from a
.env file), then the defaults below.
"""

from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple
import logging
import os

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .constants import DEFAULT_SEED, MAX_SAMPLES

logger = logging.getLogger(__name__)

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class Tolerances(BaseModel):
    """Pass thresholds per check; defaults are the acceptance values"""
    model_config = ConfigDict(extra="forbid", validate_assignment=True)

    quartic: float = Field(default=1e-9, gt=0)
    conditions_algebraic: float = Field(default=1e-12, gt=0)
    conditions_differential: float = Field(default=1e-5, gt=0)
    frame_split: float = Field(default=1e-12, gt=0)
    integral: float = Field(default=1e-5, gt=0)
    omega_function: float = Field(default=1e-9, gt=0)
    tangent_relation: float = Field(default=1e-5, gt=0)
    curvature: float = Field(default=1e-6, gt=0)
    circle_fit: float = Field(default=1e-5, gt=0)
    isometry: float = Field(default=1e-6, gt=0)
    coplanarity: float = Field(default=1e-4, gt=0)
    homogeneity: float = Field(default=1e-8, gt=0)
    implicit_curvature: float = Field(default=1e-5, gt=0)
    developability: float = Field(default=1e-9, gt=0)
    round_trip: float = Field(default=1e-8, gt=0)
    cylinder_angle: float = Field(default=1e-10, gt=0)
    cone_apex: float = Field(default=1e-8, gt=0)
    convergence_low: float = Field(default=1.7, gt=0)
    convergence_high: float = Field(default=4.5, gt=0)

    @classmethod
    def flag_names(cls) -> List[str]:
        """Command-line spelling of each field, e.g. --tol-tangent-relation"""
        return [name.replace("_", "-") for name in cls.model_fields]


def _parse_pair(value: Any, separator: str, cast) -> Any:
    if isinstance(value, str):
        parts = value.lower().split(separator)
        if len(parts) != 2:
            raise ValueError(f"expected two values separated by '{separator}', got {value!r}")
        return tuple(cast(part) for part in parts)
    return value


class RunConfig(BaseModel):
    """Settings for one CLI invocation"""
    model_config = ConfigDict(extra="forbid")

    subcommand: str
    specs: List[Path] = Field(default_factory=list)
    out: Optional[Path] = None
    csv: Optional[Path] = None
    report: Optional[Path] = None
    grid: Tuple[int, int] = (100, 20)
    s_range: Tuple[float, float] = (0.5, 2.0)
    samples: Optional[int] = Field(default=None, ge=1, le=MAX_SAMPLES)
    step: Optional[float] = Field(default=None, gt=0)
    seed: int = DEFAULT_SEED
    gap: Optional[float] = Field(default=None, gt=0)
    example: Optional[str] = None
    log_level: str = "WARNING"
    tolerances: Tolerances = Field(default_factory=Tolerances)

    @field_validator("grid", mode="before")
    @classmethod
    def _grid(cls, value: Any) -> Any:
        return _parse_pair(value, "x", int)

    @field_validator("s_range", mode="before")
    @classmethod
    def _s_range(cls, value: Any) -> Any:
        return _parse_pair(value, ":", float)

    @field_validator("log_level")
    @classmethod
    def _level(cls, value: str) -> str:
        level = value.upper()
        if level not in LOG_LEVELS:
            raise ValueError(f"log level must be one of {', '.join(LOG_LEVELS)}")
        return level

    @model_validator(mode="after")
    def _ranges(self) -> "RunConfig":
        n_tau, n_s = self.grid
        if n_tau < 2 or n_s < 2:
            raise ValueError(f"grid must be at least 2x2, got {n_tau}x{n_s}")
        if n_tau * n_s > MAX_SAMPLES:
            raise ValueError(f"grid {n_tau}x{n_s} exceeds {MAX_SAMPLES} vertices")
        s_min, s_max = self.s_range
        if not 0 < s_min < s_max:
            raise ValueError(f"s-range must satisfy 0 < lo < hi, got {s_min}:{s_max}")
        for path in (self.out, self.csv, self.report):
            if path is not None:
                directory = path.parent if str(path.parent) else Path(".")
                if not directory.is_dir() or not os.access(directory, os.W_OK):
                    raise ValueError(f"output directory {directory} is not writable")
        return self


def load_environment() -> Dict[str, Any]:
    """
    Read optional settings from the environment.

    Returns:
        Mapping with the keys that were set (log_level, seed)
    """
    load_dotenv()
    settings: Dict[str, Any] = {}
    level = os.getenv("DEVSURF_LOG_LEVEL")
    if level:
        settings["log_level"] = level
    seed = os.getenv("DEVSURF_SEED")
    if seed:
        settings["seed"] = int(seed, 0)
    return settings
