# Copyright (c) 2025, HUMMBL, LLC
#
# Licensed under the Business Source License 1.1 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://github.com/hummbl-dev/engine-ops/blob/main/LICENSE
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#
# Change Date: 2029-01-01
# Change License: Apache License, Version 2.0

"""
Configuration Schemas

Pydantic models for the numeric controls (quadrature, contours, series
truncation, check tolerances) and for the command line, plus the YAML loader
that layers bundled defaults, a user file and explicit overrides.
"""

from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple
import os

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .errors import ConfigError

DEFAULTS_PATH = Path(__file__).parent / "data" / "defaults.yaml"
THREADS_ENV = "ZDPP_THREADS"


class QuadratureSpec(BaseModel):
    """Controls every numerical integration."""

    model_config = ConfigDict(frozen=True)

    base_nodes: int = Field(default=24, gt=0, description="Nodes per axis at level 0")
    max_doublings: int = Field(default=5, ge=0, description="Node doublings before failing")
    rel_tol: float = Field(default=1e-10, description="Relative tolerance")
    abs_tol: float = Field(default=1e-14, gt=0, description="Absolute tolerance")
    endpoint_exponents: Optional[Tuple[float, float]] = Field(
        default=None, description="Algebraic singularity strengths at the interval ends"
    )

    @field_validator("rel_tol")
    @classmethod
    def check_rel_tol(cls, v: float) -> float:
        if v < 1e-14:
            raise ValueError("rel_tol must be >= 1e-14")
        return v

    @field_validator("endpoint_exponents")
    @classmethod
    def check_exponents(cls, v: Optional[Tuple[float, float]]) -> Optional[Tuple[float, float]]:
        if v is not None and min(v) <= -1.0:
            raise ValueError("endpoint exponents must be > -1")
        return v


class ContourSpec(BaseModel):
    """Vertical-line contours for Mellin-Barnes integrals."""

    model_config = ConfigDict(frozen=True)

    sigma: Optional[List[float]] = Field(
        default=None, description="Real parts of the lines; chosen automatically when omitted"
    )
    half_width: float = Field(default=16.0, gt=0, description="Truncation |Im s| <= half_width")
    step: float = Field(default=0.5, gt=0, description="Initial trapezoid step")
    max_halvings: int = Field(default=5, ge=0)
    circle_nodes: int = Field(default=64, ge=8, description="Nodes on each pole circle")
    rel_tol: float = Field(default=1e-10, gt=0)
    pole_clearance: float = Field(
        default=1e-9, gt=0, description="Minimum |Re pole - sigma| for a user-supplied line"
    )


class SeriesSpec(BaseModel):
    """Truncation rules for power series and asymptotic expansions."""

    model_config = ConfigDict(frozen=True)

    rel_tol: float = Field(default=1e-15, gt=0)
    consecutive: int = Field(default=3, ge=1, description="Small terms in a row before stopping")
    max_terms: int = Field(default=1_000_000, gt=0)
    max_degree: int = Field(default=1000, gt=0, description="Total-degree cap for multi-series")


class Tolerances(BaseModel):
    """Pass thresholds for the verification suites."""

    characters: float = 0.0
    normalization: float = 1e-10
    moments: float = 1e-5
    fb_routes: float = 1e-6
    kernel_routes: float = 1e-6
    lifting: float = 1e-4
    lifting_pd: float = 1e-8
    asymptotics_slope: float = 0.15
    k_at_one: float = 1e-12
    convergence: float = 0.10


class HarnessSettings(BaseModel):
    """Grid and size choices for verification runs."""

    nmax_characters: int = Field(default=8, ge=1, le=14)
    n_normalization: int = Field(default=12, ge=1, le=30)
    l_max: int = Field(default=4, ge=0, le=6)
    convergence_n: List[int] = Field(default_factory=lambda: [10, 20, 30])
    convergence_bin: Tuple[float, float] = (0.2, 0.5)
    kernel_grid: List[float] = Field(default_factory=lambda: [0.1, 0.3, 0.5, 0.7, 0.9])
    lifting_points: List[float] = Field(
        default_factory=lambda: [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
    )
    asymptotic_scales: Tuple[int, int] = (3, 10)


class Settings(BaseModel):
    """Resolved numeric settings."""

    quadrature: QuadratureSpec = Field(default_factory=QuadratureSpec)
    contour: ContourSpec = Field(default_factory=ContourSpec)
    series: SeriesSpec = Field(default_factory=SeriesSpec)
    tolerances: Tolerances = Field(default_factory=Tolerances)
    harness: HarnessSettings = Field(default_factory=HarnessSettings)


class OutputFormat(str, Enum):
    """Table output formats."""

    CSV = "csv"
    JSON = "json"


class GridSpec(BaseModel):
    """start:stop:count grid, linear or logarithmic."""

    start: float
    stop: float
    count: int = Field(gt=0)
    log: bool = False

    @model_validator(mode="after")
    def check_log_positive(self) -> "GridSpec":
        if self.log and (self.start <= 0 or self.stop <= 0):
            raise ValueError("logarithmic grid needs positive endpoints")
        return self

    @classmethod
    def parse(cls, text: str, log: bool = False) -> "GridSpec":
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"grid must be start:stop:count, got {text!r}")
        try:
            return cls(start=float(parts[0]), stop=float(parts[1]), count=int(parts[2]), log=log)
        except ValueError as e:
            raise ConfigError(f"bad grid {text!r}: {e}") from e

    def points(self) -> List[float]:
        if self.count == 1:
            return [self.start]
        if self.log:
            return [float(v) for v in np.geomspace(self.start, self.stop, self.count)]
        return [float(v) for v in np.linspace(self.start, self.stop, self.count)]


class CliConfig(BaseModel):
    """Everything one CLI invocation needs."""

    subcommand: str
    kind: Optional[str] = None
    suite: Optional[str] = None
    z: Tuple[float, float] = (1.2, 0.0)
    zprime: Optional[Tuple[float, float]] = None
    grid: Optional[GridSpec] = None
    x: List[float] = Field(default_factory=list)
    y: List[float] = Field(default_factory=list)
    fb_a: List[float] = Field(default_factory=list)
    fb_b: List[float] = Field(default_factory=list)
    fb_c: Optional[float] = None
    n: Optional[int] = None
    nmax: Optional[int] = None
    tol: Optional[float] = None
    method: str = "auto"
    output_format: OutputFormat = OutputFormat.CSV
    output: Optional[Path] = None
    audit: Optional[Path] = None
    seed: int = 0
    workers: int = 1
    unchecked: bool = False
    settings: Settings = Field(default_factory=Settings)

    @field_validator("z", "zprime", mode="before")
    @classmethod
    def parse_complex_pair(cls, v: Any) -> Any:
        """Accept 're,im' or a single real."""
        if v is None or isinstance(v, (tuple, list)):
            return v
        parts = str(v).split(",")
        if len(parts) == 1:
            return (float(parts[0]), 0.0)
        if len(parts) == 2:
            return (float(parts[0]), float(parts[1]))
        raise ValueError(f"expected 're,im', got {v!r}")

    @property
    def z_complex(self) -> complex:
        return complex(*self.z)

    @property
    def zprime_complex(self) -> complex:
        if self.zprime is None:
            return self.z_complex.conjugate()
        return complex(*self.zprime)


def _deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _read_yaml(path: Path) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
    except FileNotFoundError as e:
        raise ConfigError(f"configuration file not found: {path}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"invalid YAML in {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must contain a mapping at top level")
    return data


def load_settings(
    path: Optional[Path] = None, overrides: Optional[Dict[str, Any]] = None
) -> Settings:
    """
    Load numeric settings.

    Bundled defaults are overridden by the user file, which is overridden
    by explicit overrides.
    """
    data = _read_yaml(DEFAULTS_PATH)
    if path is not None:
        data = _deep_merge(data, _read_yaml(Path(path)))
    if overrides:
        data = _deep_merge(data, overrides)
    try:
        return Settings(**data)
    except ValueError as e:
        raise ConfigError(f"invalid settings: {e}") from e


def resolve_workers(flag: Optional[int] = None) -> int:
    """Worker count from the flag, else ZDPP_THREADS, else the hardware count."""
    if flag is not None:
        if flag < 1:
            raise ConfigError("--workers must be >= 1")
        return flag
    env = os.getenv(THREADS_ENV)
    if env:
        try:
            value = int(env)
        except ValueError as e:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}") from e
        if value >= 1:
            return value
    return os.cpu_count() or 1
