"""Experiment configuration.

Config files are YAML (JSON is accepted, being a subset). Every section has defaults,
so an empty file is a valid lp_simplex experiment. Environment variables prefixed
``BREGMAN_`` override unset fields, nested with ``__`` (``BREGMAN_RUN__MAX_ITERS=50``).

Example::

    problem:
      instance: lp_simplex
      kernel: shannon
      surrogate: linear
      t: 1.0
    run:
      max_iters: 1000
      stop_r_ext: null
    output: lp_simplex.csv
    format: csv
"""

from __future__ import annotations

import dataclasses
from enum import StrEnum
from pathlib import Path
from typing import Any, Optional, TypeVar

import numpy as np
import yaml
from pydantic import BaseModel, Field, ValidationError, field_validator
from pydantic_settings import BaseSettings

from bregman_stationarity.driver import RunConfig, RunMode
from bregman_stationarity.errors import ConfigError
from bregman_stationarity.hardness import PolyStart, TrapConfig, TrapKind
from bregman_stationarity.kernel import KernelSpec
from bregman_stationarity.problem import (
    ConstraintSet,
    ProblemInstance,
    SmoothObjective,
    SurrogateModel,
    builtin,
)


class OutputFormat(StrEnum):
    CSV = "csv"
    JSON = "json"


class ProblemSettings(BaseModel, extra="forbid"):
    """Builtin instance name (or ``custom``) with optional kernel / surrogate overrides"""

    instance: str = "lp_simplex"
    kernel: Optional[str] = None
    surrogate: Optional[SurrogateModel] = None
    t: float = Field(1.0, gt=0.0)
    t_bar: Optional[float] = Field(None, gt=0.0)
    alpha: Optional[float] = Field(None, gt=0.0)
    # custom instances only
    objective: Optional[dict[str, Any]] = None
    constraint: Optional[dict[str, Any]] = None

    @field_validator("objective")
    @classmethod
    def _objective_parses(cls, value: Optional[dict[str, Any]]) -> Optional[dict[str, Any]]:
        if value is not None:
            SmoothObjective.from_config(value)
        return value

    @field_validator("constraint")
    @classmethod
    def _constraint_parses(cls, value: Optional[dict[str, Any]]) -> Optional[dict[str, Any]]:
        if value is not None:
            ConstraintSet.from_config(value)
        return value

    def build(self) -> ProblemInstance:
        t_bar = self.t if self.t_bar is None else self.t_bar
        if self.instance == "custom":
            if self.objective is None or self.constraint is None:
                raise ConfigError("custom instances need both 'objective' and 'constraint'")
            return ProblemInstance(
                f=SmoothObjective.from_config(self.objective),
                g=ConstraintSet.from_config(self.constraint),
                kernel=KernelSpec.from_tag(self.kernel or "shannon"),
                surrogate=self.surrogate or SurrogateModel.LINEAR,
                t_bar=t_bar,
                name="custom",
            )
        problem = builtin(self.instance, alpha=self.alpha)
        overrides: dict[str, Any] = {"t_bar": t_bar}
        if self.kernel is not None:
            overrides["kernel"] = KernelSpec.from_tag(self.kernel)
        if self.surrogate is not None:
            overrides["surrogate"] = self.surrogate
        return dataclasses.replace(problem, **overrides)


class RunSettings(BaseModel, extra="forbid"):
    x0: Optional[list[float]] = None
    steps: Optional[list[float]] = None
    max_iters: int = Field(1000, ge=1)
    stop_r_ext: Optional[float] = 1e-10
    stop_residual: Optional[float] = None
    record_every: int = Field(1, ge=1)
    mode: RunMode = RunMode.LINEAR

    def run_config(self, t: float) -> RunConfig:
        return RunConfig(
            t=t,
            steps=self.steps,
            max_iters=self.max_iters,
            stop_r_ext=self.stop_r_ext,
            stop_residual=self.stop_residual,
            record_every=self.record_every,
            mode=self.mode,
        )

    def start(self) -> Optional[np.ndarray]:
        return None if self.x0 is None else np.array(self.x0, dtype=float)


class TrapSettings(BaseModel, extra="forbid"):
    eps: float = Field(0.1, gt=0.0, lt=1.0)
    t: float = Field(1.0, gt=0.0)
    K: int = Field(120, ge=1)
    alpha: float = Field(1.0, gt=0.0)
    kernels: list[TrapKind] = [TrapKind.ENTROPY, TrapKind.POLY]
    poly_start: PolyStart = PolyStart.CERTIFIED
    mode: RunMode = RunMode.LINEAR
    plot_script: Optional[Path] = None

    def trap_configs(self) -> dict[TrapKind, TrapConfig]:
        out = {}
        for kind in self.kernels:
            out[kind] = TrapConfig(
                eps=self.eps,
                t=self.t,
                K=self.K,
                alpha=self.alpha if kind is TrapKind.POLY else None,
                mode=self.mode if kind is TrapKind.ENTROPY else RunMode.LINEAR,
                poly_start=self.poly_start,
            )
        return out


class ScanSettings(BaseModel, extra="forbid"):
    assume_convex: Optional[bool] = None
    points: list[list[float]] = []
    tol: float = Field(1e-8, gt=0.0)


class ExperimentConfig(
    BaseSettings,
    env_prefix="BREGMAN_",
    env_nested_delimiter="__",
    validate_default=True,
    extra="ignore",
):
    """One experiment: the instance and the settings of every command"""

    problem: ProblemSettings = ProblemSettings()
    run: RunSettings = RunSettings()
    trap: TrapSettings = TrapSettings()
    scan: ScanSettings = ScanSettings()
    output: Optional[Path] = None
    format: OutputFormat = OutputFormat.CSV
    seed: int = 0


T = TypeVar("T", bound=BaseSettings)


def load_config(path: Path, config_class: type[T] = ExperimentConfig) -> T:
    """Parse and validate a YAML/JSON config file.

    Raises
    ------
    ConfigError
        With a ``path:line: message`` text for unreadable files, YAML syntax errors and
        validation errors (the line of the offending key).
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"{path}:0: cannot read config: {e.strerror or e}") from e

    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else 1
        problem = getattr(e, "problem", None) or str(e)
        raise ConfigError(f"{path}:{line}: {problem}") from e

    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}:1: config must be a mapping, got {type(data).__name__}")

    try:
        return config_class(**data)
    except ValidationError as e:
        error = e.errors()[0]
        loc = tuple(error["loc"])
        line = _line_of(text, loc)
        where = ".".join(str(p) for p in loc)
        raise ConfigError(f"{path}:{line}: {where}: {error['msg']}") from e


def _line_of(text: str, loc: tuple) -> int:
    """1-based line of the deepest key of ``loc`` present in the YAML document"""
    try:
        node = yaml.compose(text)
    except yaml.YAMLError:
        return 1
    line = 1
    for part in loc:
        if isinstance(node, yaml.MappingNode):
            match = next((v for k, v in node.value if k.value == str(part)), None)
            key = next((k for k, v in node.value if k.value == str(part)), None)
            if match is None:
                break
            line = key.start_mark.line + 1
            node = match
        elif isinstance(node, yaml.SequenceNode) and isinstance(part, int) and part < len(node.value):
            node = node.value[part]
            line = node.start_mark.line + 1
        else:
            break
    return line


def dump_config(config: BaseSettings, path: Path) -> Path:
    """Write a config back out as YAML; ``load_config`` of the result is the same config"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(yaml.safe_dump(config.model_dump(mode="json"), sort_keys=False))
    return path
