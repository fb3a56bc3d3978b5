"""Outer iteration loop with step schedules, stopping rules and per-iterate instrumentation"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import StrEnum
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np
import pandas as pd
from loguru import logger
from numpy.typing import ArrayLike, NDArray

from bregman_stationarity.errors import ConstructionError, InvalidStart, NumericalError, SolverError
from bregman_stationarity.kernel import BOUNDARY_TOL, bregman_vec
from bregman_stationarity.problem import MEMBERSHIP_TOL, ProblemInstance, subdifferential_residual
from bregman_stationarity.update import UpdateRequest, UpdateResult, extended_update, log_domain_step

DEFAULT_STOP_R_EXT = 1e-10


class RunMode(StrEnum):
    LINEAR = "linear"
    LOG_DOMAIN = "log_domain"


class TerminalStatus(StrEnum):
    CONVERGED = "converged"
    MAX_ITERS = "max_iters"
    SOLVER_ERROR = "solver_error"


@dataclass(frozen=True)
class RunConfig:
    """Step schedule, stopping rules and recording options.

    Give either a constant step ``t`` or a ``steps`` sequence covering every update.
    A ``None`` threshold disables that stopping rule.
    """

    t: Optional[float] = 1.0
    steps: Optional[Sequence[float]] = None
    max_iters: int = 1000
    stop_r_ext: Optional[float] = DEFAULT_STOP_R_EXT
    stop_residual: Optional[float] = None
    record_every: int = 1
    mode: RunMode = RunMode.LINEAR

    def __post_init__(self):
        object.__setattr__(self, "mode", RunMode(self.mode))
        if self.max_iters < 1:
            raise ConstructionError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.record_every < 1:
            raise ConstructionError(f"record_every must be >= 1, got {self.record_every}")
        if self.steps is not None:
            steps = tuple(float(s) for s in self.steps)
            if len(steps) < self.max_iters:
                raise ConstructionError(f"step sequence has {len(steps)} entries for {self.max_iters} iterations")
            object.__setattr__(self, "steps", steps)
        elif self.t is None:
            raise ConstructionError("give a constant step t or a steps sequence")
        if any(not s > 0.0 for s in self.schedule_values()):
            raise ConstructionError("every step size must be positive")

    def schedule_values(self) -> tuple[float, ...]:
        return self.steps if self.steps is not None else (float(self.t),)

    def step(self, k: int) -> float:
        if self.steps is None:
            return float(self.t)
        return self.steps[min(k, len(self.steps) - 1)]


@dataclass(frozen=True)
class Record:
    k: int
    x: NDArray
    f: float
    r_ext: float
    residual: float
    wall_time: float
    log_x: Optional[NDArray] = None


@dataclass
class Trajectory:
    records: list[Record] = field(default_factory=list)
    terminal_status: Optional[TerminalStatus] = None
    instance: str = ""
    iterations: int = 0

    def __len__(self) -> int:
        return len(self.records)

    @property
    def iterates(self) -> NDArray:
        return np.array([r.x for r in self.records])

    @property
    def final(self) -> Record:
        return self.records[-1]

    def to_frame(self) -> pd.DataFrame:
        """One row per recorded iterate: k, x1..xn, r_ext, residual, f"""
        n = self.records[0].x.size if self.records else 0
        frame = pd.DataFrame(self.iterates.reshape(len(self.records), n), columns=[f"x{i + 1}" for i in range(n)])
        frame.insert(0, "k", [r.k for r in self.records])
        frame["r_ext"] = [r.r_ext for r in self.records]
        frame["residual"] = [r.residual for r in self.records]
        frame["f"] = [r.f for r in self.records]
        return frame

    def to_csv(self, path: Path) -> Path:
        """Write ``to_frame()`` as CSV with full float precision.

        The first row is the start (k = 0), so a run of ``max_iters`` updates with
        ``record_every=1`` writes ``max_iters + 1`` data rows below the header.
        """
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
        return path

    def summary(self) -> dict[str, Any]:
        final = self.final if self.records else None
        return {
            "status": None if self.terminal_status is None else str(self.terminal_status),
            "iters": self.iterations,
            "final_f": None if final is None else final.f,
            "final_r_ext": None if final is None else final.r_ext,
            "final_residual": None if final is None else final.residual,
        }


def run(
    problem: ProblemInstance,
    x0: Optional[ArrayLike],
    cfg: RunConfig,
    log_x0: Optional[ArrayLike] = None,
) -> Trajectory:
    """Iterate x^{k+1} = T^{t_k}(x^k) from a strictly interior start until a stopping rule fires.

    Rows are recorded for k = 0 (the start) through the final iterate. In ``log_domain``
    mode the state is carried as log-coordinates; pass ``log_x0`` to start from a
    point whose coordinates underflow in linear arithmetic.

    Raises
    ------
    InvalidStart
        If the start is not strictly interior or not in X.
    SolverError
        On any numerical failure, with the failing iteration and the partial trajectory.
    """
    if any(s > problem.t_bar * (1.0 + 1e-12) for s in cfg.schedule_values()):
        raise ConstructionError(f"step sizes must not exceed t_bar={problem.t_bar}")
    log_x, x = _start(problem, x0, log_x0, cfg.mode)
    trajectory = Trajectory(instance=problem.name)

    with logger.contextualize(instance=problem.name, kernel=problem.kernel.to_tag(), mode=str(cfg.mode)):
        logger.info("Run start", max_iters=cfg.max_iters, stop_r_ext=cfg.stop_r_ext, stop_residual=cfg.stop_residual)
        start = time.perf_counter()
        k = 0
        try:
            while True:
                t = cfg.step(k)
                measured, step_result = _measure(problem, x, t, need_step=cfg.mode is RunMode.LINEAR)
                r_ext, residual = measured
                record = Record(
                    k=k,
                    x=x.copy(),
                    f=problem.f.value(x),
                    r_ext=r_ext,
                    residual=residual,
                    wall_time=time.perf_counter() - start,
                    log_x=None if log_x is None else log_x.copy(),
                )
                status = _stop_status(cfg, k, r_ext, residual)
                if status is not None or k % cfg.record_every == 0:
                    trajectory.records.append(record)
                if status is not None:
                    trajectory.terminal_status = status
                    break

                if cfg.mode is RunMode.LOG_DOMAIN:
                    log_x = log_domain_step(problem, log_x, t)
                    x = np.exp(log_x)
                else:
                    if step_result is None:
                        step_result = extended_update(UpdateRequest(problem, x, t), tol=0.0)
                    x = step_result.raise_for_status().y
                k += 1
                trajectory.iterations = k
                if not problem.g.contains(x, MEMBERSHIP_TOL):
                    raise SolverError(f"iterate {x.tolist()} left X", iteration=k)
                logger.trace("Step", k=k, r_ext=r_ext, residual=residual)
        except NumericalError as e:
            trajectory.terminal_status = TerminalStatus.SOLVER_ERROR
            logger.error("Run failed", iteration=k, error=str(e))
            raise SolverError(f"iteration {k}: {e}", iteration=k, trajectory=trajectory) from e

        logger.info(
            "Run finished",
            status=str(trajectory.terminal_status),
            iters=trajectory.iterations,
            final_f=trajectory.final.f,
            final_r_ext=trajectory.final.r_ext,
            final_residual=trajectory.final.residual,
        )
    return trajectory


def _start(
    problem: ProblemInstance,
    x0: Optional[ArrayLike],
    log_x0: Optional[ArrayLike],
    mode: RunMode,
) -> tuple[Optional[NDArray], NDArray]:
    log_x = None
    if log_x0 is not None:
        if mode is not RunMode.LOG_DOMAIN:
            raise InvalidStart("log_x0 is only accepted in log_domain mode")
        log_x = np.array(log_x0, dtype=float)
        x = np.exp(log_x)
    else:
        x = np.array(problem.x_int if x0 is None else x0, dtype=float)
        if mode is RunMode.LOG_DOMAIN:
            if np.any(x <= 0.0):
                raise InvalidStart(f"log_domain start needs positive coordinates, got {x.tolist()}")
            log_x = np.log(x)
    if x.shape != (problem.n,):
        raise InvalidStart(f"start has shape {x.shape}, instance has n={problem.n}")
    if not problem.g.contains(x, MEMBERSHIP_TOL):
        raise InvalidStart(f"start {x.tolist()} is not in X")
    if log_x is None and not np.all(problem.kernel.in_interior(x)):
        raise InvalidStart(f"start {x.tolist()} is not strictly inside dom(h)")
    return log_x, x


def _measure(
    problem: ProblemInstance,
    x: NDArray,
    t: float,
    need_step: bool,
) -> tuple[tuple[float, float], Optional[UpdateResult]]:
    """(r_ext, residual) at x, plus the exact-boundary update when it coincides with the measured one"""
    kernel = problem.kernel
    req = UpdateRequest(problem, x, t)
    free = ~kernel.near_boundary(x, BOUNDARY_TOL)
    result = extended_update(req, tol=BOUNDARY_TOL).raise_for_status()
    r_ext = bregman_vec(kernel, result.y[free], x[free]) if np.any(free) else 0.0
    residual, _ = subdifferential_residual(problem, x)
    reusable = need_step and np.array_equal(free, ~kernel.near_boundary(x, 0.0))
    return (r_ext, residual), (result if reusable else None)


def _stop_status(cfg: RunConfig, k: int, r_ext: float, residual: float) -> Optional[TerminalStatus]:
    if cfg.stop_r_ext is not None and r_ext <= cfg.stop_r_ext:
        return TerminalStatus.CONVERGED
    if cfg.stop_residual is not None and residual <= cfg.stop_residual:
        return TerminalStatus.CONVERGED
    if k >= cfg.max_iters:
        return TerminalStatus.MAX_ITERS
    return None
