"""Finite-step trap constructions near spurious stationary points.

Two explicit starts on the 2-simplex with f = -x1 (entropy and polynomial kernels),
a closed-form exponentiated-gradient step used as an oracle, and an empirical search
for trapping starts on other instances.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from enum import StrEnum
from typing import Optional

import numpy as np
import pandas as pd
from loguru import logger
from numpy.typing import ArrayLike, NDArray

from bregman_stationarity.errors import ConstructionError, DomainError, UnderflowError
from bregman_stationarity.driver import RunConfig, RunMode, Trajectory, run
from bregman_stationarity.kernel import bregman_vec
from bregman_stationarity.problem import ProblemInstance, builtin
from bregman_stationarity.stationarity import Classification, detect
from bregman_stationarity.utils.logging_config import register_levels

SQRT2 = np.sqrt(2.0)

register_levels()


class TrapKind(StrEnum):
    ENTROPY = "entropy"
    POLY = "poly"


class PolyStart(StrEnum):
    CERTIFIED = "certified"
    PRINTED = "printed"
    ENTROPY = "entropy"


@dataclass(frozen=True)
class TrapConfig:
    """Trap radius ``eps``, constant step ``t`` and horizon ``K``.

    Setting ``alpha`` selects the polynomial-kernel instance, otherwise the entropy one.
    """

    eps: float = 0.1
    t: float = 1.0
    K: int = 120
    alpha: Optional[float] = None
    spurious_point: tuple[float, ...] = (0.0, 1.0)
    mode: RunMode = RunMode.LINEAR
    poly_start: PolyStart = PolyStart.CERTIFIED

    def __post_init__(self):
        object.__setattr__(self, "mode", RunMode(self.mode))
        object.__setattr__(self, "poly_start", PolyStart(self.poly_start))
        object.__setattr__(self, "spurious_point", tuple(float(v) for v in self.spurious_point))
        if not 0.0 < self.eps < 1.0:
            raise ConstructionError(f"trap radius eps must be in (0, 1), got {self.eps}")
        if not self.t > 0.0:
            raise ConstructionError(f"step size t must be positive, got {self.t}")
        if self.K < 1:
            raise ConstructionError(f"horizon K must be >= 1, got {self.K}")
        if self.alpha is not None and not self.alpha > 0.0:
            raise ConstructionError(f"polynomial exponent alpha must be positive, got {self.alpha}")
        if self.alpha is not None and self.mode is RunMode.LOG_DOMAIN:
            raise ConstructionError("log_domain mode is only available for the entropy instance")

    @property
    def kind(self) -> TrapKind:
        return TrapKind.ENTROPY if self.alpha is None else TrapKind.POLY

    def problem(self) -> ProblemInstance:
        problem = builtin("entropy_trap") if self.alpha is None else builtin("poly_trap", alpha=self.alpha)
        if self.t > problem.t_bar:
            problem = dataclasses.replace(problem, t_bar=self.t)
        return problem


@dataclass
class TrapOutcome:
    trajectory: Trajectory
    trapped: bool
    ball_trapped: bool
    terminal_trapped: bool
    max_distance: float

    def to_dict(self) -> dict:
        return {
            "trapped": self.trapped,
            "ball_trapped": self.ball_trapped,
            "terminal_trapped": self.terminal_trapped,
            "max_distance": self.max_distance,
            "final_x1": float(self.trajectory.final.x[0]),
        }


# -- starts --------------------------------------------------------------------------


def entropy_trap_start(eps: float, t: float, K: int) -> NDArray:
    """(sqrt(2) eps/2 e^{-tK}, 1 - that) in linear arithmetic"""
    if np.exp(-t * K) < np.finfo(float).tiny:
        raise UnderflowError(f"e^(-tK) with tK={t * K} is subnormal; use log_domain mode")
    x1 = SQRT2 * eps / 2.0 * np.exp(-t * K)
    return np.array([x1, 1.0 - x1])


def entropy_trap_log_start(eps: float, t: float, K: int) -> NDArray:
    log_x1 = np.log(SQRT2 * eps / 2.0) - t * K
    return np.array([log_x1, np.log1p(-np.exp(log_x1))])


def init_entropy_trap(cfg: TrapConfig) -> NDArray:
    """Entropy start; log-coordinates when ``cfg.mode`` is log_domain"""
    if cfg.mode is RunMode.LOG_DOMAIN:
        return entropy_trap_log_start(cfg.eps, cfg.t, cfg.K)
    return entropy_trap_start(cfg.eps, cfg.t, cfg.K)


def _require_alpha(cfg: TrapConfig) -> float:
    if cfg.alpha is None:
        raise ConstructionError("polynomial trap needs alpha")
    return cfg.alpha


def _poly_cap(alpha: float) -> float:
    return 2.0 ** (alpha + 1.0) / (1.0 + 2.0 ** (alpha + 1.0))


def init_poly_trap(cfg: TrapConfig) -> NDArray:
    """x1 = min{(2/(tK + eps^-(alpha+1)))^(1/(alpha+1)), 2^(alpha+1)/(1 + 2^(alpha+1))}"""
    alpha = _require_alpha(cfg)
    p = alpha + 1.0
    x1 = min((2.0 / (cfg.t * cfg.K + cfg.eps ** (-p))) ** (1.0 / p), _poly_cap(alpha))
    return np.array([x1, 1.0 - x1])


def certified_poly_start(cfg: TrapConfig) -> NDArray:
    """x1 = min{(1/2) (tK + eps^-(alpha+1))^(-1/(alpha+1)), 2^(alpha+1)/(1 + 2^(alpha+1))}.

    Keeps the dual sum -phi'(x1^k) = x1^-(alpha+1) - (growth) above eps^-(alpha+1)
    for all K steps, so that x1^K <= eps.
    """
    alpha = _require_alpha(cfg)
    p = alpha + 1.0
    x1 = min(0.5 * (cfg.t * cfg.K + cfg.eps ** (-p)) ** (-1.0 / p), _poly_cap(alpha))
    return np.array([x1, 1.0 - x1])


def trap_start(cfg: TrapConfig) -> NDArray:
    if cfg.kind is TrapKind.ENTROPY:
        return init_entropy_trap(cfg)
    match cfg.poly_start:
        case PolyStart.PRINTED:
            return init_poly_trap(cfg)
        case PolyStart.ENTROPY:
            return entropy_trap_start(cfg.eps, cfg.t, cfg.K)
    return certified_poly_start(cfg)


# -- runs ----------------------------------------------------------------------------


def trap_run_config(cfg: TrapConfig, extra_steps: int = 0) -> RunConfig:
    return RunConfig(
        t=cfg.t,
        max_iters=cfg.K + extra_steps,
        stop_r_ext=None,
        stop_residual=None,
        mode=cfg.mode,
    )


def run_trap(cfg: TrapConfig, x0: Optional[ArrayLike] = None) -> TrapOutcome:
    """Run K steps from the trap start and report both trap criteria.

    ``ball_trapped``: every iterate stays in the eps-ball around the spurious point.
    ``terminal_trapped``: x1^K <= sqrt(2) eps. The entropy verdict uses the ball, the
    polynomial verdict the terminal bound.
    """
    problem = cfg.problem()
    spurious = np.array(cfg.spurious_point)
    report = detect(problem, spurious, cfg.t)
    if report.classification is not Classification.SPURIOUS:
        raise ConstructionError(f"{cfg.spurious_point} is {report.classification}, not spurious, on {problem.name}")

    run_cfg = trap_run_config(cfg)
    with logger.contextualize(trap=str(cfg.kind), eps=cfg.eps, t=cfg.t, K=cfg.K):
        if x0 is not None:
            trajectory = run(problem, x0, run_cfg)
        elif cfg.mode is RunMode.LOG_DOMAIN:
            trajectory = run(problem, None, run_cfg, log_x0=init_entropy_trap(cfg))
        else:
            trajectory = run(problem, trap_start(cfg), run_cfg)

        distances = np.linalg.norm(trajectory.iterates - spurious, axis=1)
        ball_trapped = bool(np.all(distances <= cfg.eps))
        terminal_trapped = bool(trajectory.final.x[0] <= SQRT2 * cfg.eps)
        trapped = ball_trapped if cfg.kind is TrapKind.ENTROPY else terminal_trapped
        logger.log(
            "VERDICT",
            "Trap verdict",
            trapped=trapped,
            ball_trapped=ball_trapped,
            terminal_trapped=terminal_trapped,
            final_x1=float(trajectory.final.x[0]),
        )
    return TrapOutcome(trajectory, trapped, ball_trapped, terminal_trapped, float(np.max(distances)))


def closed_form_eg_step(x: ArrayLike, t: float) -> NDArray:
    """Exponentiated-gradient step for f = -x1 on the 2-simplex"""
    x = np.asarray(x, dtype=float)
    if x.shape != (2,) or np.any(x <= 0.0) or abs(x.sum() - 1.0) > 1e-10:
        raise DomainError(f"closed_form_eg_step needs a strictly interior point of the 2-simplex, got {x.tolist()}")
    if t < 0.0:
        raise DomainError(f"step size must be nonnegative, got {t}")
    x2 = np.exp(-t) * x[1]
    denom = x[0] + x2
    return np.array([x[0] / denom, x2 / denom])


def search_trap_start(
    problem: ProblemInstance,
    spurious_point: ArrayLike,
    eps: float,
    t: float,
    K: int,
    max_halvings: int = 60,
    bisect_iters: int = 30,
) -> Optional[NDArray]:
    """Empirical trapping start on the segment from the spurious point to ``problem.x_int``.

    The distance to the spurious point is halved until K steps stay in the eps-ball,
    then the largest trapping fraction is bracketed by bisection. Returns ``None`` if
    no trapping start is found.
    """
    spurious = np.asarray(spurious_point, dtype=float)
    direction = np.asarray(problem.x_int) - spurious
    cfg = RunConfig(t=t, max_iters=K, stop_r_ext=None, stop_residual=None)

    def trapped(theta: float) -> bool:
        trajectory = run(problem, spurious + theta * direction, cfg)
        return bool(np.all(np.linalg.norm(trajectory.iterates - spurious, axis=1) <= eps))

    theta = 1.0
    for _ in range(max_halvings):
        if trapped(theta):
            break
        theta *= 0.5
    else:
        logger.info("No trapping start found", halvings=max_halvings)
        return None
    if theta == 1.0:
        return spurious + direction

    lo, hi = theta, 2.0 * theta
    for _ in range(bisect_iters):
        mid = 0.5 * (lo + hi)
        if trapped(mid):
            lo = mid
        else:
            hi = mid
    logger.debug("Trapping start found", theta=lo)
    return spurious + lo * direction


def rate_envelope(problem: ProblemInstance, x0: ArrayLike, x_bar: ArrayLike, t: float, k: int) -> float:
    """D_h(x_bar, x0) / (t k), the sublinear bound on f(x^k) - f(x_bar) for convex f"""
    if k < 1:
        raise ConstructionError(f"rate envelope needs k >= 1, got {k}")
    return bregman_vec(problem.kernel, x_bar, x0) / (t * k)


def figure_frame(entropy: Optional[Trajectory], poly: Optional[Trajectory]) -> pd.DataFrame:
    """k, x1_entropy, x1_poly table of the two trap runs"""
    frames = []
    for name, trajectory in (("x1_entropy", entropy), ("x1_poly", poly)):
        if trajectory is None:
            continue
        frames.append(pd.DataFrame({"k": [r.k for r in trajectory.records], name: trajectory.iterates[:, 0]}))
    if not frames:
        return pd.DataFrame(columns=["k", "x1_entropy", "x1_poly"])
    out = frames[0]
    for frame in frames[1:]:
        out = out.merge(frame, on="k", how="outer")
    return out.sort_values("k").reset_index(drop=True)
