"""Stationarity measures, coordinate classification and spurious stationary points"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import StrEnum
from typing import Any, Optional

import numpy as np
from loguru import logger
from numpy.typing import ArrayLike, NDArray

from bregman_stationarity.errors import AssumptionViolation, DomainError, NonCompact, TooLarge, UnsupportedCombination
from bregman_stationarity.kernel import BOUNDARY_TOL, KernelSpec, boundary_tolerance, bregman_vec
from bregman_stationarity.problem import ProblemInstance, normal_cone_residual, subdifferential_residual
from bregman_stationarity.update import UpdateRequest, bregman_update, extended_update

STATIONARITY_TOL = 1e-8
MEASURE_TOL = 1e-9
MAX_ENUMERATION_DIM = 12


class Classification(StrEnum):
    STATIONARY = "stationary"
    SPURIOUS = "spurious"
    NONSTATIONARY = "nonstationary"


@dataclass(frozen=True)
class CoordinatePartition:
    interior_idx: tuple[int, ...]
    boundary_idx: tuple[int, ...]
    tol: float

    @property
    def n(self) -> int:
        return len(self.interior_idx) + len(self.boundary_idx)

    @property
    def interior_mask(self) -> NDArray[np.bool_]:
        mask = np.zeros(self.n, dtype=bool)
        mask[list(self.interior_idx)] = True
        return mask


def classify(x: ArrayLike, kernel: KernelSpec, tol: float = BOUNDARY_TOL) -> CoordinatePartition:
    """Split coordinates into interior I(x) and boundary B(x).

    A coordinate is on the boundary when it lies within ``tol * max(1, |endpoint|)`` of
    a finite endpoint of dom(phi).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    outside = (x < kernel.a - boundary_tolerance(kernel.a, tol)) | (x > kernel.c + boundary_tolerance(kernel.c, tol))
    if np.any(outside):
        raise DomainError(f"coordinates {np.flatnonzero(outside).tolist()} of {x.tolist()} lie outside cl(dom phi)")
    boundary = kernel.near_boundary(x, tol)
    return CoordinatePartition(
        interior_idx=tuple(int(i) for i in np.flatnonzero(~boundary)),
        boundary_idx=tuple(int(i) for i in np.flatnonzero(boundary)),
        tol=tol,
    )


def measure_R(problem: ProblemInstance, x: ArrayLike, t: float) -> float:
    """D_h(T^t(x), x) at a strictly interior x"""
    req = UpdateRequest(problem, x, t)
    result = bregman_update(req).raise_for_status()
    return bregman_vec(problem.kernel, result.y, req.x)


def measure_R_ext(problem: ProblemInstance, x: ArrayLike, t: float, tol: float = BOUNDARY_TOL) -> float:
    """Sum over interior coordinates of D_phi(extended_update(x)_i, x_i)"""
    req = UpdateRequest(problem, x, t)
    free = classify(req.x, problem.kernel, tol).interior_mask
    result = extended_update(req, tol).raise_for_status()
    if not np.any(free):
        return 0.0
    return bregman_vec(problem.kernel, result.y[free], req.x[free])


def spurious_feasibility(problem: ProblemInstance, x: ArrayLike, tol: float = BOUNDARY_TOL) -> tuple[float, NDArray]:
    """min ||p_I|| over p in grad f(x) + N_X(x), with the minimizing p"""
    x = np.asarray(x, dtype=float)
    interior = classify(x, problem.kernel, tol).interior_mask
    at_lower, at_upper = problem.g.active(x)
    return normal_cone_residual(
        problem,
        x,
        problem.f.grad(x),
        rows=interior,
        multipliers=(at_lower | at_upper) & interior,
    )


@dataclass
class StationarityReport:
    r_ext: Optional[float]
    euclid_residual: float
    classification: Classification
    witness_p: Optional[NDArray] = None
    spurious_residual: float = np.nan
    partition: Optional[CoordinatePartition] = None
    consistent: bool = True
    x: Optional[NDArray] = field(default=None, repr=False)

    def to_dict(self) -> dict[str, Any]:
        return {
            "x": None if self.x is None else self.x.tolist(),
            "r_ext": self.r_ext,
            "residual": self.euclid_residual,
            "class": str(self.classification),
            "witness": None if self.witness_p is None else self.witness_p.tolist(),
        }


def detect(
    problem: ProblemInstance,
    x: ArrayLike,
    t: Optional[float] = None,
    tol: float = STATIONARITY_TOL,
    boundary_tol: float = BOUNDARY_TOL,
) -> StationarityReport:
    """Classify x as stationary, spurious or nonstationary.

    Multi-row polytopes have no extended update; ``r_ext`` is then ``None`` and the
    classification rests on the two residuals alone.
    """
    t = problem.t_bar if t is None else t
    x_arr = np.asarray(x, dtype=float)
    residual, residual_witness = subdifferential_residual(problem, x_arr)
    partition = classify(x_arr, problem.kernel, boundary_tol)
    spurious, spurious_witness = spurious_feasibility(problem, x_arr, boundary_tol)
    try:
        r_ext = measure_R_ext(problem, x_arr, t, boundary_tol)
    except UnsupportedCombination:
        r_ext = None

    if residual <= tol:
        classification, witness = Classification.STATIONARY, residual_witness
    elif spurious <= tol:
        classification, witness = Classification.SPURIOUS, spurious_witness
    else:
        classification, witness = Classification.NONSTATIONARY, None

    consistent = True
    if classification is not Classification.NONSTATIONARY and r_ext is not None and r_ext > MEASURE_TOL:
        consistent = False
        logger.warning(
            "Zero-residual point with nonzero extended measure",
            classification=str(classification),
            r_ext=r_ext,
            x=x_arr.tolist(),
        )
    logger.debug(
        "Detect",
        x=x_arr.tolist(),
        classification=str(classification),
        r_ext=r_ext,
        residual=residual,
        spurious_residual=spurious,
    )
    return StationarityReport(
        r_ext=r_ext,
        euclid_residual=residual,
        classification=classification,
        witness_p=witness,
        spurious_residual=spurious,
        partition=partition,
        consistent=consistent,
        x=x_arr,
    )


def find_spurious_candidates(
    problem: ProblemInstance,
    assume_convex: Optional[bool] = None,
    t: Optional[float] = None,
    tol: float = STATIONARITY_TOL,
) -> list[tuple[NDArray, StationarityReport]]:
    """Maximizers of a convex f over the vertices of a compact X, each with its detect report.

    ``assume_convex`` defaults to the objective's own flag; convexity is not verified.

    Raises
    ------
    AssumptionViolation
        If f is not declared convex.
    NonCompact
        If X is unbounded.
    TooLarge
        If n exceeds the enumeration limit or the basis count is too large.
    """
    convex = problem.f.convex if assume_convex is None else assume_convex
    if not convex:
        raise AssumptionViolation(
            "vertex maximizers are only spurious for convex f; run detect on chosen points instead"
        )
    if problem.n > MAX_ENUMERATION_DIM:
        raise TooLarge(f"vertex enumeration limited to n <= {MAX_ENUMERATION_DIM}, got n={problem.n}")
    if not problem.g.compact:
        raise NonCompact(f"{problem.g.kind} constraint set is unbounded")

    vertices = problem.g.vertices()
    values = np.array([problem.f.value(v) for v in vertices])
    # a convex f can agree on every vertex and still dip inside X
    probes = [problem.f.value(np.asarray(problem.x_int)), problem.f.value(vertices.mean(axis=0))]
    f_max, f_min = float(np.max(values)), float(min(np.min(values), *probes))
    spread_tol = MEASURE_TOL * max(1.0, abs(f_max))
    if f_max - f_min <= spread_tol:
        logger.info("Objective is constant on the vertices; no spurious maximizers", f=f_max)
        return []
    maximizers = vertices[values >= f_max - spread_tol]
    out = [(v, detect(problem, v, t, tol)) for v in maximizers]
    logger.info(
        "Vertex scan",
        vertices=len(vertices),
        maximizers=len(maximizers),
        spurious=sum(r.classification is Classification.SPURIOUS for _, r in out),
    )
    return out
