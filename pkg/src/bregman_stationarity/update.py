"""Bregman proximal update and the extended update with frozen boundary coordinates.

Both mappings minimize

    gamma(y; x) + g(y) + (1/t) * sum_{i free} D_phi(y_i, x_i)

over the free coordinates, with the remaining coordinates held at their current value.
Per coordinate the first-order conditions give

    y_i(mu) = clip((phi')^{-1}(phi'(x_i) - t*c_i - t*a_i*mu), lower_i, upper_i)

and the single equality multiplier mu is the root of the monotone residual
sum_i a_i y_i(mu) - rhs. Box constraints need no multiplier.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import StrEnum
from typing import Literal, Optional

import numpy as np
from loguru import logger
from numpy.typing import ArrayLike, NDArray
from scipy.special import logsumexp

from bregman_stationarity.errors import (
    ConstructionError,
    DegenerateReduction,
    DimensionError,
    DomainError,
    SolverError,
    UnboundedSubproblem,
    UnsupportedCombination,
)
from bregman_stationarity.kernel import BOUNDARY_TOL, KernelName
from bregman_stationarity.problem import ConstraintKind, ProblemInstance, SurrogateModel
from bregman_stationarity.utils.roots import solve_monotone

DUAL_BRACKET_LIMIT = 1e8
DUAL_MAX_ITER = 200
DUAL_RESIDUAL_TOL = 1e-12
FIXED_POINT_MAX_ITER = 100
FIXED_POINT_TOL = 1e-11
STEP_TOL = 1e-12

Method = Literal["auto", "dual"]


class UpdateStatus(StrEnum):
    OK = "ok"
    UNBOUNDED = "unbounded"
    MAX_ITER = "max_iter"


@dataclass(frozen=True, eq=False)
class UpdateRequest:
    """One update at iterate ``x`` with step ``t`` in (0, t_bar]"""

    problem: ProblemInstance
    x: NDArray
    t: float

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        if x.shape != (self.problem.n,):
            raise DimensionError(f"iterate has shape {x.shape}, instance has n={self.problem.n}")
        if not 0.0 < self.t <= self.problem.t_bar * (1.0 + STEP_TOL):
            raise ConstructionError(f"step size t={self.t} outside (0, t_bar={self.problem.t_bar}]")
        if not self.problem.g.contains(x):
            raise DomainError(f"iterate {x.tolist()} is not in X")
        if not np.all(self.problem.kernel.in_closure(x)):
            raise DomainError(f"iterate {x.tolist()} leaves cl(dom phi) of {self.problem.kernel}")
        x.setflags(write=False)
        object.__setattr__(self, "x", x)


@dataclass
class UpdateResult:
    y: NDArray
    dual_mu: NDArray
    status: UpdateStatus = UpdateStatus.OK
    inner_iters: int = 0

    @property
    def ok(self) -> bool:
        return self.status is UpdateStatus.OK

    def raise_for_status(self) -> UpdateResult:
        if self.status is UpdateStatus.UNBOUNDED:
            raise UnboundedSubproblem("update subproblem has no minimizer", y=self.y, dual_mu=self.dual_mu)
        if self.status is UpdateStatus.MAX_ITER:
            raise SolverError(f"update solver stopped after {self.inner_iters} inner iterations", y=self.y)
        return self


# -- public operations ---------------------------------------------------------------


def bregman_update(req: UpdateRequest, method: Method = "auto") -> UpdateResult:
    """T^t(x) for strictly interior x"""
    kernel = req.problem.kernel
    if not np.all(kernel.in_interior(req.x)):
        raise DomainError(f"bregman_update needs a strictly interior iterate, got {req.x.tolist()}")
    return _solve(req, np.ones(req.problem.n, dtype=bool), method)


def extended_update(req: UpdateRequest, tol: float = BOUNDARY_TOL, method: Method = "auto") -> UpdateResult:
    """Extended mapping: coordinates on the kernel boundary stay where they are.

    ``tol`` is the relative boundary tolerance of the classification; ``tol=0`` only
    freezes coordinates exactly at an endpoint.
    """
    free = ~req.problem.kernel.near_boundary(req.x, tol)
    return _solve(req, free, method)


def log_domain_step(problem: ProblemInstance, log_x: ArrayLike, t: float) -> NDArray:
    """Exponentiated-gradient step carried out on log-coordinates.

    Only for the Shannon kernel on a simplex with a constant surrogate gradient; keeps
    coordinates far below the smallest double representable.
    """
    if not _closed_form_eligible(problem):
        raise UnsupportedCombination("log-domain steps need shannon + simplex + linear surrogate")
    log_x = np.asarray(log_x, dtype=float)
    if log_x.shape != (problem.n,):
        raise DimensionError(f"log iterate has shape {log_x.shape}, instance has n={problem.n}")
    if not 0.0 < t <= problem.t_bar * (1.0 + STEP_TOL):
        raise ConstructionError(f"step size t={t} outside (0, t_bar={problem.t_bar}]")
    grad = problem.f.grad(np.exp(log_x))
    z = log_x - t * grad
    return z - logsumexp(z)


def optimality_residual(req: UpdateRequest, result: UpdateResult, free: Optional[NDArray] = None) -> float:
    """KKT residual of the subproblem at ``result.y`` over free, unclipped coordinates"""
    problem, x, t, y = req.problem, req.x, req.t, result.y
    kernel = problem.kernel
    free = np.ones(problem.n, dtype=bool) if free is None else free
    at_lower, at_upper = problem.g.active(y)
    inner = free & kernel.in_interior(y) & ~at_lower & ~at_upper
    grad = problem.surrogate_grad(y, x)
    mu = np.nan_to_num(result.dual_mu)
    kkt = grad + (problem.g.A.T @ mu if problem.g.m else 0.0)
    kkt = kkt[inner] + (kernel.phi_prime(y[inner]) - kernel.phi_prime(x[inner])) / t
    return float(np.linalg.norm(kkt)) if kkt.size else 0.0


def subproblem_value(req: UpdateRequest, y: ArrayLike, free: Optional[NDArray] = None) -> float:
    """gamma(y; x) + g(y) + (1/t) sum_{i free} D_phi(y_i, x_i)"""
    problem, x = req.problem, req.x
    y = np.asarray(y, dtype=float)
    free = np.ones(problem.n, dtype=bool) if free is None else free
    if not problem.g.contains(y):
        return np.inf
    div = problem.kernel.bregman(y[free], x[free])
    return problem.surrogate_value(y, x) + float(np.sum(div)) / req.t


# -- solver --------------------------------------------------------------------------


def _closed_form_eligible(problem: ProblemInstance) -> bool:
    constant_grad = problem.surrogate is SurrogateModel.LINEAR or (
        problem.surrogate is SurrogateModel.FULL and problem.f.affine
    )
    return problem.kernel.name is KernelName.SHANNON and problem.g.kind is ConstraintKind.SIMPLEX and constant_grad


def _solve(req: UpdateRequest, free: NDArray[np.bool_], method: Method) -> UpdateResult:
    problem = req.problem
    if problem.g.m > 1:
        raise UnsupportedCombination(f"polytopes with m={problem.g.m} equality rows need a multi-dimensional dual")
    if problem.surrogate is SurrogateModel.FULL and not problem.f.affine:
        raise UnsupportedCombination("the full surrogate is only supported for affine objectives")

    x, t = req.x, req.t
    grad_x = problem.f.grad(x)
    if problem.surrogate is not SurrogateModel.QUADRATIC_DIAG:
        result = _solve_frozen(req, free, grad_x, method)
        logger.trace("Update", status=result.status, inner_iters=result.inner_iters)
        return result

    # frozen-curvature fixed point on c(y) = grad f(x) + diag(hess) * (y - x)
    hess = problem.f.hess_diag(x)
    y = x.copy()
    omega, last_step = 1.0, np.inf
    iters = 0
    for it in range(1, FIXED_POINT_MAX_ITER + 1):
        c = grad_x + hess * (y - x)
        inner = _solve_frozen(req, free, c, method)
        iters += inner.inner_iters
        if not inner.ok:
            inner.inner_iters = iters
            return inner
        step = float(np.max(np.abs(inner.y - y), initial=0.0))
        if step <= FIXED_POINT_TOL:
            return UpdateResult(inner.y, inner.dual_mu, UpdateStatus.OK, iters + it)
        if step > last_step:
            omega *= 0.5
        last_step = step
        y = (1.0 - omega) * y + omega * inner.y
    logger.debug("Quadratic surrogate fixed point did not converge", step=last_step, omega=omega)
    return UpdateResult(y, inner.dual_mu, UpdateStatus.MAX_ITER, iters + FIXED_POINT_MAX_ITER)


def _solve_frozen(req: UpdateRequest, free: NDArray[np.bool_], c: NDArray, method: Method) -> UpdateResult:
    """Subproblem with a constant surrogate gradient ``c``"""
    problem, x, t = req.problem, req.x, req.t
    kernel, g = problem.kernel, problem.g
    n = problem.n
    y = x.copy()
    idx = np.flatnonzero(free)
    lower, upper = g.lower[idx], g.upper[idx]
    s = kernel.phi_prime(x[idx]) - t * c[idx] if idx.size else np.zeros(0)

    def coords(mu: float, a: NDArray) -> NDArray:
        with np.errstate(over="ignore", invalid="ignore"):
            return np.clip(kernel.mirror_inverse(s - t * a * mu), lower, upper)

    if g.m == 0:
        y[idx] = coords(0.0, np.zeros(idx.size))
        status = UpdateStatus.OK if np.all(np.isfinite(y)) else UpdateStatus.UNBOUNDED
        return UpdateResult(y, np.zeros(0), status, 0)

    a_full = g.A[0]
    a = a_full[idx]
    rhs = float(g.b[0] - a_full[~free] @ x[~free])
    tol = DUAL_RESIDUAL_TOL * max(1.0, abs(rhs))

    # coordinates outside the equality row move independently of mu
    coupled = a != 0.0
    if np.any(~coupled):
        y[idx[~coupled]] = coords(0.0, a)[~coupled]

    single = _single_point(a[coupled], lower[coupled], upper[coupled], rhs, tol)
    if single is not None:
        y[idx[coupled]] = single
        return _finish(y, np.array([_implied_mu(req, single, s[coupled], a[coupled])]), 0)

    if method == "auto" and _closed_form_eligible(problem) and np.all(coupled):
        z = np.log(x[idx]) - t * c[idx]
        log_norm = logsumexp(z)
        y[idx] = rhs * np.exp(z - log_norm)
        return _finish(y, np.array([(log_norm - np.log(rhs)) / t]), 0)

    count = 0

    def residual(mu: float) -> float:
        nonlocal count
        count += 1
        return float(a[coupled] @ coords(mu, a)[coupled]) - rhs

    def derivative(mu: float) -> float:
        yc = coords(mu, a)[coupled]
        ac = a[coupled]
        live = kernel.in_interior(yc) & (yc > lower[coupled]) & (yc < upper[coupled])
        return float(-t * np.sum(ac[live] ** 2 / kernel.phi_double_prime(yc[live])))

    bracket = _bracket(residual)
    if bracket is None:
        logger.debug("Dual bracket not found", limit=DUAL_BRACKET_LIMIT, rhs=rhs)
        y[idx[coupled]] = np.nan
        return UpdateResult(y, np.array([np.nan]), UpdateStatus.UNBOUNDED, count)
    try:
        mu = _solve_dual(residual, derivative, bracket, tol)
    except SolverError:
        y[idx[coupled]] = coords(0.5 * sum(bracket), a)[coupled]
        return UpdateResult(y, np.array([0.5 * sum(bracket)]), UpdateStatus.MAX_ITER, count)
    y[idx[coupled]] = coords(mu, a)[coupled]
    return _finish(y, np.array([mu]), count)


def _solve_dual(residual, derivative, bracket: tuple[float, float], tol: float) -> float:
    lo, hi = bracket
    return solve_monotone(residual, lo, hi, derivative=derivative, xtol=0.0, ftol=tol, maxiter=DUAL_MAX_ITER)


def _finish(y: NDArray, mu: NDArray, count: int) -> UpdateResult:
    status = UpdateStatus.OK if np.all(np.isfinite(y)) else UpdateStatus.UNBOUNDED
    return UpdateResult(y, mu, status, count)


def _bracket(residual) -> Optional[tuple[float, float]]:
    """Bracket the root of a nonincreasing residual by doubling away from mu = 0"""
    r0 = residual(0.0)
    if r0 == 0.0:
        return 0.0, 0.0
    direction = 1.0 if r0 > 0.0 else -1.0
    near, step = 0.0, 1.0
    while step <= DUAL_BRACKET_LIMIT:
        far = direction * step
        r = residual(far)
        if (direction > 0.0 and r <= 0.0) or (direction < 0.0 and r >= 0.0):
            return min(near, far), max(near, far)
        near, step = far, 2.0 * step
    return None


def _single_point(a: NDArray, lower: NDArray, upper: NDArray, rhs: float, tol: float) -> Optional[NDArray]:
    """The unique point of {a'y = rhs, lower <= y <= upper} when there is only one.

    Raises
    ------
    DegenerateReduction
        If the reduced set is empty.
    """
    if a.size == 0:
        if abs(rhs) > tol:
            raise DegenerateReduction(f"no free coordinate left to meet the equality (residual {rhs})")
        return np.zeros(0)
    if a.size == 1:
        value = rhs / a[0]
        if value < lower[0] - tol or value > upper[0] + tol:
            raise DegenerateReduction(f"reduced equality forces y={value} outside [{lower[0]}, {upper[0]}]")
        return np.array([np.clip(value, lower[0], upper[0])])
    low_end = np.where(a > 0.0, lower, upper)
    high_end = np.where(a > 0.0, upper, lower)
    with np.errstate(invalid="ignore"):
        reach_lo = float(np.sum(a * low_end))
        reach_hi = float(np.sum(a * high_end))
    if rhs < reach_lo - tol or rhs > reach_hi + tol:
        raise DegenerateReduction(f"reduced equality rhs={rhs} outside the reachable range [{reach_lo}, {reach_hi}]")
    if np.isfinite(reach_lo) and abs(rhs - reach_lo) <= tol:
        return low_end.copy()
    if np.isfinite(reach_hi) and abs(rhs - reach_hi) <= tol:
        return high_end.copy()
    return None


def _implied_mu(req: UpdateRequest, y: NDArray, s: NDArray, a: NDArray) -> float:
    """Multiplier read off the first coordinate whose value is strictly interior"""
    kernel = req.problem.kernel
    for j, value in enumerate(y):
        if kernel.in_interior(value):
            return float((s[j] - kernel.phi_prime(value)) / (req.t * a[j]))
    return np.nan
