"""Problem model: smooth objective, constraint set, surrogate choice and kernel pairing.

Also hosts the assumption checker, the builtin instances and the subdifferential
residual used as ground-truth stationarity.
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Any, Callable, Optional

import numpy as np
from loguru import logger
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import null_space

from bregman_stationarity.errors import (
    BregmanError,
    ConstructionError,
    DimensionError,
    DomainError,
    UnknownInstance,
)
from bregman_stationarity.kernel import KernelSpec, boundary_tolerance
from bregman_stationarity.utils.nnls import nnls
from bregman_stationarity.utils import polytope

MEMBERSHIP_TOL = 1e-10
FD_REL_TOL = 1e-5
TANGENCY_TOL = 1e-12
GRADIENT_SAMPLES = 100


# -- objective -----------------------------------------------------------------------


@dataclass(frozen=True)
class SmoothObjective:
    """Value and gradient oracles of f, with an optional Hessian diagonal.

    ``affine`` and ``convex`` are structural flags the caller vouches for; the
    ``linear`` and ``quadratic`` constructors set them from the coefficients.
    """

    value: Callable[[NDArray], float]
    grad: Callable[[NDArray], NDArray]
    hess_diag: Optional[Callable[[NDArray], NDArray]] = None
    label: str = ""
    n: Optional[int] = None
    affine: bool = False
    convex: Optional[bool] = None
    spec: Optional[dict[str, Any]] = None

    @classmethod
    def linear(cls, c: ArrayLike, const: float = 0.0, label: str = "") -> SmoothObjective:
        c = np.array(c, dtype=float).ravel()
        c.setflags(write=False)
        return cls(
            value=lambda x: float(c @ x) + const,
            grad=lambda x: c.copy(),
            hess_diag=lambda x: np.zeros_like(c),
            label=label or f"linear {c.tolist()}",
            n=c.size,
            affine=True,
            convex=True,
            spec={"linear": c.tolist()},
        )

    @classmethod
    def quadratic(cls, Q: ArrayLike, q: ArrayLike, const: float = 0.0, label: str = "") -> SmoothObjective:
        """f(x) = 1/2 x'Qx + q'x + const with Q symmetrized"""
        Q = np.atleast_2d(np.array(Q, dtype=float))
        q = np.array(q, dtype=float).ravel()
        if Q.shape != (q.size, q.size):
            raise DimensionError(f"quadratic objective: Q is {Q.shape} but q has {q.size} entries")
        Q = 0.5 * (Q + Q.T)
        Q.setflags(write=False)
        q.setflags(write=False)
        diag = np.diag(Q).copy()
        affine = not np.any(Q)
        return cls(
            value=lambda x: float(0.5 * x @ Q @ x + q @ x) + const,
            grad=lambda x: Q @ x + q,
            hess_diag=lambda x: diag.copy(),
            label=label or "quadratic",
            n=q.size,
            affine=affine,
            convex=bool(np.min(np.linalg.eigvalsh(Q)) >= -1e-12),
            spec={"quadratic": {"Q": Q.tolist(), "q": q.tolist()}},
        )

    @classmethod
    def from_config(cls, spec: dict[str, Any]) -> SmoothObjective:
        """``{"linear": c}`` or ``{"quadratic": {"Q": .., "q": ..}}``"""
        with _malformed("objective", spec):
            if "linear" in spec:
                return cls.linear(spec["linear"])
            if "quadratic" in spec:
                return cls.quadratic(spec["quadratic"]["Q"], spec["quadratic"]["q"])
        raise ConstructionError(f"objective needs a 'linear' or 'quadratic' entry, got {sorted(spec)}")


@contextmanager
def _malformed(what: str, spec: Any):
    """Re-raise lookup and conversion failures on a config entry as ConstructionError"""
    try:
        yield
    except BregmanError:
        raise
    except KeyError as e:
        raise ConstructionError(f"{what} entry {spec!r} is missing {e}") from e
    except (TypeError, ValueError) as e:
        raise ConstructionError(f"malformed {what} entry {spec!r}: {e}") from e


# -- constraint set ------------------------------------------------------------------


class ConstraintKind(StrEnum):
    SIMPLEX = "simplex"
    POLYTOPE = "polytope"
    BOX = "box"


@dataclass(frozen=True, eq=False)
class ConstraintSet:
    """X as {Ax = b, x >= 0} (simplex, polytope) or {l <= x <= u} (box).

    Polytopes carry a strictly feasible point (every coordinate positive) found by a
    max-slack LP at construction.
    """

    kind: ConstraintKind
    A: NDArray
    b: NDArray
    lower: NDArray
    upper: NDArray
    interior_point: NDArray = field(init=False)

    def __post_init__(self):
        for name in ("A", "b", "lower", "upper"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.kind is ConstraintKind.BOX:
            if np.any(self.lower >= self.upper):
                raise ConstructionError(f"box needs lower < upper, got {self.lower.tolist()}, {self.upper.tolist()}")
            point = _box_midpoint(self.lower, self.upper)
        else:
            point, slack = polytope.max_slack_point(self.A, self.b, self.lower, self.upper)
            if point is None or slack <= 0.0:
                raise ConstructionError(f"polytope has no strictly feasible point (max slack {slack})")
        point.setflags(write=False)
        object.__setattr__(self, "interior_point", point)

    @classmethod
    def simplex(cls, n: int) -> ConstraintSet:
        if n < 1:
            raise ConstructionError(f"simplex dimension must be >= 1, got {n}")
        return cls(ConstraintKind.SIMPLEX, np.ones((1, n)), np.ones(1), np.zeros(n), np.full(n, np.inf))

    @classmethod
    def polytope(cls, A: ArrayLike, b: ArrayLike) -> ConstraintSet:
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.atleast_1d(np.asarray(b, dtype=float))
        if b.shape != (A.shape[0],):
            raise DimensionError(f"polytope: A is {A.shape} but b is {b.shape}")
        n = A.shape[1]
        return cls(ConstraintKind.POLYTOPE, A, b, np.zeros(n), np.full(n, np.inf))

    @classmethod
    def box(cls, lower: ArrayLike, upper: ArrayLike) -> ConstraintSet:
        lower = np.atleast_1d(np.asarray(lower, dtype=float))
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        if lower.shape != upper.shape:
            raise DimensionError(f"box: lower is {lower.shape} but upper is {upper.shape}")
        return cls(ConstraintKind.BOX, np.zeros((0, lower.size)), np.zeros(0), lower, upper)

    @classmethod
    def from_config(cls, spec: dict[str, Any]) -> ConstraintSet:
        """``{"simplex": n}``, ``{"polytope": {"A": .., "b": ..}}`` or ``{"box": {"lower": .., "upper": ..}}``"""
        with _malformed("constraint", spec):
            if "simplex" in spec:
                n = spec["simplex"]
                if isinstance(n, bool) or not isinstance(n, int):
                    raise ConstructionError(f"simplex dimension must be an integer, got {n!r}")
                return cls.simplex(n)
            if "polytope" in spec:
                return cls.polytope(spec["polytope"]["A"], spec["polytope"]["b"])
            if "box" in spec:
                lower = [-np.inf if v is None else v for v in spec["box"]["lower"]]
                upper = [np.inf if v is None else v for v in spec["box"]["upper"]]
                return cls.box(lower, upper)
        raise ConstructionError(f"constraint needs 'simplex', 'polytope' or 'box', got {sorted(spec)}")

    def to_config(self) -> dict[str, Any]:
        if self.kind is ConstraintKind.SIMPLEX:
            return {"simplex": self.n}
        if self.kind is ConstraintKind.POLYTOPE:
            return {"polytope": {"A": self.A.tolist(), "b": self.b.tolist()}}
        return {
            "box": {
                "lower": [None if np.isinf(v) else float(v) for v in self.lower],
                "upper": [None if np.isinf(v) else float(v) for v in self.upper],
            }
        }

    @property
    def n(self) -> int:
        return self.lower.size

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def is_box(self) -> bool:
        return self.kind is ConstraintKind.BOX

    @property
    def compact(self) -> bool:
        if self.is_box:
            return bool(np.all(np.isfinite(self.lower)) and np.all(np.isfinite(self.upper)))
        return polytope.is_compact(self.A)

    def contains(self, x: ArrayLike, tol: float = MEMBERSHIP_TOL) -> bool:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            return False
        scale = tol * max(1.0, float(np.max(np.abs(self.b), initial=0.0)))
        if self.m and np.max(np.abs(self.A @ x - self.b)) > scale:
            return False
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    def active(self, x: NDArray) -> tuple[NDArray[np.bool_], NDArray[np.bool_]]:
        """Masks of coordinates sitting on a finite lower / upper bound of X"""
        at_lower = np.isfinite(self.lower) & (x - self.lower <= boundary_tolerance(self.lower))
        at_upper = np.isfinite(self.upper) & (self.upper - x <= boundary_tolerance(self.upper))
        return at_lower, at_upper

    def vertices(self) -> NDArray:
        """Vertices of a polytope, corners of a bounded box"""
        if self.is_box:
            if not self.compact:
                return np.zeros((0, self.n))
            grids = np.meshgrid(*[(lo, hi) for lo, hi in zip(self.lower, self.upper)], indexing="ij")
            return np.stack([g.ravel() for g in grids], axis=1)
        return polytope.enumerate_vertices(self.A, self.b)

    def coordinate_ranges(self) -> tuple[NDArray, NDArray]:
        if self.is_box:
            return self.lower.copy(), self.upper.copy()
        return polytope.coordinate_ranges(self.A, self.b)


def _box_midpoint(lower: NDArray, upper: NDArray) -> NDArray:
    point = np.where(np.isfinite(lower), lower + 1.0, 0.0)
    point = np.where(np.isfinite(upper) & ~np.isfinite(lower), upper - 1.0, point)
    both = np.isfinite(lower) & np.isfinite(upper)
    return np.where(both, 0.5 * (lower + upper), point)


# -- surrogate and instance ----------------------------------------------------------


class SurrogateModel(StrEnum):
    LINEAR = "linear"
    QUADRATIC_DIAG = "quadratic_diag"
    FULL = "full"


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """min f(x) + g(x) with g the indicator of X, paired with a kernel and a surrogate.

    ``x_int`` is a point of X strictly inside dom(h), found at construction.
    """

    f: SmoothObjective
    g: ConstraintSet
    kernel: KernelSpec
    surrogate: SurrogateModel = SurrogateModel.LINEAR
    t_bar: float = 1.0
    name: str = "custom"
    x_int: NDArray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "surrogate", SurrogateModel(self.surrogate))
        if self.f.n is not None and self.f.n != self.g.n:
            raise DimensionError(f"objective has dimension {self.f.n} but the constraint set has {self.g.n}")
        if not self.t_bar > 0.0:
            raise ConstructionError(f"t_bar must be positive, got {self.t_bar}")
        if self.surrogate is SurrogateModel.QUADRATIC_DIAG and self.f.hess_diag is None:
            raise ConstructionError("quadratic_diag surrogate needs a Hessian diagonal oracle")
        x_int, slack = self._strictly_feasible_point()
        if x_int is None or slack <= 0.0:
            raise ConstructionError(f"no point of X strictly inside dom({self.kernel}); max slack {slack}")
        x_int.setflags(write=False)
        object.__setattr__(self, "x_int", x_int)

    def _strictly_feasible_point(self) -> tuple[Optional[NDArray], float]:
        lower = np.maximum(self.g.lower, self.kernel.a)
        upper = np.minimum(self.g.upper, self.kernel.c)
        if self.g.is_box:
            if np.any(lower >= upper):
                return None, -np.inf
            x = _box_midpoint(lower, upper)
            gap = np.minimum(x - lower, upper - x)
            return x, float(min(1.0, np.min(gap)))
        return polytope.max_slack_point(self.g.A, self.g.b, lower, upper)

    @property
    def n(self) -> int:
        return self.g.n

    def F(self, x: ArrayLike) -> float:
        """f + indicator of X"""
        x = np.asarray(x, dtype=float)
        if not self.g.contains(x):
            return np.inf
        return self.f.value(x)

    def surrogate_value(self, y: NDArray, x: NDArray, grad_x: Optional[NDArray] = None) -> float:
        if self.surrogate is SurrogateModel.FULL:
            return self.f.value(y)
        grad_x = self.f.grad(x) if grad_x is None else grad_x
        value = self.f.value(x) + float(grad_x @ (y - x))
        if self.surrogate is SurrogateModel.QUADRATIC_DIAG:
            value += 0.5 * float(self.f.hess_diag(x) @ (y - x) ** 2)
        return value

    def surrogate_grad(self, y: NDArray, x: NDArray, grad_x: Optional[NDArray] = None) -> NDArray:
        if self.surrogate is SurrogateModel.FULL:
            return self.f.grad(y)
        grad_x = self.f.grad(x) if grad_x is None else grad_x
        if self.surrogate is SurrogateModel.QUADRATIC_DIAG:
            return grad_x + self.f.hess_diag(x) * (y - x)
        return np.asarray(grad_x, dtype=float)

    def to_config(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "instance": self.name,
            "kernel": self.kernel.to_tag(),
            "surrogate": str(self.surrogate),
            "t": self.t_bar,
        }
        if self.name == "poly_trap":
            out["alpha"] = self.kernel.param
        if self.name == "custom":
            out["objective"] = self.f.spec
            out["constraint"] = self.g.to_config()
        return out


# -- assumptions ---------------------------------------------------------------------


@dataclass(frozen=True)
class ClauseResult:
    passed: bool
    detail: str


@dataclass
class AssumptionReport:
    """Pass/fail per assumption clause"""

    instance: str
    clauses: dict[str, ClauseResult] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.clauses.values())

    @property
    def failed(self) -> list[str]:
        return [name for name, c in self.clauses.items() if not c.passed]

    def to_dict(self) -> dict[str, Any]:
        return {
            "instance": self.instance,
            "passed": self.passed,
            "clauses": {name: {"passed": c.passed, "detail": c.detail} for name, c in self.clauses.items()},
        }


def check_assumptions(problem: ProblemInstance, seed: int = 0) -> AssumptionReport:
    """Run every clause; never raises, failures land in the report"""
    report = AssumptionReport(problem.name)
    checks = {
        "domain_inclusion": _check_domain_inclusion,
        "strict_feasibility": _check_strict_feasibility,
        "well_posedness": _check_well_posedness,
        "gradient_consistency": lambda p: _check_gradient_consistency(p, seed),
        "surrogate_tangency": _check_surrogate_tangency,
    }
    for name, check in checks.items():
        try:
            report.clauses[name] = check(problem)
        except Exception as e:  # noqa: BLE001
            report.clauses[name] = ClauseResult(False, f"check raised {type(e).__name__}: {e}")
    logger.debug("Assumption check", instance=problem.name, failed=report.failed)
    return report


def _check_domain_inclusion(problem: ProblemInstance) -> ClauseResult:
    lo, hi = problem.g.coordinate_ranges()
    k = problem.kernel
    bad = np.flatnonzero((lo < k.a - boundary_tolerance(k.a)) | (hi > k.c + boundary_tolerance(k.c)))
    if bad.size:
        return ClauseResult(False, f"coordinates {bad.tolist()} of X leave cl(dom phi) = [{k.a}, {k.c}]")
    return ClauseResult(True, f"X lies in [{k.a}, {k.c}]^n")


def _check_strict_feasibility(problem: ProblemInstance) -> ClauseResult:
    x, slack = problem._strictly_feasible_point()
    if x is None or slack <= 0.0:
        return ClauseResult(False, f"no point of X strictly inside dom(h) (max slack {slack})")
    return ClauseResult(True, f"strictly feasible point with slack {slack:.3g}")


def _check_well_posedness(problem: ProblemInstance) -> ClauseResult:
    """Compact X, or a closed-domain kernel whose pairing with the surrogate is supercoercive"""
    if problem.g.compact:
        return ClauseResult(True, "X is compact")
    k = problem.kernel
    if not k.closed_domain:
        return ClauseResult(
            False,
            f"X is unbounded and {k} has an open domain: the update subproblem may have no minimizer",
        )
    if not k.supercoercive:
        return ClauseResult(False, f"X is unbounded and {k} is not supercoercive")
    surrogate = problem.surrogate
    if surrogate is SurrogateModel.QUADRATIC_DIAG and not problem.f.convex:
        return ClauseResult(False, "X is unbounded and the quadratic_diag surrogate needs a convex f")
    if surrogate is SurrogateModel.FULL and not problem.f.affine:
        return ClauseResult(False, "X is unbounded and the full surrogate is only tabulated for affine f")
    return ClauseResult(True, f"closed domain, supercoercive {k} with {surrogate} surrogate")


def sample_interior_points(problem: ProblemInstance, count: int, rng: np.random.Generator) -> NDArray:
    """Random points of X strictly inside dom(h), scattered around ``x_int`` along the affine hull"""
    x0 = np.asarray(problem.x_int)
    basis = null_space(problem.g.A) if problem.g.m else np.eye(problem.n)
    lower = np.maximum(problem.g.lower, problem.kernel.a)
    upper = np.minimum(problem.g.upper, problem.kernel.c)
    points = [x0.copy()]
    if basis.shape[1] == 0:
        return np.array(points * count)
    while len(points) < count:
        d = basis @ rng.standard_normal(basis.shape[1])
        d /= np.linalg.norm(d)
        with np.errstate(divide="ignore", invalid="ignore"):
            up = np.where(d > 0, (upper - x0) / d, np.inf)
            down = np.where(d < 0, (lower - x0) / d, np.inf)
        reach = min(float(np.min(up)), float(np.min(down)), 10.0)
        points.append(x0 + rng.uniform(0.05, 0.9) * reach * d)
    return np.array(points[:count])


def _check_gradient_consistency(problem: ProblemInstance, seed: int) -> ClauseResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for x in sample_interior_points(problem, GRADIENT_SAMPLES, rng):
        g = problem.f.grad(x)
        fd = finite_difference_grad(problem.f.value, x)
        err = float(np.linalg.norm(fd - g) / max(1.0, np.linalg.norm(g)))
        worst = max(worst, err)
    if worst > FD_REL_TOL:
        return ClauseResult(False, f"gradient disagrees with finite differences (relative error {worst:.3g})")
    return ClauseResult(True, f"gradient matches finite differences (relative error {worst:.1e})")


def _check_surrogate_tangency(problem: ProblemInstance) -> ClauseResult:
    x = np.asarray(problem.x_int)
    fx, gx = problem.f.value(x), problem.f.grad(x)
    value_gap = abs(problem.surrogate_value(x, x) - fx)
    grad_gap = float(np.linalg.norm(problem.surrogate_grad(x, x) - gx))
    if value_gap > TANGENCY_TOL * max(1.0, abs(fx)) or grad_gap > TANGENCY_TOL * max(1.0, np.linalg.norm(gx)):
        return ClauseResult(False, f"surrogate not tangent at x_int (value gap {value_gap}, gradient gap {grad_gap})")
    return ClauseResult(True, "surrogate value and gradient match f at x_int")


def finite_difference_grad(value: Callable[[NDArray], float], x: NDArray, rel_step: float = 1e-6) -> NDArray:
    out = np.empty_like(x, dtype=float)
    for i in range(x.size):
        h = rel_step * max(1.0, abs(x[i]))
        e = np.zeros_like(x, dtype=float)
        e[i] = h
        out[i] = (value(x + e) - value(x - e)) / (2.0 * h)
    return out


# -- subdifferential residual --------------------------------------------------------


def _check_point(problem: ProblemInstance, x: ArrayLike) -> NDArray:
    x = np.asarray(x, dtype=float)
    if x.shape != (problem.n,):
        raise DimensionError(f"point has shape {x.shape}, instance has n={problem.n}")
    if not problem.g.contains(x):
        raise DomainError(f"point {x.tolist()} is not in X")
    return x


def normal_cone_residual(
    problem: ProblemInstance,
    x: NDArray,
    grad: NDArray,
    rows: Optional[NDArray[np.bool_]] = None,
    multipliers: Optional[NDArray[np.bool_]] = None,
) -> tuple[float, NDArray]:
    """min || (grad + A'mu - lambda)[rows] || over free mu and lambda >= 0 supported on ``multipliers``.

    ``rows`` defaults to every coordinate and ``multipliers`` to the active constraint
    coordinates of X. Returns the residual and the full witness vector
    ``grad + A'mu - lambda``.
    """
    n = problem.n
    rows = np.ones(n, dtype=bool) if rows is None else rows
    at_lower, at_upper = problem.g.active(x)
    if multipliers is None:
        multipliers = at_lower | at_upper
    grad = np.asarray(grad, dtype=float)

    if problem.g.is_box:
        # normal cone of a box is a product of half-lines
        p = grad.copy()
        lower_only = multipliers & at_lower & ~at_upper
        upper_only = multipliers & at_upper & ~at_lower
        both = multipliers & at_lower & at_upper
        p[lower_only] = np.minimum(grad[lower_only], 0.0)
        p[upper_only] = np.maximum(grad[upper_only], 0.0)
        p[both] = 0.0
        return float(np.linalg.norm(p[rows])), p

    A = problem.g.A
    bound = np.flatnonzero(multipliers)
    E = np.zeros((n, bound.size))
    E[bound, np.arange(bound.size)] = 1.0
    M = np.hstack([-E, A.T])
    maxiter = 50 * (problem.g.m + n)
    z, rnorm, iters = nnls(M[rows], -grad[rows], k=bound.size, maxiter=maxiter)
    lam, mu = z[: bound.size], z[bound.size :]
    p = grad + A.T @ mu - E @ lam
    logger.debug("Normal cone residual", rnorm=rnorm, iterations=iters, active=bound.tolist())
    return float(np.linalg.norm(p[rows])), p


def subdifferential_residual(problem: ProblemInstance, x: ArrayLike) -> tuple[float, NDArray]:
    """Distance from 0 to grad f(x) + N_X(x), with the minimizing element as witness"""
    x = _check_point(problem, x)
    return normal_cone_residual(problem, x, problem.f.grad(x))


# -- builtins ------------------------------------------------------------------------


def _lp_simplex(name: str, kernel: KernelSpec) -> ProblemInstance:
    return ProblemInstance(
        f=SmoothObjective.linear([-1.0, 0.0], label="-x1"),
        g=ConstraintSet.simplex(2),
        kernel=kernel,
        surrogate=SurrogateModel.LINEAR,
        t_bar=1.0,
        name=name,
    )


def _nonconvex_simplex() -> ProblemInstance:
    return ProblemInstance(
        f=SmoothObjective(
            value=lambda x: float(-x[0] ** 2 + x[1]),
            grad=lambda x: np.array([-2.0 * x[0], 1.0]),
            hess_diag=lambda x: np.array([-2.0, 0.0]),
            label="-x1^2 + x2",
            n=2,
            convex=False,
        ),
        g=ConstraintSet.simplex(2),
        kernel=KernelSpec.shannon(),
        surrogate=SurrogateModel.LINEAR,
        name="nonconvex_simplex",
    )


def _illposed_inverse() -> ProblemInstance:
    return ProblemInstance(
        f=SmoothObjective.quadratic([[2.0]], [-6.0], const=9.0, label="(x - 3)^2"),
        g=ConstraintSet.box([0.0], [np.inf]),
        kernel=KernelSpec.polynomial(1.0),
        surrogate=SurrogateModel.LINEAR,
        name="illposed_inverse",
    )


BUILTINS = ("lp_simplex", "nonconvex_simplex", "illposed_inverse", "entropy_trap", "poly_trap")


def builtin(name: str, alpha: Optional[float] = None) -> ProblemInstance:
    """Builtin instance by name; ``poly_trap`` takes alpha (default 1) or the ``poly_trap:alpha`` form"""
    head, _, arg = name.strip().partition(":")
    if arg:
        if head != "poly_trap":
            raise UnknownInstance(f"instance {head!r} takes no parameter")
        try:
            alpha = float(arg)
        except ValueError:
            raise UnknownInstance(f"bad alpha in {name!r}") from None
    match head:
        case "lp_simplex":
            return _lp_simplex("lp_simplex", KernelSpec.shannon())
        case "entropy_trap":
            return _lp_simplex("entropy_trap", KernelSpec.shannon())
        case "poly_trap":
            return _lp_simplex("poly_trap", KernelSpec.polynomial(1.0 if alpha is None else alpha))
        case "nonconvex_simplex":
            return _nonconvex_simplex()
        case "illposed_inverse":
            return _illposed_inverse()
    raise UnknownInstance(f"unknown instance {name!r}; choose one of {', '.join(BUILTINS)}")
