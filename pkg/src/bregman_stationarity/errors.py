"""Exception hierarchy.

Input errors derive from ``ValueError``/``KeyError`` style builtins and map to CLI
exit code 1; numerical failures derive from :class:`NumericalError` and map to 2.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    from bregman_stationarity.driver import Trajectory


class BregmanError(Exception):
    """Base class for all errors raised by this package"""


class DomainError(BregmanError, ValueError):
    """A point lies outside the domain required by a kernel or constraint set"""


class RangeError(BregmanError, ValueError):
    """A dual value lies outside the range of the kernel derivative"""


class DimensionError(BregmanError, ValueError):
    """Vector or matrix shapes do not agree"""


class ConstructionError(BregmanError, ValueError):
    """An object could not be built from the given parameters"""


class ConfigError(BregmanError, ValueError):
    """An experiment config could not be parsed or validated"""


class UnknownInstance(BregmanError, KeyError):
    """No builtin instance with the requested name"""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class UnsupportedCombination(BregmanError, NotImplementedError):
    """The (kernel, constraint, surrogate) triple has no update solver"""


class InvalidStart(BregmanError, ValueError):
    """The initial point is not strictly interior"""


class NonCompact(BregmanError, ValueError):
    """The constraint set is unbounded where a compact set is required"""


class TooLarge(BregmanError, ValueError):
    """An enumeration would exceed its candidate budget"""


class AssumptionViolation(BregmanError):
    """A problem instance failed one or more assumption clauses"""


class NumericalError(BregmanError, ArithmeticError):
    """Base class for numerical failures"""


class SolverError(NumericalError):
    """An inner solver failed to converge.

    ``iteration`` is the outer iteration index when raised from the driver, and
    ``trajectory`` holds the iterates recorded up to the failure.
    """

    def __init__(
        self,
        message: str,
        iteration: int | None = None,
        trajectory: "Trajectory | None" = None,
        **extra: Any,
    ):
        super().__init__(message)
        self.iteration = iteration
        self.trajectory = trajectory
        self.extra = extra


class UnboundedSubproblem(SolverError):
    """The update subproblem has no minimizer"""


class DegenerateReduction(NumericalError):
    """Freezing the boundary coordinates leaves an empty feasible set"""


class UnderflowError(NumericalError):
    """A quantity underflows in linear-domain arithmetic"""
