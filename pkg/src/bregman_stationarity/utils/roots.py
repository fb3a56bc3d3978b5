"""Safeguarded bisection + Newton for monotone scalar equations"""

from typing import Callable, Optional

import numpy as np
from loguru import logger

from bregman_stationarity.errors import SolverError


def solve_monotone(
    func: Callable[[float], float],
    lo: float,
    hi: float,
    derivative: Optional[Callable[[float], float]] = None,
    xtol: float = 1e-12,
    ftol: float = 0.0,
    maxiter: int = 200,
) -> float:
    """Find a root of a monotone ``func`` on the bracket ``[lo, hi]``.

    ``func(lo)`` and ``func(hi)`` must have opposite signs (or one of them is zero).
    A Newton step is taken whenever ``derivative`` is given and the step lands strictly
    inside the current bracket; otherwise the bracket is bisected.

    Parameters
    ----------
    func : callable
        Monotone (increasing or decreasing) scalar function.
    lo, hi : float
        Finite bracket endpoints.
    derivative : callable, optional
        Derivative of ``func``, used for Newton polish.
    xtol : float
        Absolute tolerance on the bracket width / Newton step.
    ftol : float
        Stop as soon as ``|func(x)| <= ftol``.
    maxiter : int
        Iteration cap.

    Raises
    ------
    SolverError
        If the endpoints do not bracket a root, or the cap is reached.
    """
    f_lo, f_hi = func(lo), func(hi)
    if f_lo == 0.0 or abs(f_lo) <= ftol:
        return lo
    if f_hi == 0.0 or abs(f_hi) <= ftol:
        return hi
    if np.sign(f_lo) == np.sign(f_hi):
        raise SolverError(f"no sign change on [{lo}, {hi}]: f = ({f_lo}, {f_hi})")

    # keep x_neg with f < 0 and x_pos with f > 0
    x_neg, x_pos = (lo, hi) if f_lo < 0.0 else (hi, lo)
    x = 0.5 * (lo + hi)
    for it in range(maxiter):
        fx = func(x)
        if fx == 0.0 or abs(fx) <= ftol:
            return x
        if fx < 0.0:
            x_neg = x
        else:
            x_pos = x
        left, right = min(x_neg, x_pos), max(x_neg, x_pos)

        step = None
        if derivative is not None:
            dfx = derivative(x)
            if np.isfinite(dfx) and dfx != 0.0:
                x_newton = x - fx / dfx
                if left < x_newton < right:
                    step = x_newton
        if step is None:
            step = 0.5 * (left + right)
            if step in (left, right) or right - left <= xtol:
                return x
        elif abs(step - x) <= xtol:
            return step
        x = step

    logger.debug("Root finder hit its iteration cap", maxiter=maxiter, bracket=(x_neg, x_pos))
    raise SolverError(f"root finder did not converge in {maxiter} iterations, bracket ({x_neg}, {x_pos})")
