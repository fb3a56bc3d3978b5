"""Small dense LPs and vertex enumeration for standard-form polytopes {x : Ax = b, x >= 0}"""

from itertools import combinations
from math import comb
from typing import Optional

import numpy as np
from loguru import logger
from numpy.typing import NDArray
from scipy.optimize import linprog

from bregman_stationarity.errors import TooLarge

VERTEX_DEDUP_TOL = 1e-9
MAX_VERTEX_CANDIDATES = 10**6
_LP_METHOD = "highs-ds"


def max_slack_point(
    A: NDArray,
    b: NDArray,
    lower: NDArray,
    upper: NDArray,
) -> tuple[Optional[NDArray], float]:
    """Maximize s subject to Ax = b, lower + s <= x <= upper - s (finite bounds only), s <= 1.

    Returns ``(x, s)``; ``x`` is ``None`` when the LP is infeasible. ``s > 0`` means
    ``x`` is strictly inside every finite bound.
    """
    m, n = A.shape
    rows, rhs = [], []
    for i in range(n):
        if np.isfinite(lower[i]):
            row = np.zeros(n + 1)
            row[i], row[n] = -1.0, 1.0
            rows.append(row)
            rhs.append(-lower[i])
        if np.isfinite(upper[i]):
            row = np.zeros(n + 1)
            row[i], row[n] = 1.0, 1.0
            rows.append(row)
            rhs.append(upper[i])
    cost = np.zeros(n + 1)
    cost[n] = -1.0
    res = linprog(
        cost,
        A_ub=np.array(rows) if rows else None,
        b_ub=np.array(rhs) if rows else None,
        A_eq=np.hstack([A, np.zeros((m, 1))]) if m else None,
        b_eq=b if m else None,
        bounds=[(None, None)] * n + [(None, 1.0)],
        method=_LP_METHOD,
    )
    if res.status != 0:
        logger.debug("Max-slack LP did not solve", status=res.status, message=res.message)
        return None, -np.inf
    return res.x[:n], float(res.x[n])


def coordinate_ranges(A: NDArray, b: NDArray) -> tuple[NDArray, NDArray]:
    """Per-coordinate min and max over {Ax = b, x >= 0}; +inf where unbounded above"""
    n = A.shape[1]
    lo = np.zeros(n)
    hi = np.full(n, np.inf)
    for i in range(n):
        for sign, out in ((1.0, lo), (-1.0, hi)):
            cost = np.zeros(n)
            cost[i] = sign
            res = linprog(cost, A_eq=A, b_eq=b, bounds=[(0.0, None)] * n, method=_LP_METHOD)
            if res.status == 0:
                out[i] = res.x[i]
            elif res.status == 3:
                out[i] = -sign * np.inf
    return lo, hi


def is_compact(A: NDArray) -> bool:
    """True when the recession cone {d : Ad = 0, d >= 0} is {0}"""
    n = A.shape[1]
    res = linprog(
        -np.ones(n),
        A_eq=A,
        b_eq=np.zeros(A.shape[0]),
        bounds=[(0.0, 1.0)] * n,
        method=_LP_METHOD,
    )
    return res.status == 0 and -res.fun <= VERTEX_DEDUP_TOL


def enumerate_vertices(
    A: NDArray,
    b: NDArray,
    max_candidates: int = MAX_VERTEX_CANDIDATES,
) -> NDArray:
    """All vertices of {Ax = b, x >= 0} by exhaustive basis selection.

    Every column subset of size rank(A) with full column rank is a candidate basis;
    the basic solution is kept when it satisfies Ax = b and x >= 0. Redundant rows
    are tolerated.

    Raises
    ------
    TooLarge
        If the number of candidate bases exceeds ``max_candidates``.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    n = A.shape[1]
    rank = int(np.linalg.matrix_rank(A)) if A.size else 0
    n_candidates = comb(n, rank)
    if n_candidates > max_candidates:
        raise TooLarge(f"{n_candidates} candidate bases for n={n}, rank={rank} exceeds {max_candidates}")

    scale = max(1.0, float(np.linalg.norm(b)))
    vertices: list[NDArray] = []
    for basis in combinations(range(n), rank):
        cols = list(basis)
        x = np.zeros(n)
        if cols:
            A_basis = A[:, cols]
            if np.linalg.matrix_rank(A_basis) < rank:
                continue
            x[cols] = np.linalg.lstsq(A_basis, b, rcond=None)[0]
        if np.linalg.norm(A @ x - b) > VERTEX_DEDUP_TOL * scale or np.any(x < -VERTEX_DEDUP_TOL):
            continue
        x = np.maximum(x, 0.0)
        if not any(np.max(np.abs(x - v)) <= VERTEX_DEDUP_TOL for v in vertices):
            vertices.append(x)

    logger.debug("Enumerated polytope vertices", n=n, rank=rank, candidates=n_candidates, vertices=len(vertices))
    return np.array(vertices).reshape(len(vertices), n)
