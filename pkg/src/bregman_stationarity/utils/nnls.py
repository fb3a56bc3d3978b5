"""Lawson-Hanson active-set least squares with partially nonnegative unknowns"""

import numpy as np
from numpy.typing import ArrayLike, NDArray

from bregman_stationarity.errors import DimensionError, SolverError

NNLS_TOL = 1e-10


def nnls(
    A: ArrayLike,
    b: ArrayLike,
    k: int | None = None,
    maxiter: int | None = None,
    tol: float = NNLS_TOL,
) -> tuple[NDArray, float, int]:
    """Least-squares solution of ``A @ x = b`` subject to ``x[:k] >= 0``.

    The remaining ``n - k`` unknowns are free. Returns ``(x, rnorm, iterations)``.

    Raises
    ------
    DimensionError
        If ``A`` and ``b`` do not agree.
    SolverError
        If the active set does not settle within ``maxiter`` (default ``3 * n``) exchanges.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if b.shape != (m,):
        raise DimensionError(f"nnls: A is {A.shape} but b is {b.shape}")
    if k is None:
        k = n
    if not 0 <= k <= n:
        raise DimensionError(f"nnls: k={k} outside [0, {n}]")
    if maxiter is None:
        maxiter = 3 * n

    eps = np.finfo(float).eps
    lstol = tol * max(1.0, float(np.max(np.abs(b), initial=0.0)))

    # ACT flags the bound (zero) nonnegative columns, INACT the passive ones
    x = np.zeros(n)
    act = np.ones(k, dtype=bool)
    inact = np.r_[np.zeros(k, dtype=bool), np.ones(n - k, dtype=bool)]
    iact = np.arange(k)
    resid = b.copy()
    lsx = float(resid @ resid)
    w = A.T @ resid

    iterc = 0
    while (np.any(act) and np.any(w[iact] > lstol)) or np.any(np.abs(w[k:]) > lstol):
        iterc += 1
        if iterc > maxiter:
            raise SolverError(f"nnls did not settle in {maxiter} iterations", rnorm=float(np.sqrt(lsx)))
        if k > 0 and np.any(act):
            wact = w[:k].copy()
            wact[inact[:k]] = -np.inf
            if np.max(wact) > lstol:
                act[np.argmax(wact)] = False
            inact[:k] = ~act
            iact = np.flatnonzero(act)
        ipos = np.flatnonzero(inact[:k])

        xact = _passive_lstsq(A, b, inact)

        while np.any(xact[ipos] <= 0.0):
            iterc += 1
            if iterc > maxiter:
                raise SolverError(f"nnls did not settle in {maxiter} iterations", rnorm=float(np.sqrt(lsx)))
            # step from x toward xact until the first passive coordinate hits zero
            idiv = np.abs(x[:k] - xact[:k]) > eps * np.abs(x[:k])
            iupd = np.flatnonzero(inact[:k] & (xact[:k] <= 0.0) & idiv)
            if iupd.size == 0:
                break
            ratio = x[iupd] / (x[iupd] - xact[iupd])
            x = x + np.min(ratio) * (xact - x)

            act[inact[:k] & (np.abs(x[:k]) < lstol)] = True
            inact[:k] = ~act
            iact = np.flatnonzero(act)
            ipos = np.flatnonzero(inact[:k])
            x[iact] = 0.0
            xact = _passive_lstsq(A, b, inact)

        x = xact
        x[:k] = np.maximum(x[:k], 0.0)
        resid = b - A @ x
        lsxnew = float(resid @ resid)
        if lsxnew >= lsx:
            # no progress
            break
        lsx = lsxnew
        w = A.T @ resid

    return x, float(np.linalg.norm(b - A @ x)), iterc


def _passive_lstsq(A: NDArray, b: NDArray, passive: NDArray[np.bool_]) -> NDArray:
    out = np.zeros(A.shape[1])
    if np.any(passive):
        out[passive] = np.linalg.lstsq(A[:, passive], b, rcond=None)[0]
    return out
