"""Non-negative least squares and least squares over the probability simplex."""

from __future__ import annotations

import math

import numpy as np


def nnls(A, b, max_iter=None, tol=None):
    """
    Solve ``argmin_x ||Ax - b||_2`` subject to ``x >= 0``.

    Lawson-Hanson active-set method: variables move from the active (zero)
    set to the passive set one at a time, following the most positive
    component of the negative gradient, and the unconstrained least-squares
    solution on the passive set is pulled back along the segment to the
    current iterate whenever it leaves the feasible region.

    Parameters
    ----------
    A : ndarray of shape (m, n)
    b : ndarray of shape (m,)
    max_iter : int, optional
        Outer iteration cap; default ``3 * n``.
    tol : float, optional
        Dual-feasibility tolerance; default scales with ``A``.

    Returns
    -------
    x : ndarray of shape (n,)
    rnorm : float
        Residual norm ``||Ax - b||_2``.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2:
        raise ValueError("expected matrix")
    if b.ndim != 1:
        raise ValueError("expected vector")
    m, n = A.shape
    if m != b.shape[0]:
        raise ValueError("incompatible dimensions")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise ValueError("non-finite input")
    if max_iter is None:
        max_iter = 3 * n + 10
    if tol is None:
        tol = 10 * np.finfo(float).eps * max(m, n) * np.linalg.norm(A, 1) * max(1.0, np.abs(b).max(initial=0.0))

    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    # entering variables whose first trial step is non-positive; cleared on progress
    blocked = np.zeros(n, dtype=bool)
    w = A.T @ b
    it = 0
    while True:
        cand = np.where(passive | blocked, -np.inf, w)
        if not np.isfinite(cand).any() or cand.max() <= tol:
            break
        it += 1
        if it > max_iter:
            raise RuntimeError("nnls: too many iterations")
        j = int(np.argmax(cand))
        trial = passive.copy()
        trial[j] = True
        idx = np.flatnonzero(trial)
        z = np.zeros(n)
        z[idx] = np.linalg.lstsq(A[:, idx], b, rcond=None)[0]
        if z[j] <= 0:
            blocked[j] = True
            continue
        passive = trial
        while np.any(z[idx] <= 0):
            neg = idx[z[idx] <= 0]
            ratios = x[neg] / (x[neg] - z[neg])
            k = int(np.argmin(ratios))
            x = x + ratios[k] * (z - x)
            x[neg[k]] = 0.0
            passive &= x > 0
            x[~passive] = 0.0
            idx = np.flatnonzero(passive)
            z = np.zeros(n)
            if idx.size:
                z[idx] = np.linalg.lstsq(A[:, idx], b, rcond=None)[0]
        x = z
        blocked[:] = False
        w = A.T @ (b - A @ x)
    return x, float(np.linalg.norm(A @ x - b))


def simplex_least_squares(Z, y):
    """
    Weights ``a >= 0`` with ``sum(a) == 1`` minimising ``||Z a - y||^2``.

    On the simplex ``Z a - y == (Z - y 1') a``, so the task is the point of
    smallest norm in the convex hull of the columns of ``D = Z - y 1'``.
    That point comes from one NNLS solve on ``D`` stacked over a row of
    ones with target ``(0, ..., 0, 1)``: for ``u = s a`` the objective is
    ``s^2 ||D a||^2 + (s - 1)^2``, whose minimum over ``s`` is increasing
    in ``||D a||^2``, so ``a = u / sum(u)`` is exactly optimal.

    If ``Z`` is identically zero every weighting is equivalent and the
    uniform vector is returned.
    """
    Z = np.asarray(Z, dtype=float)
    y = np.asarray(y, dtype=float)
    n, L = Z.shape
    if L == 0:
        raise ValueError("empty library")
    if not np.any(Z):
        return np.full(L, 1.0 / L)
    D = Z - y[:, None]
    # row scale keeps the sum constraint comparable to the residual block
    scale = max(1.0, float(np.sqrt(np.mean(D * D)) * math.sqrt(n)))
    E = np.vstack([D / scale, np.ones((1, L))])
    f = np.zeros(n + 1)
    f[-1] = 1.0
    u, _ = nnls(E, f)
    total = math.fsum(u)
    if total <= 0:  # pragma: no cover - the solution is never zero since f is not orthogonal to E
        return np.full(L, 1.0 / L)
    a = u / total
    a[a < 0] = 0.0
    return a / math.fsum(a)
