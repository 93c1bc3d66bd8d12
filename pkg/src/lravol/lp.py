"""Dense two-phase simplex for small LPs:  max/min c.x  s.t.  A x <= b, x free.

Free variables are split (x = u - w).  Dantzig pricing switches to Bland's
anti-cycling rule after 10*m degenerate pivots.  Benchmark sizes (n <= ~40,
m <= ~300 rows) never justify sparse machinery.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .errors import LpFailureError

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class LpResult:
    status: str
    x: Optional[np.ndarray] = None
    value: float = float("nan")


def _pivot(T, basis, row, col):
    piv = T[row, col]
    T[row] /= piv
    colvals = T[:, col].copy()
    colvals[row] = 0.0
    T -= np.outer(colvals, T[row])
    basis[row] = col


def _run_simplex(T, basis, n_iter_cap, pivot_tol, bland_after):
    """Iterate to optimality on the current bottom row.

    Returns 'optimal' or 'unbounded'; raises LpFailureError past the cap.
    """
    m = T.shape[0] - 1
    degenerate = 0
    bland = False
    for it in range(n_iter_cap):
        costs = T[-1, :-1]
        if bland:
            neg = np.flatnonzero(costs < -pivot_tol)
            if neg.size == 0:
                return OPTIMAL
            col = int(neg[0])
        else:
            col = int(np.argmin(costs))
            if costs[col] >= -pivot_tol:
                return OPTIMAL
        colvec = T[:-1, col]
        mask = colvec > pivot_tol
        if not mask.any():
            return UNBOUNDED
        ratios = np.full(m, np.inf)
        ratios[mask] = T[:-1, -1][mask] / colvec[mask]
        best = ratios.min()
        cand = np.flatnonzero(ratios <= best + 1e-15)
        # smallest basis id among ties keeps Bland's rule honest
        row = int(cand[np.argmin(np.asarray(basis)[cand])])
        if best <= pivot_tol:
            degenerate += 1
            if degenerate > bland_after:
                bland = True
        _pivot(T, basis, row, col)
    raise LpFailureError(f"simplex iteration cap {n_iter_cap} exceeded")


def solve_lp(A, b, c, sense: str = "max", tol: Tolerances = DEFAULT_TOL) -> LpResult:
    """Solve  optimize c.x  subject to  A x <= b  with free x."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    if A.ndim != 2:
        raise ValueError("A must be a matrix")
    m, n = A.shape
    if sense == "min":
        c = -c
    elif sense != "max":
        raise ValueError(f"sense must be 'max' or 'min', got {sense!r}")

    # columns: u (n), w (n), slacks (m), then artificials for rows with b < 0
    neg_rows = np.flatnonzero(b < 0)
    n_art = neg_rows.size
    N = 2 * n + m + n_art
    T = np.zeros((m + 1, N + 1))
    T[:m, :n] = A
    T[:m, n : 2 * n] = -A
    T[:m, 2 * n : 2 * n + m] = np.eye(m)
    T[:m, -1] = b
    basis = [2 * n + i for i in range(m)]
    for k, i in enumerate(neg_rows):
        T[i, :] *= -1.0
        col = 2 * n + m + k
        T[i, col] = 1.0
        basis[i] = col

    cap = 50 * (m + n) + 100
    if n_art:
        # phase 1: maximize -sum(artificials)
        T[-1, 2 * n + m :N] = 1.0
        for i in neg_rows:
            T[-1] -= T[i]
        status = _run_simplex(T, basis, cap, tol.lp_pivot_tol, 10 * max(m, 1))
        if status != OPTIMAL or T[-1, -1] < -tol.lp_feas_tol:
            return LpResult(INFEASIBLE)
        # drive leftover artificials out of the basis
        for i in range(m):
            if basis[i] >= 2 * n + m:
                nz = np.flatnonzero(np.abs(T[i, : 2 * n + m]) > tol.lp_pivot_tol)
                if nz.size:
                    _pivot(T, basis, i, int(nz[0]))
        T = np.delete(T, np.s_[2 * n + m : N], axis=1)
        N = 2 * n + m

    # phase 2 objective over u/w columns
    T[-1, :] = 0.0
    T[-1, :n] = -c
    T[-1, n : 2 * n] = c
    for i in range(m):
        if basis[i] < N and abs(T[-1, basis[i]]) > 0:
            T[-1] -= T[-1, basis[i]] * T[i]
    status = _run_simplex(T, basis, cap, tol.lp_pivot_tol, 10 * max(m, 1))
    if status == UNBOUNDED:
        return LpResult(UNBOUNDED)

    full = np.zeros(N)
    for i in range(m):
        if basis[i] < N:
            full[basis[i]] = T[i, -1]
    x = full[:n] - full[n : 2 * n]
    resid = A @ x - b
    if np.any(resid > tol.lp_feas_tol * (1.0 + np.abs(b))):
        raise LpFailureError("optimal point violates feasibility check")
    value = float(c @ x)
    if sense == "min":
        value = -value  # c was negated on entry
    return LpResult(OPTIMAL, x, value)
