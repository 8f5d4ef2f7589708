"""Bounded-variable revised simplex.

Solves ``min c @ x  s.t.  A @ x = b,  lo <= x <= hi`` with an explicit dense
basis inverse kept current by rank-one updates and refactorized periodically.
Nonbasic variables sit at one of their bounds, so box constraints never
become rows.

Pivoting is deterministic. ``"bland"`` takes the lowest-index improving
column and breaks ratio ties by lowest variable index, which rules out
cycling. ``"dantzig"`` takes the largest reduced cost magnitude (first index
on ties) and falls back to Bland's rule after a run of degenerate pivots.

The pivot loop is a numba kernel with plain sequential loops, so a given
input always produces the same bits.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numba
import numpy as np
import scipy.sparse as sp

PIVOT_RULES = ("bland", "dantzig")

_AT_LOWER = -1
_BASIC = 0
_AT_UPPER = 1

# kernel exit codes
_OPTIMAL = 0
_ITER_LIMIT = 1
_UNBOUNDED = 2
_REFACTOR = 3

# consecutive degenerate pivots before "dantzig" hands over to Bland's rule
_DEGENERATE_SWITCH = 50
_RATIO_TIE = 1e-12


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "iteration_limit"
    x: Optional[np.ndarray]
    objective: float
    iterations: int


class UnboundedLP(RuntimeError):
    pass


@numba.njit(cache=True)
def _pivot_loop(
    indptr, indices, data, cost, lo, hi, x, status, basis, binv, y,
    dual_tol, pivot_tol, bland, max_iter, refactor_every, iterations,
):
    m = basis.size
    n = x.size
    alpha = np.empty(m)
    lim = np.empty(m)
    degenerate_run = 0
    pivots = 0
    while True:
        if iterations >= max_iter:
            return _ITER_LIMIT, iterations
        if pivots >= refactor_every:
            return _REFACTOR, iterations
        use_bland = bland or degenerate_run >= _DEGENERATE_SWITCH

        # pricing
        q = -1
        q_d = 0.0
        best = 0.0
        for j in range(n):
            st = status[j]
            if st == _BASIC:
                continue
            acc = 0.0
            for k in range(indptr[j], indptr[j + 1]):
                acc += data[k] * y[indices[k]]
            dj = cost[j] - acc
            if st == _AT_LOWER:
                if not (hi[j] > lo[j] and dj < -dual_tol):
                    continue
                score = -dj
            else:
                if not dj > dual_tol:
                    continue
                score = dj
            if use_bland:
                q = j
                q_d = dj
                break
            if score > best:
                best = score
                q = j
                q_d = dj
        if q < 0:
            return _OPTIMAL, iterations
        direction = 1.0 if status[q] == _AT_LOWER else -1.0

        # alpha = B^-1 a_q; delta = change of basics per unit step
        for i in range(m):
            alpha[i] = 0.0
        for k in range(indptr[q], indptr[q + 1]):
            r = indices[k]
            v = data[k]
            for i in range(m):
                alpha[i] += binv[i, r] * v

        theta_b = np.inf
        for i in range(m):
            dlt = -direction * alpha[i]
            bi = basis[i]
            if dlt < -pivot_tol:
                li = (x[bi] - lo[bi]) / -dlt
            elif dlt > pivot_tol:
                li = (hi[bi] - x[bi]) / dlt
            else:
                li = np.inf
            if li < 0.0:
                li = 0.0
            lim[i] = li
            if li < theta_b:
                theta_b = li
        flip = hi[q] - lo[q]
        iterations += 1

        if flip <= theta_b:
            if not np.isfinite(flip):
                return _UNBOUNDED, iterations
            for i in range(m):
                x[basis[i]] -= direction * alpha[i] * flip
            if direction > 0:
                x[q] = hi[q]
                status[q] = _AT_UPPER
            else:
                x[q] = lo[q]
                status[q] = _AT_LOWER
            degenerate_run = 0
            continue
        if not np.isfinite(theta_b):
            return _UNBOUNDED, iterations

        r = -1
        for i in range(m):
            if lim[i] <= theta_b + _RATIO_TIE:
                if r < 0 or basis[i] < basis[r]:
                    r = i
        leaving = basis[r]
        theta = lim[r]
        if theta == 0.0:
            degenerate_run += 1
        else:
            degenerate_run = 0

        for i in range(m):
            x[basis[i]] -= direction * alpha[i] * theta
        x[q] += direction * theta
        if -direction * alpha[r] < 0.0:
            x[leaving] = lo[leaving]
            status[leaving] = _AT_LOWER
        else:
            x[leaving] = hi[leaving]
            status[leaving] = _AT_UPPER
        status[q] = _BASIC
        basis[r] = q

        pivot = alpha[r]
        for j in range(m):
            binv[r, j] /= pivot
        for j in range(m):
            y[j] += q_d * binv[r, j]
        for i in range(m):
            a = alpha[i]
            if i == r or a == 0.0:
                continue
            for j in range(m):
                binv[i, j] -= a * binv[r, j]
        pivots += 1


class _Simplex:
    def __init__(self, c, A, b, lo, hi, feas_tol, dual_tol, pivot_tol, rule, refactor_every):
        self.A = A
        self.c = np.asarray(c, float)
        self.b = np.asarray(b, float)
        self.lo = np.array(lo, float)
        self.hi = np.array(hi, float)
        self.m, self.n = A.shape
        self.feas_tol = feas_tol
        self.dual_tol = dual_tol
        self.pivot_tol = pivot_tol
        self.bland = rule == "bland"
        self.refactor_every = refactor_every
        self.iterations = 0

    def _refactor(self):
        B = self.A[:, self.basis].toarray()
        self.binv = np.linalg.inv(B)
        x_n = np.where(self.status != _BASIC, self.x, 0.0)
        rhs = self.b - self.A @ x_n
        self.x[self.basis] = (self.binv * rhs[None, :]).sum(axis=1)
        self.y = (self.binv * self.cost[self.basis][:, None]).sum(axis=0)

    def _start(self, basis):
        self.basis = np.array(basis, dtype=np.int64)
        self.status = np.full(self.n, _AT_LOWER, dtype=np.int8)
        self.status[self.basis] = _BASIC
        self.x = np.where(
            np.isfinite(self.lo), self.lo, np.where(np.isfinite(self.hi), self.hi, 0.0)
        )
        self._refactor()

    def _basis_feasible(self):
        xb = self.x[self.basis]
        tol = self.feas_tol
        return bool(
            np.all(xb >= self.lo[self.basis] - tol) and np.all(xb <= self.hi[self.basis] + tol)
        )

    def _run(self, max_iter):
        A = self.A
        while True:
            code, self.iterations = _pivot_loop(
                A.indptr, A.indices, A.data, self.cost, self.lo, self.hi,
                self.x, self.status, self.basis, self.binv, self.y,
                self.dual_tol, self.pivot_tol, self.bland, max_iter,
                self.refactor_every, self.iterations,
            )
            if code == _REFACTOR:
                self._refactor()
                continue
            if code == _UNBOUNDED:
                raise UnboundedLP("objective unbounded below")
            return "optimal" if code == _OPTIMAL else "iteration_limit"

    def solve(self, basis_hint, max_iter):
        n_struct = self.n
        if basis_hint is not None:
            self.cost = self.c
            self._start(basis_hint)
            if self._basis_feasible():
                return self._result(self._run(max_iter), n_struct)

        # Phase 1: one artificial per row, nonbasic structurals at a bound.
        x0 = np.where(np.isfinite(self.lo), self.lo, np.where(np.isfinite(self.hi), self.hi, 0.0))
        resid = self.b - self.A @ x0
        signs = np.where(resid >= 0, 1.0, -1.0)
        m = self.m
        self.A = sp.hstack([self.A, sp.diags(signs, format="csc")], format="csc")
        self.n = n_struct + m
        self.lo = np.concatenate([self.lo, np.zeros(m)])
        self.hi = np.concatenate([self.hi, np.full(m, np.inf)])
        self.cost = np.concatenate([np.zeros(n_struct), np.ones(m)])
        self._start(np.arange(n_struct, n_struct + m))
        status = self._run(max_iter)
        if status != "optimal":
            return LPResult(status, None, np.nan, self.iterations)
        if float(self.x[n_struct:].sum()) > 1e3 * self.feas_tol:
            return LPResult("infeasible", None, np.nan, self.iterations)

        # Phase 2: artificials pinned to [0, 0]. Any still basic leave through
        # degenerate pivots once the ratio test sees their empty box.
        self.hi[n_struct:] = 0.0
        art = self.x[n_struct:]
        art[self.status[n_struct:] != _BASIC] = 0.0
        self.cost = np.concatenate([self.c, np.zeros(m)])
        self._refactor()
        return self._result(self._run(max_iter), n_struct)

    def _result(self, status, n_struct):
        if status != "optimal":
            return LPResult(status, None, np.nan, self.iterations)
        x = self.x[:n_struct].copy()
        return LPResult("optimal", x, float(self.c @ x), self.iterations)


def solve_lp(
    c: Sequence[float],
    A,
    b: Sequence[float],
    lo: Sequence[float],
    hi: Sequence[float],
    basis: Optional[Sequence[int]] = None,
    *,
    feas_tol: float = 1e-9,
    dual_tol: float = 1e-9,
    pivot_tol: float = 1e-9,
    rule: str = "bland",
    max_iter: Optional[int] = None,
    refactor_every: int = 100,
) -> LPResult:
    """Minimize ``c @ x`` subject to ``A @ x == b`` and ``lo <= x <= hi``.

    ``basis`` optionally names ``m`` columns forming a starting basis. When
    the point it induces (nonbasics at their lower bounds) is feasible,
    phase 1 is skipped entirely.
    """
    if rule not in PIVOT_RULES:
        raise ValueError(f"unknown pivot rule {rule!r}")
    A = sp.csc_matrix(A, dtype=float)
    A.sort_indices()
    m, n = A.shape
    if max_iter is None:
        max_iter = 50 * (m + n) + 1000
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    if lo.shape != (n,) or hi.shape != (n,) or np.shape(c) != (n,) or np.shape(b) != (m,):
        raise ValueError("dimension mismatch between c, A, b and bounds")
    if np.any(lo > hi):
        return LPResult("infeasible", None, np.nan, 0)
    solver = _Simplex(c, A, b, lo, hi, feas_tol, dual_tol, pivot_tol, rule, refactor_every)
    return solver.solve(basis, max_iter)
