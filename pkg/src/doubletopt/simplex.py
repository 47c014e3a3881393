"""Dense bounded-variable primal simplex.

Solves ``max c @ z`` subject to ``A z (<= or =) b`` and ``0 <= z <= u`` with
a two-phase method on a compact (nonbasic-columns-only) tableau. Upper
bounds are handled implicitly by bound flips, so they add no rows. Pricing
is Dantzig's rule until a run of degenerate pivots is seen, after which
Bland's rule takes over for the rest of the solve.
"""
from __future__ import annotations

import numpy as np

from .errors import NumericalFailure

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

FEAS_TOL = 1e-9
OPT_TOL = 1e-9
PIVOT_TOL = 1e-9
DEGENERATE_RUN = 50
REFACTOR_EVERY = 100
# pivots after which the incrementally updated basic values are recomputed
STALE_AFTER = 30


class _Tableau:
    """Basis bookkeeping plus ``T = B^-1 N`` over the nonbasic columns."""

    def __init__(self, c, A, b, is_eq, u):
        m, n = A.shape
        A = np.array(A, dtype=float)
        b = np.array(b, dtype=float)
        slack_rows = np.flatnonzero(~is_eq)
        n_slack = len(slack_rows)
        S = np.zeros((m, n_slack))
        S[slack_rows, np.arange(n_slack)] = 1.0
        neg = b < 0
        A[neg] *= -1.0
        S[neg] *= -1.0
        b[neg] *= -1.0
        # rows whose slack cannot start basic get an artificial
        needs_art = is_eq | neg
        art_rows = np.flatnonzero(needs_art)
        n_art = len(art_rows)
        R = np.zeros((m, n_art))
        R[art_rows, np.arange(n_art)] = 1.0

        self.m = m
        self.n_struct = n
        self.full = np.hstack([A, S, R])
        self.b = b
        self.ncol = self.full.shape[1]
        self.art_start = n + n_slack
        self.upper = np.concatenate([u, np.full(n_slack + n_art, np.inf)])
        self.at_upper = np.zeros(self.ncol, dtype=bool)
        self.cost2 = np.concatenate([c, np.zeros(n_slack + n_art)])
        self.cost1 = np.zeros(self.ncol)
        self.cost1[self.art_start:] = -1.0

        slack_col = np.empty(m, dtype=int)
        slack_col[slack_rows] = n + np.arange(n_slack)
        art_col = np.empty(m, dtype=int)
        art_col[art_rows] = self.art_start + np.arange(n_art)
        self.basis = np.where(needs_art, art_col, slack_col)
        is_basic = np.zeros(self.ncol, dtype=bool)
        is_basic[self.basis] = True
        self.nonbasic = np.flatnonzero(~is_basic)
        # the starting basis is an identity block
        self.T = self.full[:, self.nonbasic].copy()
        self.xB = b.copy()
        self.since_refactor = 0

    def nonbasic_values(self):
        nb = self.nonbasic
        return np.where(self.at_upper[nb], self.upper[nb], 0.0)

    def refactor(self):
        if self.m == 0:
            return
        B = self.full[:, self.basis]
        try:
            self.T = np.linalg.solve(B, self.full[:, self.nonbasic])
            self.xB = np.linalg.solve(B, self.b - self.full[:, self.nonbasic] @ self.nonbasic_values())
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure(f"basis refactorisation failed: {exc}") from None
        if not (np.all(np.isfinite(self.T)) and np.all(np.isfinite(self.xB))):
            raise NumericalFailure("basis refactorisation produced non-finite values")
        self.since_refactor = 0

    def recompute_values(self):
        """Recompute the basic values from scratch, leaving the tableau alone."""
        if self.m == 0 or self.since_refactor < STALE_AFTER:
            return
        B = self.full[:, self.basis]
        try:
            xB = np.linalg.solve(B, self.b - self.full[:, self.nonbasic] @ self.nonbasic_values())
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure(f"singular final basis: {exc}") from None
        if not np.all(np.isfinite(xB)):
            raise NumericalFailure("final basis produced non-finite values")
        self.xB = xB

    def drop_artificials(self):
        """Forbid artificials from re-entering once phase one is over."""
        keep = self.nonbasic < self.art_start
        self.nonbasic = self.nonbasic[keep]
        self.T = self.T[:, keep]
        self.upper[self.art_start:] = 0.0
        self.xB = np.where(self.basis >= self.art_start, 0.0, self.xB)

    def objective(self, cost):
        return float(cost[self.basis] @ self.xB + cost[self.nonbasic] @ self.nonbasic_values())

    def run(self, cost, max_iter):
        bland = False
        degenerate = 0
        retried = False
        for _ in range(max_iter):
            nb = self.nonbasic
            d = cost[nb] - cost[self.basis] @ self.T
            up = self.at_upper[nb]
            cand = np.flatnonzero(((~up) & (d > OPT_TOL)) | (up & (d < -OPT_TOL)))
            if len(cand) == 0:
                return OPTIMAL
            if bland:
                pos = int(cand[np.argmin(nb[cand])])
            else:
                pos = int(cand[np.argmax(np.abs(d[cand]))])
            e = int(nb[pos])
            sigma = -1.0 if self.at_upper[e] else 1.0
            col = sigma * self.T[:, pos]

            ub_B = self.upper[self.basis]
            ratios = np.full(self.m, np.inf)
            dec = col > PIVOT_TOL
            inc = (col < -PIVOT_TOL) & np.isfinite(ub_B)
            ratios[dec] = np.maximum(self.xB[dec], 0.0) / col[dec]
            ratios[inc] = np.maximum(ub_B[inc] - self.xB[inc], 0.0) / -col[inc]
            step = ratios.min() if self.m else np.inf
            step_flip = self.upper[e]
            if step_flip <= step:
                if not np.isfinite(step_flip):
                    return UNBOUNDED
                self.xB -= step_flip * col
                self.at_upper[e] = not self.at_upper[e]
                degenerate = 0
                continue
            if not np.isfinite(step):
                return UNBOUNDED
            ties = np.flatnonzero(ratios <= step + 1e-12)
            if bland:
                r = int(ties[np.argmin(self.basis[ties])])
            else:
                r = int(ties[np.argmax(np.abs(col[ties]))])
            if abs(self.T[r, pos]) < PIVOT_TOL:
                if retried:
                    raise NumericalFailure("pivot element vanished after refactorisation")
                self.refactor()
                retried = True
                continue
            retried = False

            leaving = int(self.basis[r])
            entering_value = (self.upper[e] if self.at_upper[e] else 0.0) + sigma * step
            self.xB -= step * col
            self._exchange(r, pos)
            self.xB[r] = entering_value
            self.at_upper[leaving] = bool(col[r] < 0)
            self.at_upper[e] = False

            if step <= 1e-12:
                degenerate += 1
                if degenerate > DEGENERATE_RUN:
                    bland = True
            else:
                degenerate = 0
            self.since_refactor += 1
            if self.since_refactor >= REFACTOR_EVERY:
                self.refactor()
        raise NumericalFailure("simplex iteration limit reached")

    def _exchange(self, r, pos):
        T = self.T
        piv = T[r, pos]
        colv = T[:, pos].copy()
        T[r] /= piv
        T[r, pos] = 1.0 / piv
        colv[r] = 0.0
        rows = np.flatnonzero(colv)
        T[rows] -= colv[rows, None] * T[r]
        T[:, pos] = -colv / piv
        T[r, pos] = 1.0 / piv
        leaving = self.basis[r]
        self.basis[r] = self.nonbasic[pos]
        self.nonbasic[pos] = leaving

    def values(self):
        x = np.zeros(self.ncol)
        x[self.nonbasic] = self.nonbasic_values()
        x[self.basis] = self.xB
        return x


def bounded_simplex(c, A, b, is_eq, u):
    """Maximise ``c @ z`` over ``A z (<=|=) b``, ``0 <= z <= u``.

    ``is_eq`` marks equality rows. Returns ``(status, z, objective)``; ``z``
    is None unless the status is optimal.
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float).reshape(-1, len(c))
    b = np.asarray(b, dtype=float)
    is_eq = np.asarray(is_eq, dtype=bool)
    u = np.asarray(u, dtype=float)
    tab = _Tableau(c, A, b, is_eq, u)
    max_iter = 50 * (tab.m + tab.ncol) + 100

    if tab.ncol > tab.art_start:
        status = tab.run(tab.cost1, max_iter)
        if status != OPTIMAL:
            raise NumericalFailure("phase one did not reach optimality")
        if -tab.objective(tab.cost1) > FEAS_TOL * max(1.0, len(b)):
            return INFEASIBLE, None, None
        tab.drop_artificials()

    status = tab.run(tab.cost2, max_iter)
    if status != OPTIMAL:
        return status, None, None
    tab.recompute_values()
    z = np.clip(tab.values()[: tab.n_struct], 0.0, u)
    return OPTIMAL, z, float(c @ z)
