"""Bounded-variable primal simplex for the LP relaxations.

Revised simplex over the equality form A x + s = b with per-column bound
intervals. Dantzig pricing with a Bland's-rule fallback once a run of
degenerate pivots is detected, two-phase start with artificial columns,
and a dense basis inverse refactorized every REFACTOR_INTERVAL pivots.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .problem import INFINITY, MilpProblem, Sense

FEAS_TOL = 1e-7
OPT_TOL = 1e-9
PIVOT_TOL = 1e-10
REFACTOR_INTERVAL = 50
DEGENERATE_STREAK = 40

AT_LOWER = 0
AT_UPPER = 1
FREE = 2
BASIC = 3


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    values: np.ndarray  # structural columns only
    objective: float
    dual_values: np.ndarray  # one multiplier per constraint row
    iterations: int


class SimplexError(RuntimeError):
    pass


class _Tableau:
    """Mutable solver state over the equality-form column set."""

    def __init__(self, A, b, c, lower, upper):
        self.A = A
        self.b = b
        self.c = c
        self.lower = lower
        self.upper = upper
        self.m, self.n = A.shape
        self.basis = np.zeros(self.m, dtype=np.int64)
        self.status = np.zeros(self.n, dtype=np.int64)
        self.x = np.zeros(self.n)
        self.binv = np.zeros((self.m, self.m))
        self.pivots_since_refactor = 0
        self.iterations = 0
        self.bland = False
        self.degenerate_run = 0

    def start_at_bounds(self):
        for j in range(self.n):
            lo, hi = self.lower[j], self.upper[j]
            if lo > -INFINITY and hi < INFINITY:
                if abs(hi) < abs(lo):
                    self.status[j], self.x[j] = AT_UPPER, hi
                else:
                    self.status[j], self.x[j] = AT_LOWER, lo
            elif lo > -INFINITY:
                self.status[j], self.x[j] = AT_LOWER, lo
            elif hi < INFINITY:
                self.status[j], self.x[j] = AT_UPPER, hi
            else:
                self.status[j], self.x[j] = FREE, 0.0

    def refactor(self):
        if self.m:
            self.binv = np.linalg.inv(self.A[:, self.basis])
        self.recompute_basics()
        self.pivots_since_refactor = 0

    def recompute_basics(self):
        if not self.m:
            return
        x_nb = self.x.copy()
        x_nb[self.basis] = 0.0
        rhs = self.b - self.A @ x_nb
        self.x[self.basis] = self.binv @ rhs

    def reduced_costs(self, cost):
        if self.m:
            y = cost[self.basis] @ self.binv
            d = cost - y @ self.A
        else:
            y = np.zeros(0)
            d = cost.copy()
        return y, d

    def pick_entering(self, d):
        lo_mask = (self.status == AT_LOWER) & (d < -OPT_TOL)
        up_mask = (self.status == AT_UPPER) & (d > OPT_TOL)
        fr_mask = (self.status == FREE) & (np.abs(d) > OPT_TOL)
        movable = self.upper - self.lower > PIVOT_TOL
        lo_mask &= movable
        up_mask &= movable
        eligible = lo_mask | up_mask | fr_mask
        idx = np.flatnonzero(eligible)
        if idx.size == 0:
            return -1, 0
        if self.bland:
            j = int(idx[0])
        else:
            j = int(idx[np.argmax(np.abs(d[idx]))])
        if self.status[j] == AT_UPPER or (self.status[j] == FREE and d[j] > 0):
            return j, -1
        return j, +1

    def ratio_test(self, j, sign, w):
        """Smallest step before a basic column or the entering column
        hits a bound. Returns (t, blocking basis position or -1)."""
        best_t = INFINITY
        best_pos = -1
        best_col = -1
        for i in range(self.m):
            rate = -sign * w[i]
            if rate < -PIVOT_TOL:
                bound = self.lower[self.basis[i]]
                if bound <= -INFINITY:
                    continue
                t = (self.x[self.basis[i]] - bound) / -rate
            elif rate > PIVOT_TOL:
                bound = self.upper[self.basis[i]]
                if bound >= INFINITY:
                    continue
                t = (bound - self.x[self.basis[i]]) / rate
            else:
                continue
            t = max(t, 0.0)
            col = self.basis[i]
            if t < best_t - PIVOT_TOL or (t < best_t + PIVOT_TOL and (best_pos < 0 or col < best_col)):
                best_t, best_pos, best_col = t, i, col
        span = self.upper[j] - self.lower[j]
        if span < best_t - PIVOT_TOL:
            return span, -1
        return best_t, best_pos

    def pivot(self, j, sign, w, t, leaving_pos):
        if t > PIVOT_TOL:
            self.degenerate_run = 0
            self.bland = False
        else:
            self.degenerate_run += 1
            if self.degenerate_run >= DEGENERATE_STREAK:
                self.bland = True
        if leaving_pos < 0:
            # bound flip, basis unchanged
            if self.m:
                self.x[self.basis] -= sign * t * w
            if sign > 0:
                self.status[j], self.x[j] = AT_UPPER, self.upper[j]
            else:
                self.status[j], self.x[j] = AT_LOWER, self.lower[j]
            return
        leave = self.basis[leaving_pos]
        self.x[self.basis] -= sign * t * w
        self.x[j] += sign * t
        rate = -sign * w[leaving_pos]
        if rate < 0:
            self.status[leave], self.x[leave] = AT_LOWER, self.lower[leave]
        else:
            self.status[leave], self.x[leave] = AT_UPPER, self.upper[leave]
        self.status[j] = BASIC
        self.basis[leaving_pos] = j
        pivot_val = w[leaving_pos]
        self.binv[leaving_pos, :] /= pivot_val
        for i in range(self.m):
            if i != leaving_pos and abs(w[i]) > 0.0:
                self.binv[i, :] -= w[i] * self.binv[leaving_pos, :]
        self.pivots_since_refactor += 1
        if self.pivots_since_refactor >= REFACTOR_INTERVAL:
            self.refactor()

    def run(self, cost, iteration_limit):
        """Pivot until optimal for the given cost vector.

        Returns (optimal, duals); optimal False means unbounded.
        """
        while True:
            self.iterations += 1
            if self.iterations > iteration_limit:
                raise SimplexError(f"iteration limit {iteration_limit} exceeded")
            y, d = self.reduced_costs(cost)
            j, sign = self.pick_entering(d)
            if j < 0:
                return True, y
            w = self.binv @ self.A[:, j] if self.m else np.zeros(0)
            t, leaving_pos = self.ratio_test(j, sign, w)
            if t >= INFINITY:
                return False, y
            self.pivot(j, sign, w, t, leaving_pos)


def _equality_form(A, senses, b, c, lower, upper):
    """Append one slack column per row: A x + s = b with sense-shaped
    slack bounds (LE: s >= 0, GE: s <= 0, EQ: s = 0)."""
    m, n = A.shape
    full_A = np.hstack([A, np.eye(m)]) if m else A.copy()
    slack_lower = np.zeros(m)
    slack_upper = np.zeros(m)
    for i, sense in enumerate(senses):
        if sense is Sense.LE:
            slack_lower[i], slack_upper[i] = 0.0, INFINITY
        elif sense is Sense.GE:
            slack_lower[i], slack_upper[i] = -INFINITY, 0.0
        else:
            slack_lower[i], slack_upper[i] = 0.0, 0.0
    full_c = np.concatenate([c, np.zeros(m)])
    full_lower = np.concatenate([lower, slack_lower])
    full_upper = np.concatenate([upper, slack_upper])
    return full_A, b.copy(), full_c, full_lower, full_upper


def solve_lp(problem: MilpProblem, bound_overrides: dict | None = None,
             feas_tol: float = FEAS_TOL) -> LpSolution:
    """Solve the LP relaxation of `problem` (integrality ignored)."""
    A0, senses, b0, c0, lo0, up0 = problem.dense_data(bound_overrides)
    if np.any(lo0 > up0):
        # a bound override emptied some interval; infeasible by construction
        n = problem.n_variables
        return LpSolution(LpStatus.INFEASIBLE, np.zeros(n), INFINITY,
                          np.zeros(problem.n_constraints), 0)
    A, b, c, lower, upper = _equality_form(A0, senses, b0, c0, lo0, up0)
    m = A.shape[0]
    n_structural = problem.n_variables
    n_with_slacks = A.shape[1]

    # phase 1: artificial columns absorb the residual at the bound start
    tab = _Tableau(A, b, c, lower, upper)
    tab.start_at_bounds()
    iteration_limit = 2000 + 200 * (m + n_with_slacks)
    if m:
        residual = b - A @ tab.x
        art_sign = np.where(residual >= 0.0, 1.0, -1.0)
        art_cols = np.zeros((m, m))
        art_cols[np.arange(m), np.arange(m)] = art_sign
        tab.A = np.hstack([A, art_cols])
        tab.c = np.concatenate([c, np.zeros(m)])
        tab.lower = np.concatenate([lower, np.zeros(m)])
        tab.upper = np.concatenate([upper, np.full(m, INFINITY)])
        tab.n = tab.A.shape[1]
        tab.status = np.concatenate([tab.status, np.full(m, BASIC, dtype=np.int64)])
        tab.x = np.concatenate([tab.x, np.abs(residual)])
        tab.basis = np.arange(n_with_slacks, n_with_slacks + m, dtype=np.int64)
        tab.binv = np.diag(art_sign)

        phase1_cost = np.zeros(tab.n)
        phase1_cost[n_with_slacks:] = 1.0
        optimal, _ = tab.run(phase1_cost, iteration_limit)
        if not optimal:
            raise SimplexError("phase 1 reported an unbounded direction")
        infeasibility = float(phase1_cost @ tab.x)
        if infeasibility > feas_tol:
            return LpSolution(LpStatus.INFEASIBLE, np.zeros(n_structural), INFINITY,
                              np.zeros(m), tab.iterations)
        # pin artificials at zero before driving them out so a leaving
        # artificial parks at 0 whichever bound the pivot assigns it
        tab.lower[n_with_slacks:] = 0.0
        tab.upper[n_with_slacks:] = 0.0
        _drive_out_artificials(tab, n_with_slacks)

    phase2_cost = np.zeros(tab.n)
    phase2_cost[:n_with_slacks] = c
    tab.bland = False
    tab.degenerate_run = 0
    optimal, duals = tab.run(phase2_cost, iteration_limit)
    if not optimal:
        return LpSolution(LpStatus.UNBOUNDED, np.zeros(n_structural), -INFINITY,
                          np.zeros(m), tab.iterations)
    tab.refactor()  # clean recompute before reporting
    duals, _ = tab.reduced_costs(phase2_cost)
    values = tab.x[:n_structural].copy()
    np.clip(values, lo0, up0, out=values)
    objective = float(c0 @ values)
    return LpSolution(LpStatus.OPTIMAL, values, objective, duals.copy(), tab.iterations)


def _drive_out_artificials(tab: _Tableau, n_real: int) -> None:
    """Swap any basic artificial (necessarily at ~0) for a real column
    via a degenerate pivot; rows with no candidate are redundant and the
    artificial stays basic pinned at zero."""
    for pos in range(tab.m):
        col = tab.basis[pos]
        if col < n_real:
            continue
        row_in_binv = tab.binv[pos, :]
        candidates = row_in_binv @ tab.A[:, :n_real]
        found = -1
        for j in range(n_real):
            if tab.status[j] == BASIC:
                continue
            if abs(candidates[j]) > 1e-7 and tab.upper[j] - tab.lower[j] > PIVOT_TOL:
                found = j
                break
        if found < 0:
            continue
        w = tab.binv @ tab.A[:, found]
        sign = +1 if tab.status[found] != AT_UPPER else -1
        tab.pivot(found, sign, w, 0.0, pos)


def max_bound_violation(problem: MilpProblem, values: np.ndarray,
                        bound_overrides: dict | None = None) -> float:
    """Largest violation of column bounds and row senses; feasibility probe
    used by tests and by branch-and-bound integrality checks."""
    A, senses, b, _, lower, upper = problem.dense_data(bound_overrides)
    worst = 0.0
    worst = max(worst, float(np.max(lower - values, initial=0.0)))
    worst = max(worst, float(np.max(values - upper, initial=0.0)))
    if A.shape[0]:
        activity = A @ values
        for i, sense in enumerate(senses):
            gap = activity[i] - b[i]
            if sense is Sense.LE:
                worst = max(worst, gap)
            elif sense is Sense.GE:
                worst = max(worst, -gap)
            else:
                worst = max(worst, abs(gap))
    return worst


def max_complementarity_violation(problem: MilpProblem, solution: LpSolution) -> float:
    """Optimality certificate residual: row dual times row slack, plus
    dual sign errors, should all vanish at an optimum."""
    A, senses, b, _, _, _ = problem.dense_data()
    worst = 0.0
    if A.shape[0]:
        activity = A @ solution.values
        for i, sense in enumerate(senses):
            y = solution.dual_values[i]
            slack = b[i] - activity[i]
            worst = max(worst, abs(y * slack))
            if sense is Sense.LE and y > 0:
                worst = max(worst, y)
            if sense is Sense.GE and y < 0:
                worst = max(worst, -y)
    return worst
