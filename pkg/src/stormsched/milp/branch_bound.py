"""Best-first branch-and-bound over the LP relaxations.

Branches on the most fractional binary column (ties go to the lowest
column index). Node selection is best-bound-first; when the open list
grows past `memory_threshold` the search switches to depth-first dives
until the list shrinks again. Deterministic by construction: fixed
instance and options give an identical tree walk and node count.
"""

from __future__ import annotations

import enum
import heapq
import time
from dataclasses import dataclass

import numpy as np

from .problem import INFINITY, MilpProblem
from .simplex import LpStatus, SimplexError, solve_lp

INTEGRALITY_TOL = 1e-6
DEFAULT_GAP_TARGET = 1e-4
DEFAULT_MEMORY_THRESHOLD = 10_000


class MipStatus(enum.Enum):
    OPTIMAL = "optimal"
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    LIMIT_REACHED = "limit_reached"


@dataclass(frozen=True)
class MipResult:
    status: MipStatus
    values: np.ndarray | None  # incumbent column values, None if no incumbent
    objective: float  # incumbent objective, +inf if no incumbent
    best_bound: float
    gap: float
    nodes_explored: int


def _gap(incumbent: float, bound: float) -> float:
    if incumbent >= INFINITY:
        return INFINITY
    return max(0.0, (incumbent - bound) / max(1.0, abs(incumbent)))


class _OpenNodes:
    """Open-node pool with two selection orders over the same entries.

    Entries live in a best-bound heap and a deepest-first heap; a seq-id
    set marks which entries are still live so pops skip stale copies.
    """

    def __init__(self):
        self.best = []  # (bound, seq, node)
        self.deep = []  # (-depth, bound, seq, node)
        self.live = set()
        self.seq = 0

    def push(self, bound, depth, overrides):
        node = (bound, depth, overrides)
        heapq.heappush(self.best, (bound, self.seq, node))
        heapq.heappush(self.deep, (-depth, bound, self.seq, node))
        self.live.add(self.seq)
        self.seq += 1

    def __len__(self):
        return len(self.live)

    def pop(self, dive: bool):
        heap = self.deep if dive else self.best
        while heap:
            entry = heapq.heappop(heap)
            seq = entry[-2]
            if seq in self.live:
                self.live.discard(seq)
                return entry[-1]
        return None

    def best_live_bound(self) -> float:
        while self.best:
            bound, seq, _ = self.best[0]
            if seq in self.live:
                return bound
            heapq.heappop(self.best)
        return INFINITY


def solve_milp(problem: MilpProblem, gap_target: float = DEFAULT_GAP_TARGET,
               node_limit: int | None = None, time_limit: float | None = None,
               memory_threshold: int = DEFAULT_MEMORY_THRESHOLD,
               log=None) -> MipResult:
    """Minimize over the declared binaries by LP-based branch and bound."""
    problem.validate()
    binaries = problem.binary_columns()
    started = time.monotonic()
    incumbent_values = None
    incumbent_obj = INFINITY
    nodes_explored = 0
    open_nodes = _OpenNodes()
    open_nodes.push(-INFINITY, 0, {})
    limit_hit = False
    if log is not None:
        log.write("node bound incumbent gap\n")

    while True:
        if node_limit is not None and nodes_explored >= node_limit:
            limit_hit = True
            break
        if time_limit is not None and time.monotonic() - started > time_limit:
            limit_hit = True
            break
        dive = len(open_nodes) > memory_threshold
        node = open_nodes.pop(dive)
        if node is None:
            break
        parent_bound, depth, overrides = node
        if _gap(incumbent_obj, parent_bound) <= gap_target:
            # everything left is at least this bound; best-first order makes
            # the whole pool prunable, but stale dive entries may remain
            if not dive:
                break
            continue
        relax = solve_lp(problem, overrides)
        nodes_explored += 1
        if relax.status is LpStatus.UNBOUNDED:
            raise SimplexError("relaxation is unbounded; add finite bounds")
        if relax.status is LpStatus.INFEASIBLE:
            continue
        bound = relax.objective
        if log is not None:
            inc = f"{incumbent_obj:.6f}" if incumbent_obj < INFINITY else "none"
            log.write(f"{nodes_explored} {bound:.6f} {inc} "
                      f"{_gap(incumbent_obj, bound):.3e}\n")
        if _gap(incumbent_obj, bound) <= gap_target:
            continue
        fractional = -1
        worst = INTEGRALITY_TOL
        for col in binaries:
            frac = abs(relax.values[col] - round(relax.values[col]))
            if frac > worst:
                worst = frac
                fractional = col
        if fractional < 0:
            values = relax.values.copy()
            for col in binaries:
                values[col] = round(values[col])
            objective = problem.objective_value(values)
            if objective < incumbent_obj - 1e-12:
                incumbent_obj = objective
                incumbent_values = values
            continue
        open_nodes.push(bound, depth + 1, {**overrides, fractional: (0.0, 0.0)})
        open_nodes.push(bound, depth + 1, {**overrides, fractional: (1.0, 1.0)})

    if limit_hit:
        best_bound = min(open_nodes.best_live_bound(), incumbent_obj)
        gap = _gap(incumbent_obj, best_bound)
        status = MipStatus.FEASIBLE if incumbent_values is not None else MipStatus.LIMIT_REACHED
        return MipResult(status, incumbent_values, incumbent_obj, best_bound, gap,
                         nodes_explored)
    if incumbent_values is None:
        return MipResult(MipStatus.INFEASIBLE, None, INFINITY, INFINITY, INFINITY,
                         nodes_explored)
    best_bound = min(open_nodes.best_live_bound(), incumbent_obj)
    return MipResult(MipStatus.OPTIMAL, incumbent_values, incumbent_obj, best_bound,
                     _gap(incumbent_obj, best_bound), nodes_explored)
