"""Event-driven security-constrained unit commitment as a MILP.

One commitment schedule covers every scenario; dispatch, flows, angles
and curtailment are per scenario. The base scenario pays energy and
transition costs, contingency scenarios pay for curtailed load at each
bus's value of lost load. Line outages relax the DC flow coupling
through a per-line big-M and force the flow itself to zero through the
flow bounds; unit outages zero the capacity coupling.

`check_solution` re-evaluates every constraint family straight from the
network physics, independent of the MILP container, so a solver or
indexing bug cannot hide behind its own formulation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .grid import GridNetwork
from .milp import MilpProblem, Sense
from .scenarios import ScenarioSet

ANGLE_BOUND = math.pi / 2.0


class EscucError(ValueError):
    pass


# ---------------------------------------------------------------------------
# model building


def _name(tag, *parts):
    return f"{tag}[{','.join(str(p) for p in parts)}]"


def big_m(line, base_mva: float) -> float:
    """Slack large enough to free the DC coupling of an outaged line:
    the largest possible angle-difference flow plus the flow limit."""
    return math.pi * base_mva / line.reactance + line.flow_limit


def build_milp(network: GridNetwork, scenarios: ScenarioSet) -> MilpProblem:
    n_units = len(network.units)
    n_lines = len(network.lines)
    n_buses = len(network.buses)
    horizon = network.horizon
    n_scen = len(scenarios.scenarios)
    for sc in scenarios.scenarios:
        if sc.ux.shape != (n_units, horizon) or sc.uy.shape != (n_lines, horizon):
            raise EscucError(
                f"scenario {sc.id} outage matrices do not match the network "
                f"({sc.ux.shape} units, {sc.uy.shape} lines)")
        if not (np.isin(sc.ux, (0, 1)).all() and np.isin(sc.uy, (0, 1)).all()):
            raise EscucError(f"scenario {sc.id} outage states must be 0/1")

    p = MilpProblem()
    commit = np.empty((n_units, horizon), dtype=np.int64)
    start = np.empty_like(commit)
    stop = np.empty_like(commit)
    for i, unit in enumerate(network.units):
        for t in range(horizon):
            commit[i, t] = p.add_binary(_name("commit", unit.id, t))
            start[i, t] = p.add_binary(_name("start", unit.id, t))
            stop[i, t] = p.add_binary(_name("stop", unit.id, t))

    segments = {}
    for i, unit in enumerate(network.units):
        widths = unit.segment_widths()
        for t in range(horizon):
            for k, width in enumerate(widths):
                segments[i, t, k] = p.add_continuous(
                    _name("seg", unit.id, t, k), 0.0, float(width))

    power = np.empty((n_units, horizon, n_scen), dtype=np.int64)
    for i, unit in enumerate(network.units):
        for t in range(horizon):
            for s in range(n_scen):
                power[i, t, s] = p.add_continuous(
                    _name("power", unit.id, t, s), 0.0, unit.p_max)

    flow = np.empty((n_lines, horizon, n_scen), dtype=np.int64)
    for l, line in enumerate(network.lines):
        for t in range(horizon):
            for s, sc in enumerate(scenarios.scenarios):
                cap = line.flow_limit * float(sc.uy[l, t])
                flow[l, t, s] = p.add_continuous(
                    _name("flow", line.id, t, s), -cap, cap)

    angle = np.empty((n_buses, horizon, n_scen), dtype=np.int64)
    for b, bus in enumerate(network.buses):
        hi = 0.0 if b == 0 else ANGLE_BOUND  # first bus is the reference
        for t in range(horizon):
            for s in range(n_scen):
                angle[b, t, s] = p.add_continuous(
                    _name("angle", bus.id, t, s), -hi, hi)

    shed = np.empty((n_buses, horizon, n_scen), dtype=np.int64)
    for b, bus in enumerate(network.buses):
        for t in range(horizon):
            for s in range(n_scen):
                cap = float(network.loads[b, t]) if s else 0.0
                shed[b, t, s] = p.add_continuous(
                    _name("shed", bus.id, t, s), 0.0, cap)

    # objective: base-case energy through the convex segments, transition
    # costs, and weighted curtailment in the contingency scenarios
    for i, unit in enumerate(network.units):
        marginals = unit.marginal_costs()
        for t in range(horizon):
            for k, marginal in enumerate(marginals):
                p.add_objective_term(segments[i, t, k], float(marginal))
            p.add_objective_term(start[i, t], unit.startup_cost)
            p.add_objective_term(stop[i, t], unit.shutdown_cost)
    for s, sc in enumerate(scenarios.scenarios):
        if s == 0:
            continue
        for b, bus in enumerate(network.buses):
            for t in range(horizon):
                p.add_objective_term(shed[b, t, s], sc.weight * bus.voll)

    # base-case power equals its segment split
    for i, unit in enumerate(network.units):
        n_seg = len(unit.cost_curve)
        for t in range(horizon):
            coeffs = {power[i, t, 0]: 1.0}
            for k in range(n_seg):
                coeffs[segments[i, t, k]] = -1.0
            p.add_constraint(_name("pwl", unit.id, t), coeffs, Sense.EQ, 0.0)

    # commitment transitions and minimum up/down windows
    for i, unit in enumerate(network.units):
        initial_on = 1.0 if unit.initially_on else 0.0
        for t in range(horizon):
            coeffs = {commit[i, t]: 1.0, start[i, t]: -1.0, stop[i, t]: 1.0}
            rhs = initial_on if t == 0 else 0.0
            if t > 0:
                coeffs[commit[i, t - 1]] = -1.0
            p.add_constraint(_name("transition", unit.id, t), coeffs,
                             Sense.EQ, rhs)
        for t in range(horizon):
            window = range(max(0, t - unit.min_up + 1), t + 1)
            coeffs = {start[i, tau]: 1.0 for tau in window}
            coeffs[commit[i, t]] = -1.0
            p.add_constraint(_name("min_up", unit.id, t), coeffs, Sense.LE, 0.0)
            window = range(max(0, t - unit.min_down + 1), t + 1)
            coeffs = {stop[i, tau]: 1.0 for tau in window}
            coeffs[commit[i, t]] = 1.0
            p.add_constraint(_name("min_down", unit.id, t), coeffs, Sense.LE, 1.0)
        # carry-over from the initial state
        if unit.initially_on and unit.initial_on_hours < unit.min_up:
            for t in range(unit.min_up - unit.initial_on_hours):
                if t < horizon:
                    p.add_constraint(_name("init_on", unit.id, t),
                                     {commit[i, t]: 1.0}, Sense.GE, 1.0)
        if not unit.initially_on and unit.initial_off_hours < unit.min_down:
            for t in range(unit.min_down - unit.initial_off_hours):
                if t < horizon:
                    p.add_constraint(_name("init_off", unit.id, t),
                                     {commit[i, t]: 1.0}, Sense.LE, 0.0)

    # capacity coupling, per scenario outage state
    for i, unit in enumerate(network.units):
        for t in range(horizon):
            for s, sc in enumerate(scenarios.scenarios):
                ux = float(sc.ux[i, t])
                p.add_constraint(
                    _name("cap_hi", unit.id, t, s),
                    {power[i, t, s]: 1.0, commit[i, t]: -unit.p_max * ux},
                    Sense.LE, 0.0)
                p.add_constraint(
                    _name("cap_lo", unit.id, t, s),
                    {power[i, t, s]: 1.0, commit[i, t]: -unit.p_min * ux},
                    Sense.GE, 0.0)

    # ramps within each scenario, first period against the initial output
    for i, unit in enumerate(network.units):
        for s in range(n_scen):
            for t in range(horizon):
                if t == 0:
                    p.add_constraint(
                        _name("ramp_up", unit.id, t, s),
                        {power[i, 0, s]: 1.0}, Sense.LE,
                        unit.ramp_up + unit.initial_power)
                    p.add_constraint(
                        _name("ramp_down", unit.id, t, s),
                        {power[i, 0, s]: -1.0}, Sense.LE,
                        unit.ramp_down - unit.initial_power)
                else:
                    p.add_constraint(
                        _name("ramp_up", unit.id, t, s),
                        {power[i, t, s]: 1.0, power[i, t - 1, s]: -1.0},
                        Sense.LE, unit.ramp_up)
                    p.add_constraint(
                        _name("ramp_down", unit.id, t, s),
                        {power[i, t - 1, s]: 1.0, power[i, t, s]: -1.0},
                        Sense.LE, unit.ramp_down)

    # operating reserve against committed capacity
    total_load = network.total_load()
    for t in range(horizon):
        coeffs = {commit[i, t]: network.units[i].p_max for i in range(n_units)}
        p.add_constraint(_name("reserve", t), coeffs, Sense.GE,
                         float(total_load[t] + network.reserve[t]))

    # redispatch band between base and contingency dispatch
    for i, unit in enumerate(network.units):
        for t in range(horizon):
            for s in range(1, n_scen):
                p.add_constraint(
                    _name("redispatch_hi", unit.id, t, s),
                    {power[i, t, 0]: 1.0, power[i, t, s]: -1.0},
                    Sense.LE, unit.delta_adjust)
                p.add_constraint(
                    _name("redispatch_lo", unit.id, t, s),
                    {power[i, t, s]: 1.0, power[i, t, 0]: -1.0},
                    Sense.LE, unit.delta_adjust)

    # nodal balance with incidence-signed flows
    units_at = {b: [] for b in range(n_buses)}
    for i, unit in enumerate(network.units):
        units_at[network.bus_index(unit.bus)].append(i)
    lines_at = {b: [] for b in range(n_buses)}
    for l, line in enumerate(network.lines):
        lines_at[network.bus_index(line.from_bus)].append((l, 1.0))
        lines_at[network.bus_index(line.to_bus)].append((l, -1.0))
    for b, bus in enumerate(network.buses):
        for t in range(horizon):
            for s in range(n_scen):
                coeffs = {}
                for i in units_at[b]:
                    coeffs[power[i, t, s]] = 1.0
                for l, sign in lines_at[b]:
                    coeffs[flow[l, t, s]] = coeffs.get(flow[l, t, s], 0.0) - sign
                coeffs[shed[b, t, s]] = 1.0
                p.add_constraint(_name("balance", bus.id, t, s), coeffs,
                                 Sense.EQ, float(network.loads[b, t]))

    # DC flow coupling in MW, big-M relaxed when the line is out
    for l, line in enumerate(network.lines):
        susceptance = network.base_mva / line.reactance
        b_from = network.bus_index(line.from_bus)
        b_to = network.bus_index(line.to_bus)
        m_line = big_m(line, network.base_mva)
        for t in range(horizon):
            for s, sc in enumerate(scenarios.scenarios):
                slack = m_line * (1.0 - float(sc.uy[l, t]))
                coeffs = {flow[l, t, s]: 1.0,
                          angle[b_from, t, s]: -susceptance,
                          angle[b_to, t, s]: susceptance}
                p.add_constraint(_name("dc_hi", line.id, t, s), coeffs,
                                 Sense.LE, slack)
                coeffs = {flow[l, t, s]: -1.0,
                          angle[b_from, t, s]: susceptance,
                          angle[b_to, t, s]: -susceptance}
                p.add_constraint(_name("dc_lo", line.id, t, s), coeffs,
                                 Sense.LE, slack)

    p.validate()
    return p


# ---------------------------------------------------------------------------
# solution extraction


@dataclass(frozen=True)
class ScheduleSolution:
    commitment: np.ndarray  # (n_units, horizon) int
    startup: np.ndarray  # (n_units, horizon) int, derived from transitions
    shutdown: np.ndarray
    dispatch: np.ndarray  # (n_units, horizon, n_scenarios) MW
    flows: np.ndarray  # (n_lines, horizon, n_scenarios) MW
    angles: np.ndarray  # (n_buses, horizon, n_scenarios) rad
    curtailment: np.ndarray  # (n_buses, horizon, n_scenarios) MW
    operation_cost: float
    unserved_cost: float
    objective: float
    scenario_curtailment: np.ndarray  # (n_scenarios,) MWh


def _transition_counts(network, commitment):
    startup = np.zeros_like(commitment)
    shutdown = np.zeros_like(commitment)
    for i, unit in enumerate(network.units):
        previous = 1 if unit.initially_on else 0
        for t in range(network.horizon):
            delta = commitment[i, t] - previous
            startup[i, t] = max(delta, 0)
            shutdown[i, t] = max(-delta, 0)
            previous = commitment[i, t]
    return startup, shutdown


def operation_cost(network: GridNetwork, commitment, base_dispatch) -> float:
    """Energy plus transition cost of the base schedule, from scratch."""
    startup, shutdown = _transition_counts(network, commitment)
    total = 0.0
    for i, unit in enumerate(network.units):
        for t in range(network.horizon):
            total += unit.energy_cost(float(base_dispatch[i, t]))
            total += unit.startup_cost * startup[i, t]
            total += unit.shutdown_cost * shutdown[i, t]
    return total


def unserved_cost(network: GridNetwork, scenarios: ScenarioSet,
                  curtailment) -> float:
    total = 0.0
    voll = np.array([bus.voll for bus in network.buses])
    for s, sc in enumerate(scenarios.scenarios):
        if s == 0:
            continue
        total += sc.weight * float(voll @ curtailment[:, :, s].sum(axis=1))
    return total


def extract_solution(network: GridNetwork, scenarios: ScenarioSet,
                     problem: MilpProblem, result) -> ScheduleSolution:
    """Shape raw solver values into tensors and recompute the objective
    from first principles; a mismatch beyond 1e-4 relative is an error."""
    values = result.values
    if values is None:
        raise EscucError("solver returned no incumbent to extract")
    if len(values) != problem.n_variables:
        raise EscucError(
            f"solution has {len(values)} columns, problem has "
            f"{problem.n_variables}")
    n_scen = len(scenarios.scenarios)
    horizon = network.horizon

    def grab(tag, ids, third=None):
        if third is None:
            out = np.zeros((len(ids), horizon))
            for a, ident in enumerate(ids):
                for t in range(horizon):
                    out[a, t] = values[problem.column(_name(tag, ident, t))]
            return out
        out = np.zeros((len(ids), horizon, third))
        for a, ident in enumerate(ids):
            for t in range(horizon):
                for s in range(third):
                    out[a, t, s] = values[problem.column(_name(tag, ident, t, s))]
        return out

    unit_ids = [u.id for u in network.units]
    commitment = np.rint(grab("commit", unit_ids)).astype(np.int64)
    dispatch = grab("power", unit_ids, n_scen)
    flows = grab("flow", [l.id for l in network.lines], n_scen)
    angles = grab("angle", [b.id for b in network.buses], n_scen)
    curtailment = grab("shed", [b.id for b in network.buses], n_scen)
    startup, shutdown = _transition_counts(network, commitment)

    op_cost = operation_cost(network, commitment, dispatch[:, :, 0])
    shed_cost = unserved_cost(network, scenarios, curtailment)
    recomputed = op_cost + shed_cost
    solver_objective = float(result.objective)
    if abs(recomputed - solver_objective) > 1e-4 * max(1.0, abs(solver_objective)):
        raise EscucError(
            f"recomputed objective {recomputed:.6f} does not match solver "
            f"objective {solver_objective:.6f}")
    scenario_curtailment = curtailment.sum(axis=(0, 1))
    return ScheduleSolution(
        commitment=commitment, startup=startup, shutdown=shutdown,
        dispatch=dispatch, flows=flows, angles=angles, curtailment=curtailment,
        operation_cost=op_cost, unserved_cost=shed_cost, objective=recomputed,
        scenario_curtailment=scenario_curtailment)


# ---------------------------------------------------------------------------
# independent feasibility check


@dataclass(frozen=True)
class FamilyViolation:
    family: str
    max_violation: float
    where: tuple  # labels of the worst entry, e.g. (bus id, period, scenario)
    count: int  # entries above tolerance


@dataclass(frozen=True)
class ViolationReport:
    families: dict
    tolerance: float

    @property
    def max_violation(self) -> float:
        return max((f.max_violation for f in self.families.values()),
                   default=0.0)

    @property
    def clean(self) -> bool:
        return self.max_violation <= self.tolerance

    def flagged(self) -> list:
        return sorted(name for name, fam in self.families.items()
                      if fam.max_violation > self.tolerance)

    def to_text(self) -> str:
        lines = [f"{'family':<12} {'max violation':>14} {'count':>6}  worst at"]
        for name in sorted(self.families):
            fam = self.families[name]
            where = ",".join(str(w) for w in fam.where) if fam.where else "-"
            lines.append(f"{name:<12} {fam.max_violation:>14.3e} "
                         f"{fam.count:>6}  {where}")
        verdict = "clean" if self.clean else "VIOLATIONS"
        lines.append(f"result: {verdict} (tolerance {self.tolerance:g})")
        return "\n".join(lines)

    def to_csv(self) -> str:
        lines = ["family,max_violation,count,worst_at"]
        for name in sorted(self.families):
            fam = self.families[name]
            where = ";".join(str(w) for w in fam.where) if fam.where else ""
            lines.append(f"{name},{float(fam.max_violation)!r},{fam.count},{where}")
        return "\n".join(lines) + "\n"


class _FamilyTracker:
    def __init__(self, tolerance):
        self.tolerance = tolerance
        self.best = {}

    def record(self, family, violation, where):
        violation = float(violation)
        current = self.best.get(family)
        if current is None:
            self.best[family] = [0.0, (), 0]
            current = self.best[family]
        if violation > current[0]:
            current[0] = violation
            current[1] = where
        if violation > self.tolerance:
            current[2] += 1

    def report(self):
        return {name: FamilyViolation(name, v, tuple(w), c)
                for name, (v, w, c) in self.best.items()}


def check_solution(network: GridNetwork, scenarios: ScenarioSet,
                   solution: ScheduleSolution,
                   tolerance: float = 1e-6) -> ViolationReport:
    """Evaluate every constraint family directly from the physics."""
    track = _FamilyTracker(tolerance)
    horizon = network.horizon
    n_scen = len(scenarios.scenarios)
    commitment = solution.commitment
    dispatch = solution.dispatch
    flows = solution.flows
    angles = solution.angles
    shed = solution.curtailment

    unit_bus = [network.bus_index(u.bus) for u in network.units]
    line_ends = [(network.bus_index(l.from_bus), network.bus_index(l.to_bus))
                 for l in network.lines]

    for s, sc in enumerate(scenarios.scenarios):
        for t in range(horizon):
            # nodal balance
            for b, bus in enumerate(network.buses):
                injected = sum(dispatch[i, t, s] for i in range(len(network.units))
                               if unit_bus[i] == b)
                flow_out = 0.0
                for l, (bf, bt) in enumerate(line_ends):
                    if bf == b:
                        flow_out += flows[l, t, s]
                    elif bt == b:
                        flow_out -= flows[l, t, s]
                residual = injected - flow_out + shed[b, t, s] - network.loads[b, t]
                track.record("balance", abs(residual), (bus.id, t, s))

            # capacity coupling
            for i, unit in enumerate(network.units):
                cap = unit.p_max * commitment[i, t] * sc.ux[i, t]
                floor = unit.p_min * commitment[i, t] * sc.ux[i, t]
                over = max(dispatch[i, t, s] - cap, floor - dispatch[i, t, s])
                track.record("capacity", max(over, 0.0), (unit.id, t, s))

            # ramps
            for i, unit in enumerate(network.units):
                previous = unit.initial_power if t == 0 else dispatch[i, t - 1, s]
                step = dispatch[i, t, s] - previous
                worst = max(step - unit.ramp_up, -step - unit.ramp_down)
                track.record("ramp", max(worst, 0.0), (unit.id, t, s))

            # curtailment bounds; zero in the base scenario
            for b, bus in enumerate(network.buses):
                lc = shed[b, t, s]
                ceiling = network.loads[b, t] if s else 0.0
                over = max(-lc, lc - ceiling)
                track.record("curtailment", max(over, 0.0), (bus.id, t, s))

            # redispatch band
            if s:
                for i, unit in enumerate(network.units):
                    drift = abs(dispatch[i, t, 0] - dispatch[i, t, s])
                    track.record("redispatch", max(drift - unit.delta_adjust, 0.0),
                                 (unit.id, t, s))

            # line limits and DC coupling
            for l, line in enumerate(network.lines):
                cap = line.flow_limit * sc.uy[l, t]
                track.record("flow_limit", max(abs(flows[l, t, s]) - cap, 0.0),
                             (line.id, t, s))
                if sc.uy[l, t]:
                    bf, bt = line_ends[l]
                    implied = (network.base_mva
                               * (angles[bf, t, s] - angles[bt, t, s])
                               / line.reactance)
                    track.record("dc_flow", abs(flows[l, t, s] - implied),
                                 (line.id, t, s))
                else:
                    track.record("dc_flow", 0.0, (line.id, t, s))

    # reserve, commitment only
    total_load = network.total_load()
    for t in range(horizon):
        committed = sum(network.units[i].p_max * commitment[i, t]
                        for i in range(len(network.units)))
        shortfall = total_load[t] + network.reserve[t] - committed
        track.record("reserve", max(shortfall, 0.0), (t,))

    # minimum up/down from the commitment runs, crediting initial hours
    for i, unit in enumerate(network.units):
        seq = commitment[i].tolist()
        initial = 1 if unit.initially_on else 0
        credit = unit.initial_on_hours if initial else unit.initial_off_hours
        run_state, run_length, run_start = initial, credit, 0
        for t in range(horizon + 1):
            state = seq[t] if t < horizon else None
            if state == run_state:
                run_length += 1
                continue
            # run ended at t-1 (or the horizon edge, which never violates)
            if state is not None:
                need = unit.min_up if run_state == 1 else unit.min_down
                short = need - run_length
                family = "min_up" if run_state == 1 else "min_down"
                track.record(family, max(float(short), 0.0), (unit.id, run_start))
            run_state, run_length, run_start = state, 1, t
        track.record("min_up", 0.0, (unit.id, 0))
        track.record("min_down", 0.0, (unit.id, 0))

    return ViolationReport(track.report(), tolerance)


# ---------------------------------------------------------------------------
# solution files


def save_solution(solution: ScheduleSolution, path) -> None:
    payload = {
        "commitment": solution.commitment.tolist(),
        "startup": solution.startup.tolist(),
        "shutdown": solution.shutdown.tolist(),
        "dispatch": solution.dispatch.tolist(),
        "flows": solution.flows.tolist(),
        "angles": solution.angles.tolist(),
        "curtailment": solution.curtailment.tolist(),
        "operation_cost": solution.operation_cost,
        "unserved_cost": solution.unserved_cost,
        "objective": solution.objective,
        "scenario_curtailment": solution.scenario_curtailment.tolist(),
    }
    Path(path).write_text(json.dumps(payload, indent=1) + "\n")


def load_solution(path) -> ScheduleSolution:
    raw = json.loads(Path(path).read_text())
    return ScheduleSolution(
        commitment=np.array(raw["commitment"], dtype=np.int64),
        startup=np.array(raw["startup"], dtype=np.int64),
        shutdown=np.array(raw["shutdown"], dtype=np.int64),
        dispatch=np.array(raw["dispatch"]),
        flows=np.array(raw["flows"]),
        angles=np.array(raw["angles"]),
        curtailment=np.array(raw["curtailment"]),
        operation_cost=float(raw["operation_cost"]),
        unserved_cost=float(raw["unserved_cost"]),
        objective=float(raw["objective"]),
        scenario_curtailment=np.array(raw["scenario_curtailment"]),
    )
