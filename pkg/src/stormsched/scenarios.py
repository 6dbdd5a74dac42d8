"""Contingency scenario sets for event-driven commitment.

Components predicted on outage (the m set) are out in every contingency
scenario; the uncertain set (u components) is expanded according to the
selected policy. Scenario 0 is always the intact base case. Outage states
are per-period binary matrices so a restricted impact window stays
expressible, with the default window covering the whole horizon.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np

from .grid import GridNetwork
from .multiclass import ClassLabel

POLICY_OUTAGE_ONLY = "outage-only"
POLICY_ALL_UNCERTAIN = "all-uncertain"
POLICY_ONE_PER_SCENARIO = "one-per-scenario"
POLICY_SUBSETS_PREFIX = "subsets:"


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    id: int
    label: str
    ux: np.ndarray  # (n_units, horizon) in {0, 1}; 0 = unit on outage
    uy: np.ndarray  # (n_lines, horizon) in {0, 1}; 0 = line on outage
    weight: float


@dataclass(frozen=True)
class ScenarioSet:
    scenarios: tuple
    policy: str

    def __len__(self) -> int:
        return len(self.scenarios)

    @property
    def contingencies(self) -> tuple:
        return self.scenarios[1:]


def _subset_size(policy: str) -> int:
    size = int(policy[len(POLICY_SUBSETS_PREFIX):])
    if size < 1:
        raise ScenarioError(f"subset size must be >= 1, got {size}")
    return size


def parse_policy(policy: str) -> str:
    known = (POLICY_OUTAGE_ONLY, POLICY_ALL_UNCERTAIN, POLICY_ONE_PER_SCENARIO)
    if policy in known:
        return policy
    if policy.startswith(POLICY_SUBSETS_PREFIX):
        _subset_size(policy)  # validates
        return policy
    raise ScenarioError(
        f"unknown policy {policy!r}; expected one of {', '.join(known)} "
        f"or {POLICY_SUBSETS_PREFIX}<k>")


def _component_axes(network: GridNetwork, component_id: str):
    """('unit'|'line', row index) for a component id."""
    for i, unit in enumerate(network.units):
        if unit.id == component_id:
            return "unit", i
    for i, line in enumerate(network.lines):
        if line.id == component_id:
            return "line", i
    raise ScenarioError(f"scenario component {component_id!r} is neither a "
                        "unit nor a line of the network")


def _outage_matrices(network, out_components, window):
    t0, t1 = window
    ux = np.ones((len(network.units), network.horizon), dtype=np.int8)
    uy = np.ones((len(network.lines), network.horizon), dtype=np.int8)
    for component_id in out_components:
        axis, row = _component_axes(network, component_id)
        target = ux if axis == "unit" else uy
        target[row, t0:t1] = 0
    return ux, uy


def build_scenarios(network: GridNetwork, classes: dict, policy: str,
                    impact_window: tuple | None = None,
                    uniform_probability: bool = False) -> ScenarioSet:
    """Expand classified components into a scenario set under `policy`.

    classes: component id -> ClassLabel. Unknown ids are rejected.
    impact_window: (first period, one past last) during which outages
    apply; defaults to the whole horizon. With uniform_probability each
    contingency scenario is weighted 1/n instead of the default 1.
    """
    policy = parse_policy(policy)
    if not classes:
        raise ScenarioError("empty component classification")
    for component_id in classes:
        _component_axes(network, component_id)  # validates
    window = impact_window if impact_window is not None else (0, network.horizon)
    t0, t1 = window
    if not (0 <= t0 < t1 <= network.horizon):
        raise ScenarioError(f"impact window {window} outside horizon "
                            f"[0, {network.horizon})")

    outage_ids = sorted(k for k, v in classes.items() if v is ClassLabel.OUTAGE)
    uncertain_ids = sorted(k for k, v in classes.items()
                           if v is ClassLabel.UNCERTAIN)

    out_sets = []
    if policy == POLICY_OUTAGE_ONLY:
        if outage_ids:
            out_sets.append((POLICY_OUTAGE_ONLY, outage_ids))
        else:
            warnings.warn("no components in the outage class; scenario set "
                          "contains only the base case", stacklevel=2)
    elif policy == POLICY_ALL_UNCERTAIN:
        combined = outage_ids + uncertain_ids
        if combined:
            out_sets.append((POLICY_ALL_UNCERTAIN, combined))
        else:
            warnings.warn("no outage or uncertain components; scenario set "
                          "contains only the base case", stacklevel=2)
    elif policy == POLICY_ONE_PER_SCENARIO:
        for uncertain_id in uncertain_ids:
            out_sets.append((f"uncertain:{uncertain_id}",
                             outage_ids + [uncertain_id]))
        if not uncertain_ids and outage_ids:
            # nothing to vary; fall back to the pure outage contingency
            out_sets.append((POLICY_OUTAGE_ONLY, outage_ids))
    else:
        size = _subset_size(policy)
        for k in range(1, size + 1):
            for combo in itertools.combinations(uncertain_ids, k):
                out_sets.append(("uncertain:" + "+".join(combo),
                                 outage_ids + list(combo)))
        if not out_sets and outage_ids:
            out_sets.append((POLICY_OUTAGE_ONLY, outage_ids))

    base_ux = np.ones((len(network.units), network.horizon), dtype=np.int8)
    base_uy = np.ones((len(network.lines), network.horizon), dtype=np.int8)
    scenarios = [Scenario(0, "base", base_ux, base_uy, 0.0)]
    weight = 1.0 / len(out_sets) if (uniform_probability and out_sets) else 1.0
    for label, out_components in out_sets:
        ux, uy = _outage_matrices(network, out_components, window)
        scenarios.append(Scenario(len(scenarios), label, ux, uy, weight))
    return ScenarioSet(tuple(scenarios), policy)


def save_scenarios(scenario_set: ScenarioSet, network: GridNetwork, path) -> None:
    """Text form: one line per scenario listing out components per period."""
    lines = [f"policy,{scenario_set.policy}"]
    for sc in scenario_set.scenarios:
        out = []
        for i, unit in enumerate(network.units):
            periods = np.flatnonzero(sc.ux[i] == 0)
            if periods.size:
                out.append(f"{unit.id}@{'+'.join(map(str, periods))}")
        for i, line in enumerate(network.lines):
            periods = np.flatnonzero(sc.uy[i] == 0)
            if periods.size:
                out.append(f"{line.id}@{'+'.join(map(str, periods))}")
        lines.append(f"{sc.id},{sc.label},{sc.weight!r},{' '.join(out)}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def network_component_sites(network: GridNetwork):
    """Geographic site per schedulable component: units sit at their bus,
    lines at the midpoint of their endpoints. Used to feed the classifier."""
    from .hurricane import ComponentSite

    by_id = {bus.id: bus for bus in network.buses}
    sites = []
    for unit in network.units:
        bus = by_id[unit.bus]
        sites.append(ComponentSite(unit.id, (bus.x_km, bus.y_km)))
    for line in network.lines:
        a, b = by_id[line.from_bus], by_id[line.to_bus]
        sites.append(ComponentSite(line.id,
                                   ((a.x_km + b.x_km) / 2.0,
                                    (a.y_km + b.y_km) / 2.0)))
    return sites
