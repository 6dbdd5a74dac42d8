"""Static transmission-grid data model: buses, generating units, lines,
loads and reserve over an hourly horizon, with file round-trip.

The on-disk format is a documented JSON schema (see `write_network`), so
fixtures stay diffable and hand-editable. Validation happens at load
time and every diagnostic names the offending component.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class NetworkError(ValueError):
    pass


@dataclass(frozen=True)
class Bus:
    id: str
    voll: float  # $/MWh price on unserved energy at this bus
    x_km: float
    y_km: float


@dataclass(frozen=True)
class GenUnit:
    id: str
    bus: str
    p_min: float
    p_max: float
    ramp_up: float  # MW per hour
    ramp_down: float
    min_up: int  # hours
    min_down: int
    cost_curve: tuple  # ((upper breakpoint MW, marginal $/MWh), ...) from 0 MW
    startup_cost: float
    shutdown_cost: float
    delta_adjust: float  # MW band around the base dispatch per scenario
    initial_on_hours: int
    initial_off_hours: int
    initial_power: float

    @property
    def initially_on(self) -> bool:
        return self.initial_on_hours > 0

    def segment_widths(self) -> np.ndarray:
        prev = 0.0
        widths = []
        for breakpoint_mw, _ in self.cost_curve:
            widths.append(breakpoint_mw - prev)
            prev = breakpoint_mw
        return np.array(widths)

    def marginal_costs(self) -> np.ndarray:
        return np.array([m for _, m in self.cost_curve])

    def energy_cost(self, power_mw: float) -> float:
        """Convex piecewise-linear cost of one hour at `power_mw`."""
        remaining = power_mw
        total = 0.0
        for width, marginal in zip(self.segment_widths(), self.marginal_costs()):
            take = min(remaining, width)
            if take <= 0.0:
                break
            total += take * marginal
            remaining -= take
        return total


@dataclass(frozen=True)
class Line:
    id: str
    from_bus: str
    to_bus: str
    reactance: float  # per-unit
    flow_limit: float  # MW


@dataclass(frozen=True)
class GridNetwork:
    buses: tuple
    units: tuple
    lines: tuple
    horizon: int
    loads: np.ndarray  # (n_buses, horizon) MW
    reserve: np.ndarray  # (horizon,) MW
    base_mva: float

    def bus_index(self, bus_id: str) -> int:
        for i, bus in enumerate(self.buses):
            if bus.id == bus_id:
                return i
        raise NetworkError(f"unknown bus {bus_id!r}")

    def unit_index(self, unit_id: str) -> int:
        for i, unit in enumerate(self.units):
            if unit.id == unit_id:
                return i
        raise NetworkError(f"unknown unit {unit_id!r}")

    def line_index(self, line_id: str) -> int:
        for i, line in enumerate(self.lines):
            if line.id == line_id:
                return i
        raise NetworkError(f"unknown line {line_id!r}")

    def total_load(self) -> np.ndarray:
        return self.loads.sum(axis=0)


def incidence_row(network: GridNetwork, line_id: str) -> np.ndarray:
    """+1 at the line's from-bus, -1 at its to-bus, 0 elsewhere."""
    line = network.lines[network.line_index(line_id)]
    row = np.zeros(len(network.buses))
    row[network.bus_index(line.from_bus)] = 1.0
    row[network.bus_index(line.to_bus)] = -1.0
    return row


def validate_network(network: GridNetwork) -> None:
    bus_ids = [b.id for b in network.buses]
    if len(set(bus_ids)) != len(bus_ids):
        raise NetworkError("duplicate bus ids")
    seen = set()
    for unit in network.units:
        if unit.id in seen:
            raise NetworkError(f"duplicate component id {unit.id!r}")
        seen.add(unit.id)
    for line in network.lines:
        if line.id in seen:
            raise NetworkError(f"duplicate component id {line.id!r}")
        seen.add(line.id)

    if network.horizon < 1:
        raise NetworkError("horizon must be at least one period")
    if network.loads.shape != (len(network.buses), network.horizon):
        raise NetworkError(
            f"loads shape {network.loads.shape} does not match "
            f"(buses, horizon) = ({len(network.buses)}, {network.horizon})")
    if np.any(network.loads < 0):
        raise NetworkError("loads must be nonnegative")
    if network.reserve.shape != (network.horizon,):
        raise NetworkError("reserve vector length must equal the horizon")
    if np.any(network.reserve < 0):
        raise NetworkError("reserve must be nonnegative")
    if network.base_mva <= 0:
        raise NetworkError("base_mva must be positive")

    for bus in network.buses:
        if bus.voll < 0:
            raise NetworkError(f"bus {bus.id!r}: negative value of lost load")

    for unit in network.units:
        if unit.bus not in bus_ids:
            raise NetworkError(f"unit {unit.id!r}: dangling bus reference {unit.bus!r}")
        if not (0.0 <= unit.p_min <= unit.p_max):
            raise NetworkError(f"unit {unit.id!r}: needs 0 <= p_min <= p_max")
        for label, value in (("ramp_up", unit.ramp_up), ("ramp_down", unit.ramp_down),
                             ("startup_cost", unit.startup_cost),
                             ("shutdown_cost", unit.shutdown_cost),
                             ("delta_adjust", unit.delta_adjust)):
            if value < 0:
                raise NetworkError(f"unit {unit.id!r}: negative {label}")
        for label, value in (("min_up", unit.min_up), ("min_down", unit.min_down),
                             ("initial_on_hours", unit.initial_on_hours),
                             ("initial_off_hours", unit.initial_off_hours)):
            if value < 0:
                raise NetworkError(f"unit {unit.id!r}: negative {label}")
        if unit.initial_on_hours > 0 and unit.initial_off_hours > 0:
            raise NetworkError(
                f"unit {unit.id!r}: cannot be initially both on and off")
        if not unit.cost_curve:
            raise NetworkError(f"unit {unit.id!r}: empty cost curve")
        prev_break, prev_marginal = 0.0, -np.inf
        for breakpoint_mw, marginal in unit.cost_curve:
            if breakpoint_mw <= prev_break:
                raise NetworkError(
                    f"unit {unit.id!r}: cost breakpoints must increase")
            if marginal < prev_marginal:
                raise NetworkError(
                    f"unit {unit.id!r}: nonconvex cost curve "
                    f"(marginal {marginal} after {prev_marginal})")
            if marginal < 0:
                raise NetworkError(f"unit {unit.id!r}: negative marginal cost")
            prev_break, prev_marginal = breakpoint_mw, marginal
        if abs(prev_break - unit.p_max) > 1e-9:
            raise NetworkError(
                f"unit {unit.id!r}: cost curve must end at p_max "
                f"({prev_break} != {unit.p_max})")
        if unit.initially_on:
            if not (unit.p_min - 1e-9 <= unit.initial_power <= unit.p_max + 1e-9):
                raise NetworkError(
                    f"unit {unit.id!r}: initial_power outside [p_min, p_max] "
                    "while initially on")
        elif unit.initial_power != 0.0:
            raise NetworkError(
                f"unit {unit.id!r}: initial_power must be 0 while initially off")

    for line in network.lines:
        for end in (line.from_bus, line.to_bus):
            if end not in bus_ids:
                raise NetworkError(
                    f"line {line.id!r}: dangling bus reference {end!r}")
        if line.from_bus == line.to_bus:
            raise NetworkError(f"line {line.id!r}: connects a bus to itself")
        if line.reactance <= 0:
            raise NetworkError(f"line {line.id!r}: reactance must be positive")
        if line.flow_limit <= 0:
            raise NetworkError(f"line {line.id!r}: flow_limit must be positive")


def load_network(path) -> GridNetwork:
    """Read and validate a network file; see write_network for the schema."""
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkError(f"{path}:{exc.lineno}: {exc.msg}") from None
    try:
        buses = tuple(Bus(str(b["id"]), float(b["voll"]),
                          float(b["x_km"]), float(b["y_km"]))
                      for b in raw["buses"])
        units = tuple(
            GenUnit(
                id=str(u["id"]), bus=str(u["bus"]),
                p_min=float(u["p_min"]), p_max=float(u["p_max"]),
                ramp_up=float(u["ramp_up"]), ramp_down=float(u["ramp_down"]),
                min_up=int(u["min_up"]), min_down=int(u["min_down"]),
                cost_curve=tuple((float(p), float(m)) for p, m in u["cost_curve"]),
                startup_cost=float(u["startup_cost"]),
                shutdown_cost=float(u["shutdown_cost"]),
                delta_adjust=float(u["delta_adjust"]),
                initial_on_hours=int(u["initial_on_hours"]),
                initial_off_hours=int(u["initial_off_hours"]),
                initial_power=float(u["initial_power"]),
            ) for u in raw["units"])
        lines = tuple(Line(str(l["id"]), str(l["from_bus"]), str(l["to_bus"]),
                           float(l["reactance"]), float(l["flow_limit"]))
                      for l in raw["lines"])
        horizon = int(raw["horizon"])
        loads = np.zeros((len(buses), horizon))
        for i, bus in enumerate(buses):
            series = raw["loads"].get(bus.id, [0.0] * horizon)
            if len(series) != horizon:
                raise NetworkError(
                    f"loads for bus {bus.id!r} have length {len(series)}, "
                    f"expected {horizon}")
            loads[i] = [float(v) for v in series]
        reserve = np.array([float(v) for v in raw["reserve"]])
        network = GridNetwork(buses, units, lines, horizon, loads, reserve,
                              float(raw["base_mva"]))
    except NetworkError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise NetworkError(f"{path}: malformed network file ({exc})") from None
    validate_network(network)
    return network


def write_network(network: GridNetwork, path) -> None:
    """Serialize to the JSON schema:

    {"base_mva": .., "horizon": T, "reserve": [T floats],
     "buses":  [{"id", "voll", "x_km", "y_km"}, ...],
     "units":  [{"id", "bus", "p_min", "p_max", "ramp_up", "ramp_down",
                 "min_up", "min_down", "cost_curve": [[break_mw, marginal]..],
                 "startup_cost", "shutdown_cost", "delta_adjust",
                 "initial_on_hours", "initial_off_hours", "initial_power"}, ...],
     "lines":  [{"id", "from_bus", "to_bus", "reactance", "flow_limit"}, ...],
     "loads":  {bus id: [T floats], ...}}
    """
    validate_network(network)
    payload = {
        "base_mva": network.base_mva,
        "horizon": network.horizon,
        "reserve": [float(v) for v in network.reserve],
        "buses": [{"id": b.id, "voll": b.voll, "x_km": b.x_km, "y_km": b.y_km}
                  for b in network.buses],
        "units": [{
            "id": u.id, "bus": u.bus, "p_min": u.p_min, "p_max": u.p_max,
            "ramp_up": u.ramp_up, "ramp_down": u.ramp_down,
            "min_up": u.min_up, "min_down": u.min_down,
            "cost_curve": [[p, m] for p, m in u.cost_curve],
            "startup_cost": u.startup_cost, "shutdown_cost": u.shutdown_cost,
            "delta_adjust": u.delta_adjust,
            "initial_on_hours": u.initial_on_hours,
            "initial_off_hours": u.initial_off_hours,
            "initial_power": u.initial_power,
        } for u in network.units],
        "lines": [{"id": l.id, "from_bus": l.from_bus, "to_bus": l.to_bus,
                   "reactance": l.reactance, "flow_limit": l.flow_limit}
                  for l in network.lines],
        "loads": {b.id: [float(v) for v in network.loads[i]]
                  for i, b in enumerate(network.buses)},
    }
    Path(path).write_text(json.dumps(payload, indent=1) + "\n")
