import dataclasses
import json
from pathlib import Path

import numpy as np
import pytest

from stormsched.grid import (
    Bus,
    GenUnit,
    GridNetwork,
    Line,
    NetworkError,
    incidence_row,
    load_network,
    validate_network,
    write_network,
)

DATA_DIR = Path(__file__).resolve().parents[1] / "src" / "stormsched" / "data"
FIXTURE = DATA_DIR / "sixbus.json"
BIG_FIXTURE = DATA_DIR / "ieee118.json"


def two_bus_network() -> GridNetwork:
    buses = (
        Bus("a", 1000.0, 0.0, 0.0),
        Bus("b", 2000.0, 10.0, 0.0),
    )
    units = (
        GenUnit(
            id="g", bus="a", p_min=10.0, p_max=100.0,
            ramp_up=100.0, ramp_down=100.0, min_up=1, min_down=1,
            cost_curve=((60.0, 12.0), (100.0, 20.0)),
            startup_cost=40.0, shutdown_cost=15.0, delta_adjust=50.0,
            initial_on_hours=2, initial_off_hours=0, initial_power=30.0,
        ),
    )
    lines = (Line("ab", "a", "b", 0.5, 90.0),)
    loads = np.array([[0.0, 0.0], [40.0, 60.0]])
    reserve = np.array([5.0, 5.0])
    return GridNetwork(buses, units, lines, 2, loads, reserve, 100.0)


def networks_equal(left: GridNetwork, right: GridNetwork) -> bool:
    return (
        left.buses == right.buses
        and left.units == right.units
        and left.lines == right.lines
        and left.horizon == right.horizon
        and np.array_equal(left.loads, right.loads)
        and np.array_equal(left.reserve, right.reserve)
        and left.base_mva == right.base_mva
    )


def replace_unit(network: GridNetwork, **changes) -> GridNetwork:
    unit = dataclasses.replace(network.units[0], **changes)
    return dataclasses.replace(network, units=(unit,) + network.units[1:])


class TestRoundTrip:
    def test_write_then_load_is_exact(self, tmp_path):
        net = two_bus_network()
        path = tmp_path / "net.json"
        write_network(net, path)
        assert networks_equal(load_network(path), net)

    def test_round_trip_preserves_awkward_floats(self, tmp_path):
        net = two_bus_network()
        loads = net.loads.copy()
        loads[1, 0] = 40.1 + 0.2  # not representable exactly in decimal
        net = dataclasses.replace(net, loads=loads)
        path = tmp_path / "net.json"
        write_network(net, path)
        assert load_network(path).loads[1, 0] == loads[1, 0]

    def test_bundled_fixture_loads(self):
        net = load_network(FIXTURE)
        assert len(net.buses) == 6
        assert len(net.units) == 3
        assert len(net.lines) == 7
        assert net.horizon == 4
        assert net.base_mva == 100.0
        # peak load plus reserve exceeds any two-unit commitment that
        # leaves out the big unit, which pins down the fixture's schedules
        peak = int(np.argmax(net.total_load()))
        assert net.total_load()[peak] + net.reserve[peak] > 310.0

    def test_planning_scale_fixture_loads(self):
        net = load_network(BIG_FIXTURE)
        assert len(net.buses) == 118
        assert len(net.lines) == 186
        assert len(net.units) == 54
        assert net.horizon == 24
        capacity = sum(u.p_max for u in net.units)
        assert capacity > net.total_load().max() + net.reserve.max()

    def test_planning_scale_fixture_is_connected(self):
        net = load_network(BIG_FIXTURE)
        parent = list(range(len(net.buses)))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for line in net.lines:
            a, b = find(net.bus_index(line.from_bus)), find(net.bus_index(line.to_bus))
            if a != b:
                parent[a] = b
        assert len({find(i) for i in range(len(net.buses))}) == 1


class TestDiagnostics:
    def test_parse_error_reports_line_number(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{\n "horizon": 4,\n oops\n}\n')
        with pytest.raises(NetworkError, match=r"broken\.json:3:"):
            load_network(path)

    def test_missing_key_is_wrapped(self, tmp_path):
        path = tmp_path / "short.json"
        path.write_text('{"horizon": 1}\n')
        with pytest.raises(NetworkError, match="malformed network file"):
            load_network(path)

    def test_dangling_unit_bus(self):
        net = replace_unit(two_bus_network(), bus="nowhere")
        with pytest.raises(NetworkError, match="dangling bus reference 'nowhere'"):
            validate_network(net)

    def test_dangling_line_bus(self):
        net = two_bus_network()
        bad = dataclasses.replace(net.lines[0], to_bus="ghost")
        net = dataclasses.replace(net, lines=(bad,))
        with pytest.raises(NetworkError, match="dangling bus reference 'ghost'"):
            validate_network(net)

    def test_nonconvex_cost_curve(self):
        net = replace_unit(two_bus_network(),
                           cost_curve=((60.0, 20.0), (100.0, 12.0)))
        with pytest.raises(NetworkError, match="nonconvex cost curve"):
            validate_network(net)

    def test_cost_curve_must_reach_p_max(self):
        net = replace_unit(two_bus_network(),
                           cost_curve=((60.0, 12.0), (90.0, 20.0)))
        with pytest.raises(NetworkError, match="must end at p_max"):
            validate_network(net)

    def test_duplicate_component_id(self):
        net = two_bus_network()
        clash = dataclasses.replace(net.lines[0], id="g")
        net = dataclasses.replace(net, lines=(clash,))
        with pytest.raises(NetworkError, match="duplicate component id 'g'"):
            validate_network(net)

    def test_loads_shape_mismatch(self):
        net = dataclasses.replace(two_bus_network(), loads=np.zeros((2, 3)))
        with pytest.raises(NetworkError, match="loads shape"):
            validate_network(net)

    def test_initial_power_while_off(self):
        net = replace_unit(two_bus_network(), initial_on_hours=0,
                           initial_off_hours=3, initial_power=30.0)
        with pytest.raises(NetworkError, match="initial_power must be 0"):
            validate_network(net)

    def test_initially_both_on_and_off(self):
        net = replace_unit(two_bus_network(), initial_off_hours=1)
        with pytest.raises(NetworkError, match="both on and off"):
            validate_network(net)

    def test_self_loop_line(self):
        net = two_bus_network()
        loop = dataclasses.replace(net.lines[0], to_bus="a")
        net = dataclasses.replace(net, lines=(loop,))
        with pytest.raises(NetworkError, match="connects a bus to itself"):
            validate_network(net)

    def test_nonpositive_reactance(self):
        net = two_bus_network()
        bad = dataclasses.replace(net.lines[0], reactance=0.0)
        net = dataclasses.replace(net, lines=(bad,))
        with pytest.raises(NetworkError, match="reactance must be positive"):
            validate_network(net)


class TestTopology:
    def test_incidence_row_signs(self):
        net = load_network(FIXTURE)
        row = incidence_row(net, "l2")  # runs from bus b1 to bus b3
        expected = np.zeros(6)
        expected[net.bus_index("b1")] = 1.0
        expected[net.bus_index("b3")] = -1.0
        assert np.array_equal(row, expected)

    def test_incidence_row_unknown_line(self):
        with pytest.raises(NetworkError, match="unknown line"):
            incidence_row(two_bus_network(), "zz")

    def test_index_lookups(self):
        net = two_bus_network()
        assert net.bus_index("b") == 1
        assert net.unit_index("g") == 0
        assert net.line_index("ab") == 0
        with pytest.raises(NetworkError, match="unknown bus"):
            net.bus_index("zz")

    def test_total_load(self):
        net = two_bus_network()
        assert np.array_equal(net.total_load(), np.array([40.0, 60.0]))


class TestCostCurve:
    def test_segment_widths_and_marginals(self):
        unit = two_bus_network().units[0]
        assert np.array_equal(unit.segment_widths(), np.array([60.0, 40.0]))
        assert np.array_equal(unit.marginal_costs(), np.array([12.0, 20.0]))

    def test_energy_cost_fills_cheap_segments_first(self):
        unit = two_bus_network().units[0]
        assert unit.energy_cost(0.0) == 0.0
        assert unit.energy_cost(50.0) == 50.0 * 12.0
        assert unit.energy_cost(80.0) == 60.0 * 12.0 + 20.0 * 20.0
        assert unit.energy_cost(100.0) == 60.0 * 12.0 + 40.0 * 20.0

    def test_energy_cost_matches_fixture_units(self):
        net = load_network(FIXTURE)
        big = net.units[net.unit_index("g1")]
        # segments 100 @ 18, 80 @ 24, 40 @ 32
        assert big.energy_cost(150.0) == 100.0 * 18.0 + 50.0 * 24.0
        assert big.energy_cost(220.0) == 100.0 * 18.0 + 80.0 * 24.0 + 40.0 * 32.0
