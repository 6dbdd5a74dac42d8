"""LP simplex, branch-and-bound, and MPS writer behavior."""

import itertools
from pathlib import Path

import numpy as np
import pytest

from stormsched.milp import (INFINITY, LpStatus, MilpProblem, MipStatus,
                             ProblemError, Sense, export_mps,
                             max_bound_violation,
                             max_complementarity_violation, names_table_path,
                             read_mps, solve_lp, solve_milp)

GOLDEN = Path(__file__).parent / "golden"


def textbook_lp():
    """min -3x - 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18, x, y >= 0."""
    p = MilpProblem()
    x = p.add_continuous("x", 0.0, INFINITY)
    y = p.add_continuous("y", 0.0, INFINITY)
    p.add_objective_term(x, -3.0)
    p.add_objective_term(y, -5.0)
    p.add_constraint("cap_x", {x: 1.0}, Sense.LE, 4.0)
    p.add_constraint("cap_y", {y: 2.0}, Sense.LE, 12.0)
    p.add_constraint("mix", {x: 3.0, y: 2.0}, Sense.LE, 18.0)
    return p


def three_item_knapsack():
    """min -(6a + 10b + 12c) s.t. a + 2b + 3c <= 5, binaries."""
    p = MilpProblem()
    cols = [p.add_binary(n) for n in ("take_a", "take_b", "take_c")]
    for col, v in zip(cols, (-6.0, -10.0, -12.0)):
        p.add_objective_term(col, v)
    p.add_constraint("weight", dict(zip(cols, (1.0, 2.0, 3.0))), Sense.LE, 5.0)
    return p, cols


def vertex_enumeration_optimum():
    """Independent oracle for the textbook LP: intersect every pair of the
    five bounding planes, keep feasible points, take the best objective."""
    planes = [  # a . (x, y) = b
        (np.array([1.0, 0.0]), 4.0),
        (np.array([0.0, 2.0]), 12.0),
        (np.array([3.0, 2.0]), 18.0),
        (np.array([1.0, 0.0]), 0.0),
        (np.array([0.0, 1.0]), 0.0),
    ]
    best = np.inf
    for (a1, b1), (a2, b2) in itertools.combinations(planes, 2):
        A = np.vstack([a1, a2])
        if abs(np.linalg.det(A)) < 1e-12:
            continue
        pt = np.linalg.solve(A, np.array([b1, b2]))
        x, y = pt
        if x < -1e-9 or y < -1e-9:
            continue
        if x > 4 + 1e-9 or 2 * y > 12 + 1e-9 or 3 * x + 2 * y > 18 + 1e-9:
            continue
        best = min(best, -3.0 * x - 5.0 * y)
    return best


class TestSimplex:
    def test_textbook_instance_matches_vertex_enumeration(self):
        sol = solve_lp(textbook_lp())
        assert sol.status is LpStatus.OPTIMAL
        assert sol.objective == pytest.approx(vertex_enumeration_optimum(), abs=1e-9)
        assert sol.objective == pytest.approx(-36.0, abs=1e-9)
        assert sol.values == pytest.approx(np.array([2.0, 6.0]), abs=1e-9)

    def test_textbook_duals_and_complementarity(self):
        p = textbook_lp()
        sol = solve_lp(p)
        assert sol.dual_values == pytest.approx(np.array([0.0, -1.5, -1.0]), abs=1e-9)
        assert max_complementarity_violation(p, sol) <= 1e-6
        assert max_bound_violation(p, sol.values) <= 1e-7

    def test_infeasible_pair(self):
        p = MilpProblem()
        z = p.add_continuous("z", 0.0, 10.0)
        p.add_constraint("below", {z: 1.0}, Sense.LE, 1.0)
        p.add_constraint("above", {z: 1.0}, Sense.GE, 2.0)
        assert solve_lp(p).status is LpStatus.INFEASIBLE

    def test_single_lower_bound_row(self):
        p = MilpProblem()
        w = p.add_continuous("w", 0.0, INFINITY)
        p.add_objective_term(w, 1.0)
        p.add_constraint("floor", {w: 1.0}, Sense.GE, 3.0)
        sol = solve_lp(p)
        assert sol.status is LpStatus.OPTIMAL
        assert sol.objective == pytest.approx(3.0, abs=1e-9)

    def test_unbounded_direction_detected(self):
        p = MilpProblem()
        v = p.add_continuous("v", 0.0, INFINITY)
        p.add_objective_term(v, -1.0)
        p.add_constraint("floor", {v: 1.0}, Sense.GE, 0.0)
        assert solve_lp(p).status is LpStatus.UNBOUNDED

    def test_degenerate_instance_terminates(self):
        # classic cycling construction; anti-cycling must still finish
        p = MilpProblem()
        c = [p.add_continuous(f"x{i}", 0.0, INFINITY) for i in range(4)]
        for col, coef in zip(c, (-0.75, 150.0, -0.02, 6.0)):
            p.add_objective_term(col, coef)
        p.add_constraint("r1", {c[0]: 0.25, c[1]: -60.0, c[2]: -0.04, c[3]: 9.0},
                         Sense.LE, 0.0)
        p.add_constraint("r2", {c[0]: 0.5, c[1]: -90.0, c[2]: -0.02, c[3]: 3.0},
                         Sense.LE, 0.0)
        p.add_constraint("r3", {c[2]: 1.0}, Sense.LE, 1.0)
        sol = solve_lp(p)
        assert sol.status is LpStatus.OPTIMAL
        assert sol.objective == pytest.approx(-0.05, abs=1e-9)
        assert sol.iterations < 200

    def test_bound_flips_reach_box_corner(self):
        p = MilpProblem()
        x = p.add_continuous("x", 0.0, 2.0)
        y = p.add_continuous("y", 0.0, 2.0)
        p.add_objective_term(x, -1.0)
        p.add_objective_term(y, -1.0)
        p.add_constraint("loose", {x: 1.0, y: 1.0}, Sense.LE, 10.0)
        sol = solve_lp(p)
        assert sol.objective == pytest.approx(-4.0, abs=1e-9)

    def test_negative_lower_bounds(self):
        p = MilpProblem()
        x = p.add_continuous("x", -5.0, 5.0)
        p.add_objective_term(x, 1.0)
        p.add_constraint("floor", {x: 1.0}, Sense.GE, -2.0)
        sol = solve_lp(p)
        assert sol.objective == pytest.approx(-2.0, abs=1e-9)

    def test_equality_row(self):
        p = MilpProblem()
        x = p.add_continuous("x", 0.0, INFINITY)
        y = p.add_continuous("y", 0.0, 1.0)
        p.add_objective_term(x, 1.0)
        p.add_constraint("total", {x: 1.0, y: 1.0}, Sense.EQ, 3.0)
        sol = solve_lp(p)
        assert sol.objective == pytest.approx(2.0, abs=1e-9)

    def test_free_column(self):
        p = MilpProblem()
        x = p.add_continuous("x", -INFINITY, INFINITY)
        p.add_objective_term(x, 1.0)
        p.add_constraint("floor", {x: 1.0}, Sense.GE, -7.25)
        sol = solve_lp(p)
        assert sol.objective == pytest.approx(-7.25, abs=1e-9)

    def test_empty_bound_interval_override_is_infeasible(self):
        p = textbook_lp()
        sol = solve_lp(p, bound_overrides={0: (2.0, 1.0)})
        assert sol.status is LpStatus.INFEASIBLE

    def test_random_lps_satisfy_certificates(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            p = MilpProblem()
            cols = [p.add_continuous(f"v{i}", 0.0, float(rng.integers(1, 6)))
                    for i in range(4)]
            for col in cols:
                p.add_objective_term(col, float(np.round(rng.normal() * 3, 2)))
            for r in range(3):
                coeffs = {col: float(np.round(rng.normal() * 2, 2))
                          for col in cols if rng.random() < 0.8}
                sense = Sense.LE if rng.random() < 0.5 else Sense.GE
                p.add_constraint(f"r{r}", coeffs, sense,
                                 float(np.round(rng.normal() * 3 + 1, 2)))
            sol = solve_lp(p)
            if sol.status is LpStatus.OPTIMAL:
                assert max_bound_violation(p, sol.values) <= 1e-7
                assert max_complementarity_violation(p, sol) <= 1e-6


class TestBranchAndBound:
    def test_knapsack_matches_exhaustive_enumeration(self):
        p, cols = three_item_knapsack()
        oracle = min(
            -(6 * a + 10 * b + 12 * c)
            for a, b, c in itertools.product((0, 1), repeat=3)
            if a + 2 * b + 3 * c <= 5
        )
        res = solve_milp(p)
        assert res.status is MipStatus.OPTIMAL
        assert oracle == -22
        assert res.objective == pytest.approx(oracle, abs=1e-9)
        assert [round(res.values[c]) for c in cols] == [0, 1, 1]

    def test_integral_relaxation_stops_at_root(self):
        p = MilpProblem()
        d = p.add_binary("d")
        p.add_objective_term(d, 1.0)
        p.add_constraint("force", {d: 1.0}, Sense.GE, 1.0)
        res = solve_milp(p)
        assert res.status is MipStatus.OPTIMAL
        assert res.nodes_explored == 1
        assert res.objective == pytest.approx(1.0)

    def test_infeasible_milp(self):
        p = MilpProblem()
        a = p.add_binary("a")
        b = p.add_binary("b")
        p.add_constraint("need", {a: 1.0, b: 1.0}, Sense.GE, 3.0)
        assert solve_milp(p).status is MipStatus.INFEASIBLE

    def test_weak_duality_and_gap(self):
        p, _ = three_item_knapsack()
        res = solve_milp(p)
        assert res.best_bound <= res.objective + 1e-9
        assert res.gap >= 0.0
        assert res.gap <= 1e-4

    def test_deterministic_node_count_and_incumbent(self):
        p, _ = three_item_knapsack()
        first = solve_milp(p)
        second = solve_milp(p)
        assert first.nodes_explored == second.nodes_explored
        assert first.values.tobytes() == second.values.tobytes()
        assert first.objective == second.objective

    def test_depth_first_dive_mode_agrees(self):
        p, _ = three_item_knapsack()
        res = solve_milp(p, memory_threshold=1)
        assert res.status is MipStatus.OPTIMAL
        assert res.objective == pytest.approx(-22.0, abs=1e-9)

    def test_node_limit_returns_feasible_with_bound(self):
        p, _ = three_item_knapsack()
        res = solve_milp(p, node_limit=3)
        assert res.status in (MipStatus.FEASIBLE, MipStatus.LIMIT_REACHED)
        if res.status is MipStatus.FEASIBLE:
            assert res.values is not None
            assert res.best_bound <= res.objective + 1e-9
            assert res.gap > 1e-4

    def test_node_limit_before_any_incumbent(self):
        p, _ = three_item_knapsack()
        res = solve_milp(p, node_limit=1)
        assert res.status is MipStatus.LIMIT_REACHED
        assert res.values is None

    def test_log_lines_have_node_bound_incumbent_columns(self, tmp_path):
        p, _ = three_item_knapsack()
        log_file = tmp_path / "solver.log"
        with open(log_file, "w") as fh:
            solve_milp(p, log=fh)
        lines = log_file.read_text().splitlines()
        assert lines[0].split() == ["node", "bound", "incumbent", "gap"]
        assert len(lines) > 1
        assert lines[1].split()[0] == "1"

    def test_random_instances_match_enumeration(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            p = MilpProblem()
            bs = [p.add_binary(f"b{i}") for i in range(5)]
            cs = [p.add_continuous(f"c{i}", 0.0, float(rng.integers(1, 4)))
                  for i in range(2)]
            for col in bs + cs:
                p.add_objective_term(col, float(np.round(rng.normal() * 5, 2)))
            for r in range(4):
                coeffs = {col: float(np.round(rng.normal() * 3, 2))
                          for col in bs + cs if rng.random() < 0.7}
                sense = Sense.LE if rng.random() < 0.5 else Sense.GE
                p.add_constraint(f"r{r}", coeffs, sense,
                                 float(np.round(rng.normal() * 4 + 2, 2)))
            oracle = np.inf
            for assign in itertools.product((0.0, 1.0), repeat=len(bs)):
                ov = {bs[i]: (assign[i], assign[i]) for i in range(len(bs))}
                lp = solve_lp(p, ov)
                if lp.status is LpStatus.OPTIMAL:
                    oracle = min(oracle, lp.objective)
            res = solve_milp(p)
            if res.status is MipStatus.INFEASIBLE:
                assert oracle == np.inf
            else:
                assert res.objective == pytest.approx(oracle, rel=1e-6, abs=1e-6)


class TestProblemContainer:
    def test_duplicate_variable_rejected(self):
        p = MilpProblem()
        p.add_continuous("x", 0.0, 1.0)
        with pytest.raises(ProblemError, match="duplicate"):
            p.add_continuous("x", 0.0, 1.0)

    def test_empty_bound_interval_rejected(self):
        p = MilpProblem()
        with pytest.raises(ProblemError, match="empty bound"):
            p.add_continuous("x", 2.0, 1.0)

    def test_unknown_column_in_row_rejected(self):
        p = MilpProblem()
        p.add_continuous("x", 0.0, 1.0)
        with pytest.raises(ProblemError, match="unknown column"):
            p.add_constraint("r", {5: 1.0}, Sense.LE, 1.0)

    def test_column_lookup_by_name(self):
        p = MilpProblem()
        idx = p.add_continuous("flow[line4,2]", -1.0, 1.0)
        assert p.column("flow[line4,2]") == idx
        with pytest.raises(ProblemError, match="unknown variable"):
            p.column("nope")


class TestMpsExport:
    def test_tiny_lp_golden_bytes(self, tmp_path):
        p = MilpProblem()
        x = p.add_continuous("output_mw", 1.0, 4.0)
        p.add_objective_term(x, 2.5)
        p.add_constraint("cap", {x: 1.0}, Sense.LE, 3.0)
        out = tmp_path / "tiny.mps"
        export_mps(p, out, name="TINYLP")
        assert out.read_bytes() == (GOLDEN / "tiny.mps").read_bytes()
        assert names_table_path(out).read_bytes() == \
            (GOLDEN / "tiny.mps.names.csv").read_bytes()

    def test_knapsack_golden_bytes(self, tmp_path):
        p, _ = three_item_knapsack()
        out = tmp_path / "knapsack.mps"
        export_mps(p, out, name="KNAPSACK")
        assert out.read_bytes() == (GOLDEN / "knapsack.mps").read_bytes()

    def test_round_trip_preserves_all_data(self, tmp_path):
        p = MilpProblem()
        a = p.add_binary("commit[g1,0]")
        x = p.add_continuous("power[g1,0]", -2.5, 7.75)
        f = p.add_continuous("free_col", -INFINITY, INFINITY)
        z = p.add_continuous("pinned", 3.0, 3.0)
        p.add_objective_term(a, 12.5)
        p.add_objective_term(x, -0.125)
        p.add_constraint("link", {a: -7.75, x: 1.0}, Sense.LE, 0.0)
        p.add_constraint("meet", {x: 1.0, f: 0.5}, Sense.GE, 1.25)
        p.add_constraint("fix", {z: 2.0, a: 1.0}, Sense.EQ, 6.0)
        out = tmp_path / "rt.mps"
        table = export_mps(p, out)
        q = read_mps(out, table)
        A1, s1, b1, c1, l1, u1 = p.dense_data()
        A2, s2, b2, c2, l2, u2 = q.dense_data()
        assert np.array_equal(A1, A2)
        assert s1 == s2
        assert np.array_equal(b1, b2)
        assert np.array_equal(c1, c2)
        assert np.array_equal(l1, l2)
        assert np.array_equal(u1, u2)
        assert [v.name for v in q.variables] == [v.name for v in p.variables]
        assert [r.name for r in q.constraints] == [r.name for r in p.constraints]
        assert [v.kind for v in q.variables] == [v.kind for v in p.variables]

    def test_reimported_knapsack_solves_identically(self, tmp_path):
        p, _ = three_item_knapsack()
        out = tmp_path / "k.mps"
        table = export_mps(p, out)
        q = read_mps(out, table)
        res = solve_milp(q)
        assert res.objective == pytest.approx(-22.0, abs=1e-9)

    def test_names_fit_fixed_fields(self, tmp_path):
        p, _ = three_item_knapsack()
        out = tmp_path / "k.mps"
        export_mps(p, out)
        for line in out.read_text().splitlines():
            if line.startswith("    C"):
                assert len(line.split()[0]) <= 8
                assert len(line.split()[1]) <= 8
