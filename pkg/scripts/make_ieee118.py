"""One-time generator for the bundled 118-bus planning fixture.

The classic IEEE 118-bus archive is not redistributable from this offline
build environment, so this script synthesizes a deterministic stand-in
with the same headline dimensions: 118 buses, 186 branches, 54 units.
Topology is a jittered three-cluster layout joined by a minimum spanning
tree plus nearest-neighbor infill; electrical and economic parameters are
drawn from plausible ranges (cheap large baseload through expensive small
peakers, convex marginal-cost stacks, ramp and minimum-time values scaled
to unit size). Coordinates are an invented planar layout in km so the
storm-distance geometry has something to chew on. Every number is fixed
by the seed below; rerunning the script reproduces the committed fixture
byte for byte.

Run from the repository root:

    python3 scripts/make_ieee118.py
"""

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from stormsched.grid import Bus, GenUnit, GridNetwork, Line, write_network

SEED = 118
N_BUS = 118
N_LINE = 186
N_UNIT = 54
N_LOAD_BUS = 99
HORIZON = 24
CAPACITY_MARGIN = 1.35  # installed capacity over coincident peak

# fraction of daily peak per hour, one valley and an evening peak
DAILY_SHAPE = np.array([
    0.68, 0.64, 0.62, 0.62, 0.63, 0.66, 0.72, 0.80, 0.88, 0.93, 0.96, 0.97,
    0.96, 0.95, 0.94, 0.95, 0.97, 1.00, 0.99, 0.96, 0.90, 0.84, 0.77, 0.71,
])

VOLL_TIERS = [1000.0, 2500.0, 5000.0, 9000.0, 14000.0]


def place_buses(rng):
    clusters = [((120.0, 200.0), 40), ((320.0, 260.0), 40), ((520.0, 180.0), 38)]
    xs, ys = [], []
    for (cx, cy), count in clusters:
        xs.extend(rng.normal(cx, 70.0, count))
        ys.extend(rng.normal(cy, 55.0, count))
    coords = np.column_stack([xs, ys]).round(1)
    return tuple(
        Bus(f"b{i + 1:03d}", 0.0, float(x), float(y))  # voll assigned later
        for i, (x, y) in enumerate(coords)
    )


def spanning_tree(dist):
    """Prim's algorithm; returns the tree's edge list."""
    n = dist.shape[0]
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best = dist[0].copy()
    parent = np.zeros(n, dtype=np.int64)
    edges = []
    for _ in range(n - 1):
        j = int(np.argmin(np.where(in_tree, np.inf, best)))
        edges.append((int(parent[j]), j))
        in_tree[j] = True
        closer = dist[j] < best
        best[closer] = dist[j][closer]
        parent[closer] = j
    return edges


def build_lines(buses, rng):
    coords = np.array([(b.x_km, b.y_km) for b in buses])
    dist = np.hypot(coords[:, 0, None] - coords[None, :, 0],
                    coords[:, 1, None] - coords[None, :, 1])
    tree = spanning_tree(dist)
    used = {frozenset(e) for e in tree}
    degree = np.zeros(len(buses), dtype=np.int64)
    for a, b in tree:
        degree[a] += 1
        degree[b] += 1

    iu = np.triu_indices(len(buses), k=1)
    order = np.argsort(dist[iu], kind="stable")
    infill = []
    for k in order:
        a, b = int(iu[0][k]), int(iu[1][k])
        if len(tree) + len(infill) == N_LINE:
            break
        if frozenset((a, b)) in used or degree[a] >= 9 or degree[b] >= 9:
            continue
        used.add(frozenset((a, b)))
        degree[a] += 1
        degree[b] += 1
        infill.append((a, b))

    lines = []
    for idx, (a, b) in enumerate(tree + infill):
        span = dist[a, b]
        reactance = float(np.clip(0.00035 * span + rng.normal(0.0, 0.005),
                                  0.012, 0.35))
        pool = (300.0, 400.0, 500.0) if idx < len(tree) else (150.0, 200.0, 250.0)
        limit = float(rng.choice(pool))
        lines.append(Line(f"l{idx + 1:03d}", buses[a].id, buses[b].id,
                          round(reactance, 4), limit))
    return tuple(lines)


def build_units(buses, rng):
    host_rows = rng.choice(len(buses), size=N_UNIT, replace=False)
    sizes = np.concatenate([
        rng.uniform(300.0, 420.0, 6),     # large baseload
        rng.uniform(120.0, 260.0, 18),    # midsize cyclers
        rng.uniform(30.0, 110.0, 30),     # small peakers
    ]).round(1)

    units = []
    for i, (row, p_max) in enumerate(zip(host_rows, sizes)):
        large, mid = i < 6, 6 <= i < 24
        p_min = round(float(p_max) * rng.uniform(0.25, 0.45), 1)
        base_marginal = (rng.uniform(15.0, 22.0) if large else
                         rng.uniform(24.0, 36.0) if mid else
                         rng.uniform(38.0, 80.0))
        breaks = [round(float(p_max) * 0.55, 1), round(float(p_max) * 0.85, 1),
                  float(p_max)]
        marginals = [round(base_marginal * f, 2) for f in (1.0, 1.2, 1.45)]
        n_seg = 3 if large else 2 if mid else rng.choice((1, 2))
        if n_seg == 1:
            curve = ((float(p_max), marginals[0]),)
        elif n_seg == 2:
            curve = ((breaks[1], marginals[0]), (breaks[2], marginals[1]))
        else:
            curve = tuple(zip(breaks, marginals))

        min_up = int(rng.integers(6, 9) if large else
                     rng.integers(3, 6) if mid else rng.integers(1, 3))
        min_down = max(1, min_up - rng.integers(0, 2))
        ramp = round(float(p_max) * rng.uniform(0.35, 0.6), 1)
        startup = round(float(p_max) * rng.uniform(8.0, 15.0), 0)
        on_initially = large or (mid and rng.random() < 0.5)
        units.append(GenUnit(
            id=f"g{i + 1:02d}", bus=buses[row].id,
            p_min=p_min, p_max=float(p_max),
            ramp_up=ramp, ramp_down=ramp,
            min_up=min_up, min_down=int(min_down),
            cost_curve=curve,
            startup_cost=float(startup), shutdown_cost=round(startup * 0.3, 0),
            delta_adjust=round(float(p_max) * 0.5, 1),
            initial_on_hours=min_up if on_initially else 0,
            initial_off_hours=0 if on_initially else int(min_down),
            initial_power=round((p_min + float(p_max)) / 2.0, 1) if on_initially else 0.0,
        ))
    return tuple(units)


def build_loads(buses, units, rng):
    peak_total = round(sum(u.p_max for u in units) / CAPACITY_MARGIN, 0)
    load_rows = sorted(rng.choice(len(buses), size=N_LOAD_BUS, replace=False))
    weights = rng.gamma(2.0, 1.0, N_LOAD_BUS)
    weights /= weights.sum()
    loads = np.zeros((len(buses), HORIZON))
    for row, w in zip(load_rows, weights):
        loads[row] = np.round(w * peak_total * DAILY_SHAPE, 2)
    reserve = np.round(loads.sum(axis=0) * 0.05, 2)
    return loads, reserve


def main():
    rng = np.random.default_rng(SEED)
    buses = place_buses(rng)
    lines = build_lines(buses, rng)
    units = build_units(buses, rng)
    loads, reserve = build_loads(buses, units, rng)
    buses = tuple(
        Bus(b.id, float(rng.choice(VOLL_TIERS)), b.x_km, b.y_km) for b in buses
    )
    network = GridNetwork(buses, units, lines, HORIZON, loads, reserve, 100.0)

    out = Path(__file__).resolve().parents[1] / "src" / "stormsched" / "data" / "ieee118.json"
    write_network(network, out)
    capacity = sum(u.p_max for u in units)
    print(f"wrote {out}")
    print(f"  buses {len(buses)}, lines {len(lines)}, units {len(units)}")
    print(f"  installed {capacity:.0f} MW over a {loads.sum(axis=0).max():.0f} MW peak")


if __name__ == "__main__":
    main()
