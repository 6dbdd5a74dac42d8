"""Fixed-format MPS export (and a reader used by the test suite).

Row and column names are mangled to R%07d / C%07d (8 characters) with a
deterministic translation table written next to the MPS file. Values are
emitted as the shortest exact decimal for the float (Python repr), right
aligned in the 12-wide value field; longer values extend past the field,
which is unambiguous because the value is always the last token on its
line. Binary columns are wrapped in INTORG/INTEND marker pairs and given
explicit [0, 1] bounds.
"""

from __future__ import annotations

from pathlib import Path

from .problem import INFINITY, MilpProblem, Sense, VarKind

_SENSE_CODE = {Sense.LE: "L", Sense.GE: "G", Sense.EQ: "E"}
_CODE_SENSE = {v: k for k, v in _SENSE_CODE.items()}
_OBJECTIVE_ROW = "COST"
_INTORG = "    MARKER                 'MARKER'                 'INTORG'"
_INTEND = "    MARKER                 'MARKER'                 'INTEND'"


def row_name(i: int) -> str:
    return f"R{i + 1:07d}"


def col_name(j: int) -> str:
    return f"C{j + 1:07d}"


def names_table_path(path) -> Path:
    return Path(str(path) + ".names.csv")


def _value(v: float) -> str:
    return f"{float(v)!r:>12}"


def _entry(name_a: str, name_b: str, value: float) -> str:
    return f"    {name_a:<8}  {name_b:<8}  {_value(value)}"


def export_mps(problem: MilpProblem, path, name: str = "STORMSCH") -> Path:
    """Write `problem` to fixed-format MPS; returns the names-table path."""
    problem.validate()
    lines = [f"NAME          {name}", "ROWS", f" N  {_OBJECTIVE_ROW}"]
    for i, row in enumerate(problem.constraints):
        lines.append(f" {_SENSE_CODE[row.sense]}  {row_name(i)}")

    # transpose the rows once so columns emit in index order
    by_column = {j: [] for j in range(problem.n_variables)}
    for i, row in enumerate(problem.constraints):
        for col, coef in sorted(row.coeffs.items()):
            by_column[col].append((i, coef))

    lines.append("COLUMNS")
    integer_open = False
    for j, var in enumerate(problem.variables):
        wants_integer = var.kind is VarKind.BINARY
        if wants_integer != integer_open:
            lines.append(_INTORG if wants_integer else _INTEND)
            integer_open = wants_integer
        cname = col_name(j)
        entries = []
        obj_coef = problem.objective.get(j, 0.0)
        if obj_coef != 0.0:
            entries.append((_OBJECTIVE_ROW, obj_coef))
        entries.extend((row_name(i), coef) for i, coef in by_column[j])
        if not entries:
            # a column must appear at least once to exist in the file
            entries.append((_OBJECTIVE_ROW, 0.0))
        for rname, coef in entries:
            lines.append(_entry(cname, rname, coef))
    if integer_open:
        lines.append(_INTEND)

    lines.append("RHS")
    for i, row in enumerate(problem.constraints):
        if row.rhs != 0.0:
            lines.append(_entry("RHS", row_name(i), row.rhs))

    lines.append("BOUNDS")
    for j, var in enumerate(problem.variables):
        cname = col_name(j)
        if var.kind is VarKind.BINARY:
            if (var.lower, var.upper) == (0.0, 1.0):
                lines.append(f" UP {'BND':<8}  {cname:<8}  {_value(1.0)}")
            else:  # fixed by construction elsewhere; keep it explicit
                lines.append(f" FX {'BND':<8}  {cname:<8}  {_value(var.lower)}")
            continue
        if var.lower == var.upper:
            lines.append(f" FX {'BND':<8}  {cname:<8}  {_value(var.lower)}")
            continue
        if var.lower == -INFINITY:
            lines.append(f" MI {'BND':<8}  {cname:<8}")
        elif var.lower != 0.0:
            lines.append(f" LO {'BND':<8}  {cname:<8}  {_value(var.lower)}")
        if var.upper < INFINITY:
            lines.append(f" UP {'BND':<8}  {cname:<8}  {_value(var.upper)}")

    lines.append("ENDATA")
    Path(path).write_text("\n".join(lines) + "\n")

    table = names_table_path(path)
    rows_out = ["mps_name,kind,original_name"]
    rows_out.append(f"{_OBJECTIVE_ROW},objective,{_OBJECTIVE_ROW}")
    for i, row in enumerate(problem.constraints):
        rows_out.append(f"{row_name(i)},row,{row.name}")
    for j, var in enumerate(problem.variables):
        rows_out.append(f"{col_name(j)},column,{var.name}")
    table.write_text("\n".join(rows_out) + "\n")
    return table


def read_mps(path, names_path=None) -> MilpProblem:
    """Parse a file written by export_mps back into a MilpProblem.

    Test support: only the subset of fixed MPS that export_mps emits is
    understood. When `names_path` is given, original structured names are
    restored from the mangling table.
    """
    name_of = {}
    if names_path is not None:
        for line in Path(names_path).read_text().splitlines()[1:]:
            mangled, _, original = line.split(",", 2)
            name_of[mangled] = original

    section = None
    row_sense = {}
    row_order = []
    col_entries = {}
    col_order = []
    col_integer = {}
    rhs = {}
    bounds = {}
    integer_open = False
    for raw in Path(path).read_text().splitlines():
        if not raw.strip():
            continue
        head = raw.strip()
        if head.startswith("NAME"):
            continue
        if head in ("ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA"):
            section = head
            continue
        if section == "ROWS":
            code, rname = head.split()
            if code == "N":
                continue
            row_sense[rname] = _CODE_SENSE[code]
            row_order.append(rname)
        elif section == "COLUMNS":
            if "'MARKER'" in head:
                integer_open = "'INTORG'" in head
                continue
            cname, rname, value = head.split()
            if cname not in col_entries:
                col_entries[cname] = []
                col_order.append(cname)
                col_integer[cname] = integer_open
            col_entries[cname].append((rname, float(value)))
        elif section == "RHS":
            _, rname, value = head.split()
            rhs[rname] = float(value)
        elif section == "BOUNDS":
            parts = head.split()
            kind, cname = parts[0], parts[2]
            value = float(parts[3]) if len(parts) > 3 else None
            lo, hi = bounds.get(cname, (None, None))
            if kind == "UP":
                hi = value
            elif kind == "LO":
                lo = value
            elif kind == "FX":
                lo = hi = value
            elif kind == "MI":
                lo = -INFINITY
            bounds[cname] = (lo, hi)

    problem = MilpProblem()
    col_index = {}
    for cname in col_order:
        lo, hi = bounds.get(cname, (None, None))
        if col_integer[cname]:
            kind = VarKind.BINARY
            lo = 0.0 if lo is None else lo
            hi = 1.0 if hi is None else hi
        else:
            kind = VarKind.CONTINUOUS
            lo = 0.0 if lo is None else lo
            hi = INFINITY if hi is None else hi
        col_index[cname] = problem.add_variable(name_of.get(cname, cname), kind, lo, hi)
    for rname in row_order:
        coeffs = {}
        for cname in col_order:
            for entry_row, coef in col_entries[cname]:
                if entry_row == rname:
                    coeffs[col_index[cname]] = coeffs.get(col_index[cname], 0.0) + coef
        problem.add_constraint(name_of.get(rname, rname), coeffs,
                               row_sense[rname], rhs.get(rname, 0.0))
    for cname in col_order:
        for entry_row, coef in col_entries[cname]:
            if entry_row == _OBJECTIVE_ROW and coef != 0.0:
                problem.add_objective_term(col_index[cname], coef)
    return problem
