"""Self-contained LP/MILP machinery: problem container, bounded-variable
two-phase simplex, branch and bound, and fixed-format MPS export."""

from .branch_bound import (DEFAULT_GAP_TARGET, INTEGRALITY_TOL, MipResult,
                           MipStatus, solve_milp)
from .mps import export_mps, names_table_path, read_mps
from .problem import (INFINITY, Constraint, MilpProblem, ProblemError, Sense,
                      Variable, VarKind)
from .simplex import (FEAS_TOL, LpSolution, LpStatus, SimplexError,
                      max_bound_violation, max_complementarity_violation,
                      solve_lp)

__all__ = [
    "Constraint", "DEFAULT_GAP_TARGET", "FEAS_TOL", "INFINITY",
    "INTEGRALITY_TOL", "LpSolution", "LpStatus", "MilpProblem", "MipResult",
    "MipStatus", "ProblemError", "Sense", "SimplexError", "VarKind",
    "Variable", "export_mps", "max_bound_violation",
    "max_complementarity_violation", "names_table_path", "read_mps",
    "solve_lp", "solve_milp",
]
