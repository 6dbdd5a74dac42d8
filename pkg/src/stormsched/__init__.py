"""Storm-aware grid operations toolkit.

Two halves, wired together by the CLI:

* a multi-class kernel SVM (trained by sequential minimal optimization)
  that labels grid components operational / uncertain / outage from
  normalized storm wind and track-distance features, and
* a scenario-based day-ahead unit-commitment model solved by a built-in
  branch-and-bound MILP engine, where the class labels decide which
  component-loss scenarios the schedule must survive.
"""

from .kernels import KernelKind, KernelSpec, kernel_eval, kernel_matrix
from .multiclass import ClassLabel

__version__ = "0.1.0"

__all__ = [
    "KernelKind",
    "KernelSpec",
    "ClassLabel",
    "kernel_eval",
    "kernel_matrix",
    "__version__",
]
