"""SMO core backend selection.

Prefers the compiled extension, falls back to the pure numpy twin.  Both
expose smo_solve with the same contract and produce bit-identical output;
BACKEND tells which one is active.
"""

try:
    from ._speedups import BACKEND, smo_solve
except ImportError:  # pragma: no cover - depends on build toolchain
    from ._pure import BACKEND, smo_solve

from . import _pure

__all__ = ["smo_solve", "BACKEND", "_pure"]
