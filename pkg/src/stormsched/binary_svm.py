"""Two-class soft-margin SVM trained by sequential minimal optimization.

The trainer works on a precomputed Gram matrix and keeps only the samples
with nonzero multipliers.  Models store the signed dual coefficients
(multiplier times label), the bias, the kernel and the penalty, which is
everything decision_value needs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._smo import BACKEND, smo_solve
from .kernels import KernelSpec, kernel_matrix

KKT_TOLERANCE = 1e-3
STEP_TOLERANCE = 1e-5
ALPHA_EPSILON = 1e-8
# pass budget per sample; large penalties on heavily overlapping data can
# need tens of thousands of passes before the working set settles, and a
# pass over a few hundred cached errors costs microseconds
PASS_FACTOR = 200


class SmoConvergenceError(RuntimeError):
    """SMO ran out of passes; carries best-so-far diagnostics."""

    def __init__(self, passes: int, max_step: float, kkt_violations: int):
        self.passes = passes
        self.max_step = max_step
        self.kkt_violations = kkt_violations
        super().__init__(
            f"SMO did not converge in {passes} passes "
            f"(last max step {max_step:.3e}, {kkt_violations} KKT violations left)"
        )


@dataclass
class BinarySvmModel:
    """Support vectors plus signed dual coefficients and bias.

    alphas[k] is the multiplier of support vector k times its label, so
    decision_value(x) = sum_k alphas[k] * kernel(sv[k], x) + bias.
    """

    kernel: KernelSpec
    c: float
    support_vectors: np.ndarray
    alphas: np.ndarray
    bias: float
    n_features: int
    diagnostics: dict = field(default_factory=dict)


def _final_bias(K: np.ndarray, y: np.ndarray, alpha: np.ndarray, c: float) -> float:
    """Average the exact bias over non-bound support vectors.

    Falls back to the midpoint of the interval the bound samples leave
    feasible when every multiplier sits at 0 or c.
    """
    signed = alpha * y
    g = K @ signed
    nonbound = (alpha > ALPHA_EPSILON) & (alpha < c - ALPHA_EPSILON)
    if nonbound.any():
        return float(np.mean(y[nonbound] - g[nonbound]))
    at_zero = alpha <= ALPHA_EPSILON
    at_c = alpha >= c - ALPHA_EPSILON
    lower = []
    upper = []
    # alpha == 0 needs y*(g+b) >= 1, alpha == c needs y*(g+b) <= 1
    pos = y > 0
    lower.append(1.0 - g[at_zero & pos])
    upper.append(-1.0 - g[at_zero & ~pos])
    upper.append(1.0 - g[at_c & pos])
    lower.append(-1.0 - g[at_c & ~pos])
    lo_vals = np.concatenate(lower) if lower else np.array([])
    hi_vals = np.concatenate(upper) if upper else np.array([])
    lo = float(np.max(lo_vals)) if lo_vals.size else -np.inf
    hi = float(np.min(hi_vals)) if hi_vals.size else np.inf
    if not np.isfinite(lo):
        return hi if np.isfinite(hi) else 0.0
    if not np.isfinite(hi):
        return lo
    return 0.5 * (lo + hi)


def train_binary(
    features: np.ndarray,
    labels: np.ndarray,
    c: float,
    kernel: KernelSpec,
    seed: int = 0,
) -> BinarySvmModel:
    """Train on features (n, f) with labels in {-1, +1}.

    Deterministic for a fixed seed; raises SmoConvergenceError when the
    pass budget (PASS_FACTOR * n full passes) runs out before the
    multipliers stop moving.
    """
    features = np.ascontiguousarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64).ravel()
    if features.ndim != 2 or features.shape[0] != labels.shape[0]:
        raise ValueError("features must be (n, f) with one label per row")
    if features.shape[0] < 2:
        raise ValueError("need at least two samples")
    if not np.isfinite(features).all():
        raise ValueError("features contain non-finite values")
    if not np.all(np.isin(labels, (-1.0, 1.0))):
        raise ValueError("labels must be -1 or +1")
    if (labels > 0).all() or (labels < 0).all():
        raise ValueError("training data contains a single class")
    if not (np.isfinite(c) and c > 0.0):
        raise ValueError(f"penalty c must be positive, got {c!r}")

    n = features.shape[0]
    K = kernel_matrix(kernel, features, features)
    max_passes = max(PASS_FACTOR * n, 10)
    alpha, running_bias, passes, converged, max_step = smo_solve(
        K, labels, float(c), KKT_TOLERANCE, STEP_TOLERANCE, ALPHA_EPSILON, max_passes, seed
    )
    if not converged:
        g = K @ (alpha * labels)
        margins = labels * (g + running_bias)
        violations = int(
            np.sum(((margins < 1.0 - KKT_TOLERANCE) & (alpha < c - ALPHA_EPSILON))
                   | ((margins > 1.0 + KKT_TOLERANCE) & (alpha > ALPHA_EPSILON)))
        )
        raise SmoConvergenceError(passes, max_step, violations)

    bias = _final_bias(K, labels, alpha, c)
    keep = alpha > ALPHA_EPSILON
    return BinarySvmModel(
        kernel=kernel,
        c=float(c),
        support_vectors=features[keep].copy(),
        alphas=(alpha * labels)[keep].copy(),
        bias=bias,
        n_features=int(features.shape[1]),
        diagnostics={"passes": passes, "backend": BACKEND, "n_support": int(keep.sum())},
    )


def decision_values(model: BinarySvmModel, features: np.ndarray) -> np.ndarray:
    """Decision function for a batch of rows (n, f)."""
    features = np.ascontiguousarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise ValueError("expected a 2-d batch of feature rows")
    if features.shape[1] != model.n_features:
        raise ValueError(f"expected {model.n_features} features, got {features.shape[1]}")
    if model.support_vectors.shape[0] == 0:
        return np.full(features.shape[0], model.bias)
    K = kernel_matrix(model.kernel, features, model.support_vectors)
    return K @ model.alphas + model.bias


def decision_value(model: BinarySvmModel, x: np.ndarray) -> float:
    x = np.asarray(x, dtype=np.float64).ravel()
    return float(decision_values(model, x[None, :])[0])


def predict_binary(model: BinarySvmModel, x: np.ndarray) -> int:
    """Sign of the decision value; exact zero counts as +1."""
    return 1 if decision_value(model, x) >= 0.0 else -1


def dual_objective(model_or_alpha, labels=None, K=None) -> float:
    """Dual objective sum(alpha) - 0.5 * a' Q a for diagnostics and tests."""
    if isinstance(model_or_alpha, BinarySvmModel):
        raise TypeError("pass raw multipliers, labels and Gram matrix")
    alpha = np.asarray(model_or_alpha, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    signed = alpha * y
    return float(np.sum(alpha) - 0.5 * signed @ K @ signed)
