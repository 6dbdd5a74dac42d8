"""Kernel functions for the SVM stack.

Three kernels are supported: linear dot products, unshifted polynomial
powers of the dot product, and the Gaussian radial basis function.  A
`KernelSpec` is a small frozen description that the trainer, the models and
the serialization layer all share.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class KernelKind(enum.Enum):
    LINEAR = "linear"
    POLYNOMIAL = "polynomial"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus its single shape parameter.

    degree applies to polynomial kernels (>= 1); gamma applies to Gaussian
    kernels (> 0, default 1/n_features at evaluation time when left None).
    """

    kind: KernelKind
    degree: int = 1
    gamma: float | None = None

    def __post_init__(self):
        if self.kind is KernelKind.POLYNOMIAL:
            if not isinstance(self.degree, int) or self.degree < 1:
                raise ValueError(f"polynomial degree must be an integer >= 1, got {self.degree!r}")
        if self.kind is KernelKind.GAUSSIAN and self.gamma is not None:
            if not np.isfinite(self.gamma) or self.gamma <= 0.0:
                raise ValueError(f"gaussian gamma must be positive, got {self.gamma!r}")

    def resolved_gamma(self, n_features: int) -> float:
        if self.gamma is not None:
            return float(self.gamma)
        return 1.0 / float(n_features)

    def label(self) -> str:
        """Short stable name used in CSV output and model files."""
        if self.kind is KernelKind.LINEAR:
            return "linear"
        if self.kind is KernelKind.POLYNOMIAL:
            return f"poly{self.degree}"
        return "gaussian"


def linear() -> KernelSpec:
    return KernelSpec(KernelKind.LINEAR)


def polynomial(degree: int) -> KernelSpec:
    return KernelSpec(KernelKind.POLYNOMIAL, degree=degree)


def gaussian(gamma: float | None = None) -> KernelSpec:
    return KernelSpec(KernelKind.GAUSSIAN, gamma=gamma)


def spec_from_label(label: str, gamma: float | None = None) -> KernelSpec:
    """Inverse of KernelSpec.label(), for CLI flags and model files."""
    label = label.strip().lower()
    if label == "linear":
        return linear()
    if label.startswith("poly"):
        return polynomial(int(label[4:]))
    if label == "gaussian":
        return gaussian(gamma)
    raise ValueError(f"unknown kernel label {label!r}")


def _check_pair(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 1 or b.ndim != 1:
        raise ValueError("kernel_eval expects 1-d feature vectors")
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"feature dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    if not (np.isfinite(a).all() and np.isfinite(b).all()):
        raise ValueError("kernel_eval got non-finite feature values")
    return a, b


def kernel_eval(spec: KernelSpec, a: np.ndarray, b: np.ndarray) -> float:
    """Evaluate the kernel on a single pair of feature vectors."""
    a, b = _check_pair(a, b)
    if spec.kind is KernelKind.LINEAR:
        return float(np.dot(a, b))
    if spec.kind is KernelKind.POLYNOMIAL:
        return float(np.dot(a, b) ** spec.degree)
    diff = a - b
    gamma = spec.resolved_gamma(a.shape[0])
    return float(np.exp(-gamma * np.sum(diff * diff)))


def kernel_matrix(spec: KernelSpec, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Gram matrix K[i, j] = k(rows[i], cols[j]).

    The Gaussian branch uses explicit difference vectors (not the norm
    expansion trick) so entries agree with kernel_eval to the last bit at
    the low feature counts this package works with.
    """
    rows = np.ascontiguousarray(rows, dtype=np.float64)
    cols = np.ascontiguousarray(cols, dtype=np.float64)
    if rows.ndim != 2 or cols.ndim != 2 or rows.shape[1] != cols.shape[1]:
        raise ValueError("kernel_matrix expects 2-d arrays with matching feature width")
    if not (np.isfinite(rows).all() and np.isfinite(cols).all()):
        raise ValueError("kernel_matrix got non-finite feature values")
    if spec.kind is KernelKind.LINEAR:
        return rows @ cols.T
    if spec.kind is KernelKind.POLYNOMIAL:
        return (rows @ cols.T) ** spec.degree
    gamma = spec.resolved_gamma(rows.shape[1])
    diff = rows[:, None, :] - cols[None, :, :]
    return np.exp(-gamma * np.sum(diff * diff, axis=2))
