"""Cross-validation, hyperparameter sweeps and component classification.

Accuracy is reported in percent as the unweighted mean of per-fold
accuracies over a stratified split, which keeps figures comparable across
penalty/kernel grid cells that share the same fold plan.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .hurricane import ComponentSite, Dataset, HurricaneForecast, component_features, normalize_features
from .kernels import KernelSpec
from .multiclass import ClassLabel, OvoModel, predict_vote_batch, train_one_vs_one

DEFAULT_FOLDS = 5
DEFAULT_PENALTIES = (0.1, 1.0, 10.0, 100.0)


def default_kernel_grid() -> list[KernelSpec]:
    return [
        kernels.linear(),
        kernels.polynomial(2),
        kernels.polynomial(3),
        kernels.gaussian(),
    ]


@dataclass
class FoldPlan:
    """fold_of[i] is the fold index of sample i."""

    q: int
    fold_of: np.ndarray

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of != fold)

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of == fold)


def k_fold_split(labels: np.ndarray, q: int, seed: int = 0) -> FoldPlan:
    """Stratified fold assignment.

    Each class is shuffled and dealt into q chunks; chunk remainders rotate
    across classes so overall fold sizes also differ by at most one.
    """
    labels = np.asarray(labels)
    n = labels.shape[0]
    if q < 2:
        raise ValueError("need at least two folds")
    if q > n:
        raise ValueError(f"cannot split {n} samples into {q} folds")
    rng = np.random.default_rng(seed)
    fold_of = np.empty(n, dtype=np.int64)
    offset = 0
    for cls in sorted(set(int(v) for v in labels)):
        idx = np.flatnonzero(labels == cls)
        perm = idx[rng.permutation(idx.shape[0])]
        base, extra = divmod(perm.shape[0], q)
        sizes = np.full(q, base, dtype=np.int64)
        for r in range(extra):
            sizes[(offset + r) % q] += 1
        offset += extra
        pos = 0
        for fold in range(q):
            fold_of[perm[pos : pos + sizes[fold]]] = fold
            pos += sizes[fold]
    return FoldPlan(q=q, fold_of=fold_of)


def _fold_seed(seed: int, fold: int) -> int:
    # stable per-fold trainer seed
    return seed * 1009 + fold


def cross_validate(
    dataset: Dataset,
    q: int,
    c: float,
    kernel: KernelSpec,
    seed: int = 0,
) -> float:
    """Mean held-out accuracy (percent) of one-vs-one training over q folds."""
    plan = k_fold_split(dataset.labels, q, seed)
    return float(np.mean(_fold_accuracies(dataset, plan, c, kernel, seed)))


def _fold_accuracies(dataset, plan: FoldPlan, c: float, kernel: KernelSpec, seed: int) -> list[float]:
    accuracies = []
    for fold in range(plan.q):
        tr = plan.train_indices(fold)
        te = plan.test_indices(fold)
        model = train_one_vs_one(
            dataset.features[tr], dataset.labels[tr], c, kernel, seed=_fold_seed(seed, fold)
        )
        predicted = predict_vote_batch(model, dataset.features[te])
        hits = sum(int(p) == int(a) for p, a in zip(predicted, dataset.labels[te]))
        accuracies.append(100.0 * hits / te.shape[0])
    return accuracies


def cv_predictions(
    dataset: Dataset,
    q: int,
    c: float,
    kernel: KernelSpec,
    seed: int = 0,
) -> np.ndarray:
    """Held-out prediction for every sample, pooled over the fold plan."""
    plan = k_fold_split(dataset.labels, q, seed)
    out = np.empty(len(dataset), dtype=np.int64)
    for fold in range(plan.q):
        tr = plan.train_indices(fold)
        te = plan.test_indices(fold)
        model = train_one_vs_one(
            dataset.features[tr], dataset.labels[tr], c, kernel, seed=_fold_seed(seed, fold)
        )
        predicted = predict_vote_batch(model, dataset.features[te])
        out[te] = [int(p) for p in predicted]
    return out


@dataclass
class SweepResult:
    """Grid accuracies in row-major (kernel, penalty) order."""

    kernels: list[KernelSpec]
    penalties: list[float]
    accuracy: np.ndarray  # (len(kernels), len(penalties)) percent

    def cell(self, kernel_label: str, c: float) -> float:
        i = [k.label() for k in self.kernels].index(kernel_label)
        j = self.penalties.index(c)
        return float(self.accuracy[i, j])

    def to_csv(self, path: str) -> None:
        lines = ["kernel,c,accuracy"]
        for i, spec in enumerate(self.kernels):
            for j, c in enumerate(self.penalties):
                lines.append(f"{spec.label()},{c!r},{self.accuracy[i, j]!r}")
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


def hyperparameter_sweep(
    dataset: Dataset,
    q: int = DEFAULT_FOLDS,
    penalties=DEFAULT_PENALTIES,
    kernel_grid: list[KernelSpec] | None = None,
    seed: int = 0,
) -> SweepResult:
    """Cross-validate every (kernel, penalty) cell on a shared fold plan."""
    kernel_grid = kernel_grid or default_kernel_grid()
    penalties = [float(c) for c in penalties]
    acc = np.zeros((len(kernel_grid), len(penalties)))
    for i, spec in enumerate(kernel_grid):
        for j, c in enumerate(penalties):
            acc[i, j] = cross_validate(dataset, q, c, spec, seed=seed)
    return SweepResult(kernels=list(kernel_grid), penalties=penalties, accuracy=acc)


@dataclass
class ConfusionMatrix:
    """Counts[i, j] = samples of actual class i predicted as class j,
    classes ordered operational, uncertain, outage."""

    counts: np.ndarray

    @property
    def classes(self) -> list[ClassLabel]:
        return list(ClassLabel)

    def row_percent(self) -> np.ndarray:
        totals = self.counts.sum(axis=1, keepdims=True).astype(np.float64)
        safe = np.where(totals == 0, 1.0, totals)
        return 100.0 * self.counts / safe

    def accuracy_percent(self) -> float:
        total = self.counts.sum()
        return 100.0 * float(np.trace(self.counts)) / float(total) if total else 0.0

    def to_text(self) -> str:
        names = [str(cls) for cls in self.classes]
        width = max(len(nm) for nm in names) + 2
        pct = self.row_percent()
        head = " " * width + "".join(f"{nm:>16}" for nm in names)
        lines = [head]
        for i, nm in enumerate(names):
            cells = "".join(
                f"{int(self.counts[i, j]):>8} ({pct[i, j]:4.1f}%)".rjust(16) for j in range(len(names))
            )
            lines.append(f"{nm:<{width}}" + cells)
        return "\n".join(lines)

    def to_csv(self, path: str) -> None:
        names = [str(cls) for cls in self.classes]
        lines = ["actual," + ",".join(names)]
        for i, nm in enumerate(names):
            lines.append(nm + "," + ",".join(str(int(v)) for v in self.counts[i]))
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


def confusion_matrix(actual, predicted) -> ConfusionMatrix:
    actual = np.asarray(actual, dtype=np.int64)
    predicted = np.asarray(predicted, dtype=np.int64)
    if actual.shape != predicted.shape:
        raise ValueError("actual and predicted must have the same length")
    g = len(ClassLabel)
    counts = np.zeros((g, g), dtype=np.int64)
    for a, p in zip(actual, predicted):
        counts[int(a), int(p)] += 1
    return ConfusionMatrix(counts)


def classify_components(
    sites: list[ComponentSite],
    forecast: HurricaneForecast,
    model: OvoModel,
    max_wind_mph: float,
    max_distance_km: float,
) -> dict:
    """Classify every site; returns id -> (ClassLabel, wind_norm, dist_norm)."""
    if not sites:
        return {}
    ids = [site.component_id for site in sites]
    if len(set(ids)) != len(ids):
        raise ValueError("component ids must be unique")
    rows = []
    for site in sites:
        wind_mph, dist_km = component_features(site, forecast, max_distance_km)
        rows.append(normalize_features(wind_mph, dist_km, max_wind_mph, max_distance_km))
    features = np.asarray(rows, dtype=np.float64)
    predicted = predict_vote_batch(model, features)
    return {
        site.component_id: (cls, float(row[0]), float(row[1]))
        for site, cls, row in zip(sites, predicted, features)
    }


def save_classification(result: dict, path: str) -> None:
    """Table-style per-component CSV: component, distance, wind, class."""
    lines = ["component,distance,wind,class"]
    for cid in result:
        cls, wind, dist = result[cid]
        lines.append(f"{cid},{dist!r},{wind!r},{cls}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_classification(path: str) -> dict:
    """Read a classification CSV back into id -> ClassLabel."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != "component,distance,wind,class":
        raise ValueError("classification file must start with 'component,distance,wind,class'")
    out = {}
    for ln in lines[1:]:
        cid, _dist, _wind, cls = ln.split(",")
        out[cid] = ClassLabel.parse(cls)
    return out
