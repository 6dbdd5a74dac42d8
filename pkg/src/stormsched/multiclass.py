"""Multi-class wrappers over the binary SVM.

One-vs-one with majority voting is the primary route; one-vs-rest is kept
as an independent cross-check.  Class identity is the ClassLabel enum whose
declaration order (operational, uncertain, outage) is the canonical index
order used for pairs, votes and confusion matrices.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import numpy as np

from .binary_svm import BinarySvmModel, decision_values, train_binary
from .kernels import KernelKind, KernelSpec

MODEL_FORMAT = "stormsched-model-1"


class ClassLabel(enum.IntEnum):
    OPERATIONAL = 0
    UNCERTAIN = 1
    OUTAGE = 2

    def __str__(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, text: str) -> "ClassLabel":
        try:
            return cls[text.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown class label {text!r}") from None


class MulticlassTrainingError(RuntimeError):
    """Binary training failed; remembers which classifier it was."""

    def __init__(self, description: str, cause: Exception):
        self.cause = cause
        super().__init__(f"training {description} failed: {cause}")


@dataclass
class OvoModel:
    """g*(g-1)/2 pairwise classifiers over an ordered class list.

    For the pair (i, j) with i < j the positive label means class i.
    """

    classes: list
    kernel: KernelSpec
    c: float
    classifiers: dict  # (i, j) -> BinarySvmModel


@dataclass
class OvrModel:
    """One classifier per class; positive label means that class."""

    classes: list
    kernel: KernelSpec
    c: float
    classifiers: list  # index-aligned with classes


def _class_indices(labels: np.ndarray, classes: list) -> list[np.ndarray]:
    return [np.flatnonzero(labels == cls) for cls in classes]


def _ordered_classes(labels: np.ndarray) -> list:
    present = sorted(set(int(v) for v in labels))
    return [ClassLabel(v) for v in present]


def train_one_vs_one(
    features: np.ndarray,
    labels: np.ndarray,
    c: float,
    kernel: KernelSpec,
    seed: int = 0,
    classes: list | None = None,
) -> OvoModel:
    features = np.ascontiguousarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    if classes is None:
        classes = _ordered_classes(labels)
    if len(classes) < 2:
        raise ValueError("one-vs-one needs at least two classes present")
    groups = _class_indices(labels, classes)
    classifiers = {}
    for i in range(len(classes)):
        for j in range(i + 1, len(classes)):
            rows = np.concatenate([groups[i], groups[j]])
            pair_x = features[rows]
            pair_y = np.where(labels[rows] == classes[i], 1.0, -1.0)
            try:
                classifiers[(i, j)] = train_binary(pair_x, pair_y, c, kernel, seed=seed)
            except Exception as exc:
                raise MulticlassTrainingError(
                    f"pair ({classes[i]}, {classes[j]})", exc
                ) from exc
    return OvoModel(classes=list(classes), kernel=kernel, c=float(c), classifiers=classifiers)


def train_one_vs_rest(
    features: np.ndarray,
    labels: np.ndarray,
    c: float,
    kernel: KernelSpec,
    seed: int = 0,
    classes: list | None = None,
) -> OvrModel:
    features = np.ascontiguousarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    if classes is None:
        classes = _ordered_classes(labels)
    if len(classes) < 2:
        raise ValueError("one-vs-rest needs at least two classes present")
    classifiers = []
    for i, cls in enumerate(classes):
        y = np.where(labels == cls, 1.0, -1.0)
        try:
            classifiers.append(train_binary(features, y, c, kernel, seed=seed))
        except Exception as exc:
            raise MulticlassTrainingError(f"class {cls} vs rest", exc) from exc
    return OvrModel(classes=list(classes), kernel=kernel, c=float(c), classifiers=classifiers)


def predict_vote_batch(model: OvoModel, features: np.ndarray) -> list:
    """Majority vote over all pairs for each feature row.

    Vote ties go to the tied class with the largest total decision
    magnitude over its classifiers, then to the lowest class index.
    """
    features = np.ascontiguousarray(features, dtype=np.float64)
    g = len(model.classes)
    n = features.shape[0]
    votes = np.zeros((n, g), dtype=np.int64)
    magnitude = np.zeros((n, g), dtype=np.float64)
    for (i, j), clf in sorted(model.classifiers.items()):
        d = decision_values(clf, features)
        winners_i = d >= 0.0
        votes[:, i] += winners_i
        votes[:, j] += ~winners_i
        mag = np.abs(d)
        magnitude[:, i] += mag
        magnitude[:, j] += mag
    out = []
    for r in range(n):
        top = votes[r].max()
        tied = np.flatnonzero(votes[r] == top)
        if tied.size > 1:
            best_mag = magnitude[r, tied].max()
            tied = tied[magnitude[r, tied] == best_mag]
        out.append(model.classes[int(tied[0])])
    return out


def predict_vote(model: OvoModel, x: np.ndarray) -> object:
    x = np.asarray(x, dtype=np.float64).ravel()
    return predict_vote_batch(model, x[None, :])[0]


def predict_rest_batch(model: OvrModel, features: np.ndarray) -> list:
    """Largest decision value wins; ties go to the lowest class index."""
    features = np.ascontiguousarray(features, dtype=np.float64)
    scores = np.column_stack([decision_values(clf, features) for clf in model.classifiers])
    return [model.classes[int(np.argmax(row))] for row in scores]


def predict_rest(model: OvrModel, x: np.ndarray) -> object:
    x = np.asarray(x, dtype=np.float64).ravel()
    return predict_rest_batch(model, x[None, :])[0]


def _kernel_to_dict(spec: KernelSpec) -> dict:
    return {"kind": spec.kind.value, "degree": spec.degree, "gamma": spec.gamma}


def _kernel_from_dict(d: dict) -> KernelSpec:
    return KernelSpec(KernelKind(d["kind"]), degree=int(d.get("degree", 1)), gamma=d.get("gamma"))


def _binary_to_dict(clf: BinarySvmModel) -> dict:
    return {
        "support_vectors": clf.support_vectors.tolist(),
        "alphas": clf.alphas.tolist(),
        "bias": clf.bias,
        "n_features": clf.n_features,
    }


def _binary_from_dict(d: dict, kernel: KernelSpec, c: float) -> BinarySvmModel:
    return BinarySvmModel(
        kernel=kernel,
        c=c,
        support_vectors=np.asarray(d["support_vectors"], dtype=np.float64).reshape(-1, d["n_features"]),
        alphas=np.asarray(d["alphas"], dtype=np.float64),
        bias=float(d["bias"]),
        n_features=int(d["n_features"]),
    )


def save_model(model: OvoModel, path: str) -> None:
    payload = {
        "format": MODEL_FORMAT,
        "classes": [str(cls) for cls in model.classes],
        "c": model.c,
        "kernel": _kernel_to_dict(model.kernel),
        "classifiers": [
            {"pair": [i, j], **_binary_to_dict(clf)}
            for (i, j), clf in sorted(model.classifiers.items())
        ],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def load_model(path: str) -> OvoModel:
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("format") != MODEL_FORMAT:
        raise ValueError(f"unrecognised model file format {payload.get('format')!r}")
    kernel = _kernel_from_dict(payload["kernel"])
    c = float(payload["c"])
    classes = [ClassLabel.parse(name) for name in payload["classes"]]
    classifiers = {}
    for entry in payload["classifiers"]:
        i, j = (int(v) for v in entry["pair"])
        classifiers[(i, j)] = _binary_from_dict(entry, kernel, c)
    expected = {(i, j) for i in range(len(classes)) for j in range(i + 1, len(classes))}
    if set(classifiers) != expected:
        raise ValueError("model file is missing pairwise classifiers")
    return OvoModel(classes=classes, kernel=kernel, c=c, classifiers=classifiers)
