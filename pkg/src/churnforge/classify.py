"""k-nearest-neighbors and Gaussian naive Bayes over worker feature vectors.

Both classifiers work on plain ``(n, d)`` arrays with boolean targets
(True = dropout); the ``*_fit``/``*_predict`` wrappers adapt them to
``LabeledWorker``/``WorkerFeatures``. Ties are broken deterministically:
k-NN distance ties by stored (worker_id) order, Bayes score ties toward
dropout.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from .label import LabeledWorker
from .model import ConfigurationError, DropoutLabel, WorkerFeatures

STD_FLOOR = 1e-9
VAR_FLOOR_SCALE = 1e-9
VAR_FLOOR_MIN = 1e-12


def _as_label(is_dropout: bool) -> DropoutLabel:
    return DropoutLabel.DROPOUT if is_dropout else DropoutLabel.ACTIVE


def feature_matrix(features: Sequence[WorkerFeatures]) -> np.ndarray:
    return np.array([f.vector() for f in features], dtype=float).reshape(-1, 3)


def _training_arrays(train: Sequence[LabeledWorker]):
    ordered = sorted(train, key=lambda lw: lw.worker_id)
    X = feature_matrix([lw.features for lw in ordered])
    y = np.array([lw.is_dropout for lw in ordered], dtype=bool)
    return X, y


@dataclass(frozen=True)
class StandardScaler:
    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> "StandardScaler":
        X = np.asarray(X, dtype=float)
        return cls(X.mean(axis=0), np.maximum(X.std(axis=0), STD_FLOOR))

    @classmethod
    def identity(cls, n_features: int) -> "StandardScaler":
        return cls(np.zeros(n_features), np.ones(n_features))

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.mean) / self.std


@dataclass(frozen=True)
class KnnModel:
    k: int
    vectors: np.ndarray  # standardized, in worker_id order
    targets: np.ndarray  # bool, True = dropout
    scaler: StandardScaler

    def dump(self) -> str:
        lines = [f"k-NN  k={self.k}  n_train={len(self.targets)}  dropouts={int(self.targets.sum())}"]
        for j, (m, s) in enumerate(zip(self.scaler.mean, self.scaler.std)):
            lines.append(f"  feature {j}: mean={m:.6g} std={s:.6g}")
        return "\n".join(lines)


def fit_knn(X, y, k: int, scale: bool = True) -> KnnModel:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=bool)
    if len(X) == 0:
        raise ConfigurationError("k-NN needs a nonempty training set")
    if k < 1 or k % 2 == 0:
        raise ConfigurationError(f"k must be a positive odd integer, got {k}")
    if k > len(X):
        raise ConfigurationError(f"k={k} exceeds the training-set size {len(X)}")
    scaler = StandardScaler.fit(X) if scale else StandardScaler.identity(X.shape[1])
    return KnnModel(k, scaler.transform(X), y.copy(), scaler)


def knn_decide(model: KnnModel, X) -> np.ndarray:
    """Boolean dropout predictions for each row of ``X``."""
    Z = model.scaler.transform(np.atleast_2d(X))
    diff = Z[:, None, :] - model.vectors[None, :, :]
    dist = np.sum(diff * diff, axis=2)
    # stable sort: equal distances keep stored order
    nearest = np.argsort(dist, axis=1, kind="stable")[:, : model.k]
    votes = model.targets[nearest].sum(axis=1)
    return 2 * votes > model.k


def knn_fit(train: Sequence[LabeledWorker], k: int, scale: bool = True) -> KnnModel:
    X, y = _training_arrays(train)
    return fit_knn(X, y, k, scale=scale)


def knn_predict(model: KnnModel, x: WorkerFeatures) -> DropoutLabel:
    return _as_label(bool(knn_decide(model, [x.vector()])[0]))


def knn_predict_many(model: KnnModel, xs: Sequence[WorkerFeatures]) -> List[DropoutLabel]:
    if not xs:
        return []
    return [_as_label(b) for b in knn_decide(model, feature_matrix(xs))]


@dataclass(frozen=True)
class GnbModel:
    # row 0 = dropout, row 1 = active
    priors: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    var_floor: float

    def dump(self) -> str:
        lines = [f"Gaussian naive Bayes  variance floor={self.var_floor:.3g}"]
        for i, name in enumerate(("dropout", "active")):
            lines.append(f"  {name}: prior={self.priors[i]:.6g}")
            for j in range(self.means.shape[1]):
                lines.append(f"    feature {j}: mean={self.means[i, j]:.6g} var={self.variances[i, j]:.6g}")
        return "\n".join(lines)


def fit_gnb(X, y) -> GnbModel:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=bool)
    n_drop = int(y.sum())
    if n_drop == 0 or n_drop == len(y):
        raise ConfigurationError("naive Bayes needs both classes in the training set")
    var_floor = VAR_FLOOR_SCALE * max(float(X.var(axis=0).max()), VAR_FLOOR_MIN)
    groups = (X[y], X[~y])
    priors = np.array([len(g) / len(X) for g in groups])
    means = np.stack([g.mean(axis=0) for g in groups])
    variances = np.maximum(np.stack([g.var(axis=0) for g in groups]), var_floor)
    return GnbModel(priors, means, variances, var_floor)


def gnb_scores(model: GnbModel, X) -> np.ndarray:
    """Joint log likelihood per row; column 0 dropout, column 1 active."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    out = np.empty((len(X), 2))
    for c in range(2):
        var = model.variances[c]
        log_norm = -0.5 * np.sum(np.log(2.0 * np.pi * var))
        out[:, c] = np.log(model.priors[c]) + log_norm - 0.5 * np.sum((X - model.means[c]) ** 2 / var, axis=1)
    return out


def gnb_decide(model: GnbModel, X) -> np.ndarray:
    scores = gnb_scores(model, X)
    return scores[:, 0] >= scores[:, 1]


def gnb_fit(train: Sequence[LabeledWorker]) -> GnbModel:
    X, y = _training_arrays(train)
    return fit_gnb(X, y)


def gnb_predict(model: GnbModel, x: WorkerFeatures) -> DropoutLabel:
    return _as_label(bool(gnb_decide(model, [x.vector()])[0]))


def gnb_predict_many(model: GnbModel, xs: Sequence[WorkerFeatures]) -> List[DropoutLabel]:
    if not xs:
        return []
    return [_as_label(b) for b in gnb_decide(model, feature_matrix(xs))]
