"""Accuracy and the train/test split-ratio sweep."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from .classify import feature_matrix, fit_gnb, fit_knn, gnb_decide, knn_decide
from .label import LabeledWorker
from .model import DropoutLabel

DEFAULT_RATIOS = tuple(range(10, 100, 10))
MAX_REDRAWS = 100


class EvaluationError(RuntimeError):
    pass


@dataclass(frozen=True)
class SweepRow:
    train_pct: int
    acc_knn1: float
    acc_knn3: float
    acc_gnb: float

    def __post_init__(self):
        for acc in (self.acc_knn1, self.acc_knn3, self.acc_gnb):
            if not 0.0 <= acc <= 100.0:
                raise ValueError(f"accuracy {acc} outside [0, 100]")

    @property
    def cells(self):
        return (self.acc_knn1, self.acc_knn3, self.acc_gnb)


def accuracy(predictions: Sequence[DropoutLabel], truths: Sequence[DropoutLabel]) -> float:
    if len(predictions) != len(truths):
        raise ValueError(f"length mismatch: {len(predictions)} predictions, {len(truths)} truths")
    if not truths:
        raise ValueError("accuracy of an empty set is undefined")
    hits = sum(p == t for p, t in zip(predictions, truths))
    return 100.0 * hits / len(truths)


def _bool_accuracy(pred: np.ndarray, truth: np.ndarray) -> float:
    return 100.0 * int(np.sum(pred == truth)) / len(truth)


def _draw_split(y: np.ndarray, n_train: int, seed: int, pct: int):
    for attempt in range(MAX_REDRAWS):
        rng = np.random.default_rng([seed, pct, attempt])
        order = rng.permutation(len(y))
        train = order[:n_train]
        n_drop = int(y[train].sum())
        if 0 < n_drop < n_train:
            return train, order[n_train:]
    raise EvaluationError(
        f"ratio {pct}%: every one of {MAX_REDRAWS} draws gave a single-class training set"
    )


def sweep_row(X, y, pct: int, seed: int, scale: bool = True) -> SweepRow:
    if not 0 < pct < 100:
        raise ValueError(f"train percent must lie in (0, 100), got {pct}")
    n = len(y)
    n_train = math.ceil(pct * n / 100)
    if n_train >= n:
        raise EvaluationError(f"ratio {pct}%: {n} records leave no test set")
    if n_train < 3:
        raise EvaluationError(f"ratio {pct}%: {n_train} training records cannot fit k-NN with k=3")
    train, test = _draw_split(y, n_train, seed, pct)
    # keep the stored training order canonical (worker_id) for tie-breaking
    train = np.sort(train)
    Xtr, ytr, Xte, yte = X[train], y[train], X[test], y[test]
    accs = [
        _bool_accuracy(knn_decide(fit_knn(Xtr, ytr, k, scale=scale), Xte), yte)
        for k in (1, 3)
    ]
    accs.append(_bool_accuracy(gnb_decide(fit_gnb(Xtr, ytr), Xte), yte))
    return SweepRow(pct, *accs)


def split_sweep(
    data: Sequence[LabeledWorker],
    ratios: Sequence[int] = DEFAULT_RATIOS,
    seed: int = 0,
    scale: bool = True,
) -> List[SweepRow]:
    """One row per train percentage, in request order.

    Each row reshuffles the labeled pool with a seed derived from
    ``(seed, pct)``; single-class training draws are redrawn.
    """
    ordered = sorted(data, key=lambda lw: lw.worker_id)
    y = np.array([lw.is_dropout for lw in ordered], dtype=bool)
    if y.all() or not y.any():
        raise EvaluationError("labeled data contains a single class")
    X = feature_matrix([lw.features for lw in ordered])
    return [sweep_row(X, y, int(pct), seed, scale=scale) for pct in ratios]


SWEEP_COLUMNS = ("train_pct", "knn1", "knn3", "bayes")


def sweep_to_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for r in rows:
        writer.writerow((r.train_pct, *(f"{a:.2f}" for a in r.cells)))
    return buf.getvalue()


def render_sweep(rows: Sequence[SweepRow]) -> str:
    head = ("Train-Test", "k-NN (k = 1)", "k-NN (k = 3)", "Bayes")
    body = [(f"{r.train_pct}-{100 - r.train_pct}", *(f"{a:.2f}" for a in r.cells)) for r in rows]
    widths = [max(len(h), *(len(b[i]) for b in body)) if body else len(h) for i, h in enumerate(head)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(head, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(c.rjust(w) for c, w in zip(b, widths)) for b in body]
    return "\n".join(lines) + "\n"
