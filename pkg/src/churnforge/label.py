"""Inter-arrival gaps, dropout labeling and the chronological labeling cut."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Sequence

from .model import (
    DropoutLabel,
    EventLog,
    LabelMode,
    LabelRule,
    ValidationError,
    WorkerFeatures,
)
from .network import features_from_log

# 90 days; the source analysis never states its threshold.
DEFAULT_PSI = 90 * 86400


@dataclass(frozen=True)
class LabeledWorker:
    features: WorkerFeatures
    label: DropoutLabel

    @property
    def worker_id(self) -> str:
        return self.features.worker_id

    @property
    def is_dropout(self) -> bool:
        return self.label is DropoutLabel.DROPOUT


def _check_sorted(times: Sequence[int]) -> None:
    for a, b in zip(times, times[1:]):
        if b < a:
            raise ValueError(f"arrival times must be sorted ascending ({a} before {b})")


def inter_arrival(times: Sequence[int]) -> List[int]:
    """Gaps between successive arrivals: ``[t2-t1, ..., tn-t(n-1)]``."""
    _check_sorted(times)
    return [b - a for a, b in zip(times, times[1:])]


def apply_label_rule(times: Sequence[int], rule: LabelRule, horizon_end: int) -> DropoutLabel:
    if not times:
        raise ValueError("cannot label a worker with no arrivals")
    _check_sorted(times)
    if times[-1] > horizon_end:
        raise ValueError(f"arrival {times[-1]} is after horizon_end {horizon_end}")

    if rule.mode is LabelMode.THRESHOLD_LAST_GAP:
        # a single arrival has no gap to test
        dropped = len(times) >= 2 and times[-1] - times[-2] > rule.psi
    elif rule.mode is LabelMode.THRESHOLD_ABSENCE:
        dropped = horizon_end - times[-1] > rule.psi
    else:
        if times[0] > rule.cut_time:
            raise ValueError("worker has no arrival at or before the cut; excluded from labeling")
        dropped = times[-1] <= rule.cut_time
    return DropoutLabel.DROPOUT if dropped else DropoutLabel.ACTIVE


def _required_tasks(train_fraction: float, n_tasks: int) -> int:
    # limit_denominator keeps 2/3 from becoming 0.666...6 and overshooting the ceiling
    frac = Fraction(train_fraction).limit_denominator(10**6)
    return max(1, math.ceil(frac * n_tasks))


def split_cut_time(log: EventLog, train_fraction: float = 2 / 3) -> int:
    """Smallest time by which ``ceil(fraction * D)`` of the D tasks are complete."""
    if not 0 < train_fraction < 1:
        raise ValueError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    if not log.events:
        raise ValueError("cannot split an empty log")
    last = {}
    for ev in log.events:
        if ev.timestamp > last.get(ev.task_id, -1):
            last[ev.task_id] = ev.timestamp
    finished = sorted(last.values())
    return finished[_required_tasks(train_fraction, len(finished)) - 1]


def label_dataset(log: EventLog, cut_time: int) -> List[LabeledWorker]:
    """Label every worker seen at or before ``cut_time``.

    Features come from the pre-cut sub-log only; a worker is a dropout when
    it has no event after the cut.
    """
    if cut_time < log.horizon_start:
        return []
    later = {ev.worker_id for ev in log.events if ev.timestamp > cut_time}
    return [
        LabeledWorker(f, DropoutLabel.ACTIVE if f.worker_id in later else DropoutLabel.DROPOUT)
        for f in features_from_log(log.until(cut_time))
    ]


def label_by_threshold(log: EventLog, rule: LabelRule) -> List[LabeledWorker]:
    """Label workers over the whole log with one of the psi-threshold rules."""
    if rule.mode is LabelMode.WINDOW_ABSENCE:
        rule.check_horizon(log)
        return label_dataset(log, rule.cut_time)
    times = log.arrival_times()
    return [
        LabeledWorker(f, apply_label_rule(times[f.worker_id], rule, log.horizon_end))
        for f in features_from_log(log)
    ]


def label_counts(labeled: Iterable[LabeledWorker]) -> dict:
    counts = {DropoutLabel.DROPOUT: 0, DropoutLabel.ACTIVE: 0}
    for lw in labeled:
        counts[lw.label] += 1
    return counts


LABEL_COLUMNS = ("worker_id", "participation_degree", "winning_degree", "success_rate", "label")


def labels_to_csv(labeled: Iterable[LabeledWorker]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(LABEL_COLUMNS)
    for lw in labeled:
        f = lw.features
        writer.writerow((f.worker_id, f.participation_degree, f.winning_degree,
                         repr(f.success_rate), lw.label.value))
    return buf.getvalue()


def labels_from_csv(text: str) -> List[LabeledWorker]:
    reader = csv.DictReader(io.StringIO(text))
    missing = [c for c in LABEL_COLUMNS if c not in (reader.fieldnames or [])]
    if missing:
        raise ValidationError(f"labels file is missing columns: {', '.join(missing)}")
    out = []
    for row in reader:
        try:
            f = WorkerFeatures(
                row["worker_id"],
                int(row["participation_degree"]),
                int(row["winning_degree"]),
                float(row["success_rate"]),
            )
        except ValueError as exc:
            raise ValidationError(f"line {reader.line_num}: {exc}") from None
        out.append(LabeledWorker(f, DropoutLabel.parse(row["label"])))
    return sorted(out, key=lambda lw: lw.worker_id)
