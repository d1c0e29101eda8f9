"""Domain types shared across the pipeline.

All values are frozen; constructors validate and raise ``ValidationError``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple


class ValidationError(ValueError):
    """A domain value violated one of its invariants."""


class ConfigurationError(ValueError):
    """Settings for a model or generator are out of range."""


@dataclass(frozen=True)
class ArrivalEvent:
    """One worker entering one task at ``timestamp`` (integer UTC seconds)."""

    worker_id: str
    task_id: str
    timestamp: int
    is_winner: bool = False

    def __post_init__(self):
        if not self.worker_id:
            raise ValidationError("worker_id cannot be empty")
        if not self.task_id:
            raise ValidationError("task_id cannot be empty")
        if isinstance(self.timestamp, bool) or not isinstance(self.timestamp, int):
            raise ValidationError(f"timestamp must be an integer, got {self.timestamp!r}")
        if self.timestamp < 0:
            raise ValidationError(f"timestamp must be >= 0, got {self.timestamp}")

    def sort_key(self) -> Tuple[int, str, str]:
        return (self.timestamp, self.task_id, self.worker_id)


@dataclass(frozen=True)
class EventLog:
    """Time-sorted participation events over an observation window."""

    events: Tuple[ArrivalEvent, ...]
    horizon_start: int
    horizon_end: int

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        if self.horizon_start > self.horizon_end:
            raise ValidationError(
                f"horizon_start {self.horizon_start} is after horizon_end {self.horizon_end}"
            )
        winners = {}
        pairs = set()
        prev = None
        for ev in self.events:
            key = ev.sort_key()
            if prev is not None and key < prev:
                raise ValidationError("events are not sorted by (timestamp, task_id, worker_id)")
            prev = key
            if not self.horizon_start <= ev.timestamp <= self.horizon_end:
                raise ValidationError(
                    f"event {ev.worker_id}/{ev.task_id} at {ev.timestamp} lies outside "
                    f"[{self.horizon_start}, {self.horizon_end}]"
                )
            pair = (ev.worker_id, ev.task_id)
            if pair in pairs:
                raise ValidationError(f"duplicate participation {pair[0]} in {pair[1]}")
            pairs.add(pair)
            if ev.is_winner:
                if ev.task_id in winners:
                    raise ValidationError(
                        f"task {ev.task_id} has two winners: {winners[ev.task_id]} and {ev.worker_id}"
                    )
                winners[ev.task_id] = ev.worker_id

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    @property
    def task_ids(self):
        return sorted({ev.task_id for ev in self.events})

    @property
    def worker_ids(self):
        return sorted({ev.worker_id for ev in self.events})

    def until(self, cut_time: int) -> "EventLog":
        """Sub-log of events at or before ``cut_time``."""
        end = max(self.horizon_start, min(cut_time, self.horizon_end))
        return EventLog(
            tuple(ev for ev in self.events if ev.timestamp <= cut_time),
            self.horizon_start,
            end,
        )

    def arrival_times(self) -> dict:
        """Map worker_id -> ascending list of that worker's timestamps."""
        times: dict = {}
        for ev in self.events:
            times.setdefault(ev.worker_id, []).append(ev.timestamp)
        return times


@dataclass(frozen=True)
class WorkerFeatures:
    worker_id: str
    participation_degree: int
    winning_degree: int
    success_rate: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if not self.worker_id:
            raise ValidationError("worker_id cannot be empty")
        if self.participation_degree < 1:
            raise ValidationError(
                f"{self.worker_id}: participation_degree must be >= 1, got {self.participation_degree}"
            )
        if not 0 <= self.winning_degree <= self.participation_degree:
            raise ValidationError(
                f"{self.worker_id}: winning_degree {self.winning_degree} not in "
                f"[0, {self.participation_degree}]"
            )
        exact = self.winning_degree / self.participation_degree
        if self.success_rate is None:
            object.__setattr__(self, "success_rate", exact)
        elif abs(self.success_rate - exact) > math.ulp(exact):
            raise ValidationError(
                f"{self.worker_id}: success_rate {self.success_rate!r} != "
                f"{self.winning_degree}/{self.participation_degree}"
            )

    def vector(self) -> Tuple[float, float, float]:
        return (float(self.participation_degree), float(self.winning_degree), self.success_rate)


class DropoutLabel(enum.Enum):
    DROPOUT = "dropout"
    ACTIVE = "active"

    @classmethod
    def parse(cls, text: str) -> "DropoutLabel":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ValidationError(f"unknown label {text!r}") from None


class LabelMode(enum.Enum):
    THRESHOLD_LAST_GAP = "threshold-last-gap"
    THRESHOLD_ABSENCE = "threshold-absence"
    WINDOW_ABSENCE = "window-absence"


@dataclass(frozen=True)
class LabelRule:
    mode: LabelMode = LabelMode.WINDOW_ABSENCE
    psi: int = 0
    cut_time: Optional[int] = None

    def __post_init__(self):
        if self.psi < 0:
            raise ValidationError(f"psi must be >= 0, got {self.psi}")
        if self.mode is LabelMode.WINDOW_ABSENCE and self.cut_time is None:
            raise ValidationError("window-absence labeling needs a cut_time")

    def check_horizon(self, log: EventLog) -> None:
        if self.cut_time is not None and not log.horizon_start <= self.cut_time <= log.horizon_end:
            raise ValidationError(
                f"cut_time {self.cut_time} outside horizon [{log.horizon_start}, {log.horizon_end}]"
            )


BIN_EDGES_PCT = tuple(range(0, 101, 10))


@dataclass(frozen=True)
class BinRow:
    range_low: int
    range_high: int
    dropout_count: int
    mean_success_rate: Optional[float]  # percent; None marks an empty bin

    def __post_init__(self):
        if self.dropout_count < 0:
            raise ValidationError("dropout_count must be >= 0")
        if self.dropout_count == 0:
            if self.mean_success_rate is not None:
                raise ValidationError(f"empty bin {self.label} cannot carry a mean")
            return
        if self.mean_success_rate is None:
            raise ValidationError(f"nonempty bin {self.label} needs a mean")
        lo_ok = self.mean_success_rate >= self.range_low if self.range_low == 0 else self.mean_success_rate > self.range_low
        if not (lo_ok and self.mean_success_rate <= self.range_high):
            raise ValidationError(
                f"mean {self.mean_success_rate} lies outside bin {self.label}"
            )

    @property
    def label(self) -> str:
        return f"{self.range_low}-{self.range_high}"

    @property
    def is_empty(self) -> bool:
        return self.dropout_count == 0


@dataclass(frozen=True)
class BinTable:
    """Dropout counts per success-rate decile: [0,10], (10,20], ..., (90,100]."""

    rows: Tuple[BinRow, ...]

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        if len(self.rows) != 10:
            raise ValidationError(f"a BinTable has exactly 10 rows, got {len(self.rows)}")
        for i, row in enumerate(self.rows):
            if (row.range_low, row.range_high) != (BIN_EDGES_PCT[i], BIN_EDGES_PCT[i + 1]):
                raise ValidationError(f"row {i} has range {row.label}, expected "
                                      f"{BIN_EDGES_PCT[i]}-{BIN_EDGES_PCT[i + 1]}")

    @classmethod
    def from_pairs(cls, pairs: Sequence[Tuple[int, Optional[float]]]) -> "BinTable":
        """Build from ten (count, mean percent) pairs in bin order."""
        return cls(tuple(
            BinRow(BIN_EDGES_PCT[i], BIN_EDGES_PCT[i + 1], int(count), mean if count else None)
            for i, (count, mean) in enumerate(pairs)
        ))

    @property
    def total(self) -> int:
        return sum(r.dropout_count for r in self.rows)
