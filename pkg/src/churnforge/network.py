"""Participation and winner networks between workers and tasks."""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass
from typing import FrozenSet, Iterable, List, Tuple

from .model import EventLog, ValidationError, WorkerFeatures

Edge = Tuple[str, str]


@dataclass(frozen=True)
class MarketNetworks:
    participation_edges: FrozenSet[Edge]
    winner_edges: FrozenSet[Edge]

    def __post_init__(self):
        object.__setattr__(self, "participation_edges", frozenset(self.participation_edges))
        object.__setattr__(self, "winner_edges", frozenset(self.winner_edges))
        stray = self.winner_edges - self.participation_edges
        if stray:
            w, t = min(stray)
            raise ValidationError(f"winner edge {w}-{t} has no participation edge")
        tasks = Counter(task for _, task in self.winner_edges)
        multi = sorted(t for t, n in tasks.items() if n > 1)
        if multi:
            raise ValidationError(f"task {multi[0]} has more than one winner edge")

    @property
    def tasks_with_winner(self) -> int:
        return len({task for _, task in self.winner_edges})


def build_networks(log: EventLog) -> MarketNetworks:
    participation = set()
    winners = set()
    for ev in log.events:
        participation.add((ev.worker_id, ev.task_id))
        if ev.is_winner:
            winners.add((ev.worker_id, ev.task_id))
    return MarketNetworks(frozenset(participation), frozenset(winners))


def worker_features(nets: MarketNetworks) -> List[WorkerFeatures]:
    """Degree features for every worker with a participation edge, by worker_id."""
    part = Counter(w for w, _ in nets.participation_edges)
    wins = Counter(w for w, _ in nets.winner_edges)
    return [WorkerFeatures(w, part[w], wins.get(w, 0)) for w in sorted(part)]


def features_from_log(log: EventLog) -> List[WorkerFeatures]:
    return worker_features(build_networks(log))


def in_percent_range(f: WorkerFeatures, low: int, high: int) -> bool:
    """Exact membership of the success rate in a percent bin.

    The lowest bin (``low == 0``) is closed on both ends; every other bin is
    (low, high]. Decided on integers, never on the float ratio.
    """
    scaled = 100 * f.winning_degree
    upper = scaled <= high * f.participation_degree
    if low == 0:
        return upper
    return upper and scaled > low * f.participation_degree


FEATURE_COLUMNS = ("worker_id", "participation_degree", "winning_degree", "success_rate")


def features_to_csv(features: Iterable[WorkerFeatures]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(FEATURE_COLUMNS)
    for f in features:
        writer.writerow((f.worker_id, f.participation_degree, f.winning_degree, repr(f.success_rate)))
    return buf.getvalue()
