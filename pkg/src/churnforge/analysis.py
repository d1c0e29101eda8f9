"""Correlations and success-rate binning of dropouts."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence

from .model import BIN_EDGES_PCT, BinRow, BinTable, ValidationError, WorkerFeatures
from .network import in_percent_range


class UndefinedCorrelation(ValueError):
    """One of the inputs has zero variance."""


@dataclass(frozen=True)
class CorrelationResult:
    rho: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 2:
            raise ValidationError("a correlation needs at least 2 points")
        if abs(self.rho) > 1 + 1e-12:
            raise ValidationError(f"rho {self.rho} outside [-1, 1]")


def pearson(xs: Sequence[float], ys: Sequence[float]) -> CorrelationResult:
    """Product-moment correlation, computed as mean first, then central moments."""
    n = len(xs)
    if n != len(ys):
        raise ValueError(f"length mismatch: {n} vs {len(ys)}")
    if n < 2:
        raise ValueError("pearson needs at least 2 points")
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    dx = [x - mx for x in xs]
    dy = [y - my for y in ys]
    sxx = math.fsum(d * d for d in dx)
    syy = math.fsum(d * d for d in dy)
    if sxx == 0 or syy == 0:
        raise UndefinedCorrelation("correlation is undefined for a constant input")
    sxy = math.fsum(a * b for a, b in zip(dx, dy))
    rho = sxy / (math.sqrt(sxx) * math.sqrt(syy))
    return CorrelationResult(max(-1.0, min(1.0, rho)), n)


def degree_correlation(features: Sequence[WorkerFeatures]) -> CorrelationResult:
    return pearson(
        [f.participation_degree for f in features],
        [f.winning_degree for f in features],
    )


def bin_success_rates(dropouts: Sequence[WorkerFeatures]) -> BinTable:
    """Tally dropouts into the ten success-rate bins.

    Bin means are exact rational averages rounded once to float percent, so
    a mean never escapes its bin through rounding.
    """
    members: List[List[WorkerFeatures]] = [[] for _ in range(10)]
    for f in dropouts:
        for i in range(10):
            if in_percent_range(f, BIN_EDGES_PCT[i], BIN_EDGES_PCT[i + 1]):
                members[i].append(f)
                break
    pairs = []
    for group in members:
        if not group:
            pairs.append((0, None))
            continue
        total = sum(Fraction(f.winning_degree, f.participation_degree) for f in group)
        pairs.append((len(group), float(100 * total / len(group))))
    return BinTable.from_pairs(pairs)


def bin_dropout_correlation(table: BinTable, exclude_top_bin: bool = True) -> CorrelationResult:
    rows = table.rows[:-1] if exclude_top_bin else table.rows
    usable = [r for r in rows if not r.is_empty]
    if len(usable) < 2:
        raise ValueError(f"need at least 2 nonempty bins, got {len(usable)}")
    return pearson([r.mean_success_rate for r in usable], [r.dropout_count for r in usable])


# Published dropout table of the Flightfox study: (count, mean success rate %).
PUBLISHED_TABLE1 = BinTable.from_pairs([
    (366, 0.15), (43, 15.64), (62, 25.40), (72, 35.58), (78, 48.97),
    (15, 56.20), (14, 66.33), (8, 76.89), (2, 84.60), (64, 100.0),
])

BIN_COLUMNS = ("range", "count", "mean_success_rate_pct")


def _fmt_mean(row: BinRow) -> str:
    return "" if row.is_empty else f"{row.mean_success_rate:.2f}"


def bin_table_to_csv(table: BinTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(BIN_COLUMNS)
    for row in table.rows:
        writer.writerow((row.label, row.dropout_count, _fmt_mean(row)))
    return buf.getvalue()


def bin_table_from_csv(text: str) -> BinTable:
    reader = csv.DictReader(io.StringIO(text))
    missing = [c for c in BIN_COLUMNS if c not in (reader.fieldnames or [])]
    if missing:
        raise ValidationError(f"bin table is missing columns: {', '.join(missing)}")
    pairs = []
    for row in reader:
        count = int(row["count"])
        mean = row["mean_success_rate_pct"].strip()
        pairs.append((count, float(mean) if mean else None))
    return BinTable.from_pairs(pairs)


def render_bin_table(table: BinTable) -> str:
    head = ("Range of success rate", "Number of dropouts", "Average success rate (%)")
    body = [(r.label, str(r.dropout_count), _fmt_mean(r) or "-") for r in table.rows]
    widths = [max(len(h), *(len(b[i]) for b in body)) for i, h in enumerate(head)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(head, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for b in body:
        lines.append("  ".join([b[0].ljust(widths[0]), b[1].rjust(widths[1]), b[2].rjust(widths[2])]))
    lines.append(f"total dropouts binned: {table.total}")
    return "\n".join(lines) + "\n"
