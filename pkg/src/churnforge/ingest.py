"""Read, validate and normalize participation event logs.

Both formats carry the same four fields, ``worker_id,task_id,timestamp,is_winner``.
Malformed data rows are skipped and reported; only schema problems are fatal.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import logging
from dataclasses import dataclass, field
from typing import IO, Iterable, List, Optional, Sequence, Tuple, Union

from .model import ArrivalEvent, EventLog, ValidationError

logger = logging.getLogger(__name__)

COLUMNS = ("worker_id", "task_id", "timestamp", "is_winner")

_TRUE = {"true", "1"}
_FALSE = {"false", "0"}


class Format(enum.Enum):
    CSV = "csv"
    JSONL = "jsonl"


class SchemaError(ValueError):
    """The input is not an event log at all (bad header, wrong format)."""


@dataclass
class IngestReport:
    events_read: int = 0
    rejection_reasons: List[Tuple[int, str]] = field(default_factory=list)
    duplicates_collapsed: List[Tuple[str, str]] = field(default_factory=list)

    @property
    def events_rejected(self) -> int:
        return len(self.rejection_reasons)

    def reject(self, line: int, reason: str) -> None:
        self.rejection_reasons.append((line, reason))

    def summary(self) -> str:
        lines = [f"events read: {self.events_read}", f"events rejected: {self.events_rejected}"]
        lines += [f"  line {n}: {why}" for n, why in self.rejection_reasons]
        if self.duplicates_collapsed:
            lines.append(f"duplicate pairs collapsed: {len(self.duplicates_collapsed)}")
        return "\n".join(lines)


def _parse_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, int) and value in (0, 1):
        return bool(value)
    text = str(value).strip().lower()
    if text in _TRUE:
        return True
    if text in _FALSE:
        return False
    raise ValueError(f"is_winner must be true/false/1/0, got {value!r}")


def _parse_timestamp(value) -> int:
    if isinstance(value, bool):
        raise ValueError(f"timestamp must be an integer, got {value!r}")
    if isinstance(value, int):
        return value
    text = str(value).strip()
    try:
        return int(text)
    except ValueError:
        raise ValueError(f"timestamp must be an integer, got {value!r}") from None


def _make_event(worker, task, ts, win) -> ArrivalEvent:
    if not isinstance(worker, str) or not isinstance(task, str):
        raise ValueError("worker_id and task_id must be strings")
    return ArrivalEvent(worker.strip(), task.strip(), _parse_timestamp(ts), _parse_bool(win))


def _text_stream(source: Union[IO, bytes, str]) -> IO[str]:
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8"), newline="")
    if isinstance(source, str):
        return io.StringIO(source, newline="")
    if isinstance(source, io.TextIOBase):
        return source
    return io.TextIOWrapper(source, encoding="utf-8", newline="")


def _parse_csv(stream: IO[str], report: IngestReport) -> List[ArrivalEvent]:
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError("empty input: missing header row") from None
    header = [h.strip().lstrip("﻿") for h in header]
    missing = [c for c in COLUMNS if c not in header]
    if missing:
        raise SchemaError(f"header is missing required columns: {', '.join(missing)}")
    index = [header.index(c) for c in COLUMNS]

    events = []
    for row in reader:
        lineno = reader.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            report.reject(lineno, f"expected {len(header)} fields, got {len(row)}")
            continue
        try:
            events.append(_make_event(*(row[i] for i in index)))
        except (ValueError, ValidationError) as exc:
            report.reject(lineno, str(exc))
    return events


def _parse_jsonl(stream: IO[str], report: IngestReport) -> List[ArrivalEvent]:
    events = []
    for lineno, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            report.reject(lineno, f"invalid JSON: {exc.msg}")
            continue
        if not isinstance(obj, dict):
            report.reject(lineno, "record is not a JSON object")
            continue
        missing = [c for c in COLUMNS if c not in obj]
        if missing:
            report.reject(lineno, f"missing keys: {', '.join(missing)}")
            continue
        try:
            events.append(_make_event(*(obj[c] for c in COLUMNS)))
        except (ValueError, ValidationError) as exc:
            report.reject(lineno, str(exc))
    return events


def parse_events(source, fmt: Union[Format, str] = Format.CSV) -> Tuple[List[ArrivalEvent], IngestReport]:
    """Parse ``source`` (bytes, text or a binary/text stream) into events.

    Output order equals input order. Raises ``SchemaError`` for a CSV header
    lacking any required column.
    """
    fmt = Format(fmt)
    report = IngestReport()
    stream = _text_stream(source)
    if fmt is Format.CSV:
        events = _parse_csv(stream, report)
    else:
        events = _parse_jsonl(stream, report)
    report.events_read = len(events)
    if report.events_rejected:
        logger.warning("rejected %d malformed records", report.events_rejected)
    return events, report


def read_events(path, fmt: Optional[Union[Format, str]] = None) -> Tuple[List[ArrivalEvent], IngestReport]:
    if fmt is None:
        fmt = guess_format(path)
    with open(path, "rb") as fh:
        return parse_events(fh, fmt)


def guess_format(path) -> Format:
    return Format.JSONL if str(path).lower().endswith((".jsonl", ".ndjson")) else Format.CSV


def finalize_log(
    events: Sequence[ArrivalEvent],
    horizon: Optional[Tuple[int, int]] = None,
    report: Optional[IngestReport] = None,
) -> EventLog:
    """Sort, collapse duplicate (worker, task) pairs and validate.

    Duplicates keep the earliest timestamp and OR their winner flags. The
    horizon defaults to the span of the event timestamps.
    """
    if not events and horizon is None:
        raise ValidationError("cannot finalize an empty log without an explicit horizon")

    merged = {}
    for ev in events:
        pair = (ev.worker_id, ev.task_id)
        prev = merged.get(pair)
        if prev is None:
            merged[pair] = ev
            continue
        if report is not None:
            report.duplicates_collapsed.append(pair)
        merged[pair] = ArrivalEvent(
            ev.worker_id, ev.task_id,
            min(prev.timestamp, ev.timestamp),
            prev.is_winner or ev.is_winner,
        )

    winners = {}
    for ev in merged.values():
        if ev.is_winner:
            winners.setdefault(ev.task_id, []).append(ev.worker_id)
    for task, who in sorted(winners.items()):
        if len(who) > 1:
            raise ValidationError(f"task {task} has {len(who)} winners: {', '.join(sorted(who))}")

    ordered = sorted(merged.values(), key=ArrivalEvent.sort_key)
    if horizon is None:
        horizon = (ordered[0].timestamp, ordered[-1].timestamp)
    return EventLog(tuple(ordered), int(horizon[0]), int(horizon[1]))


def serialize_events(events: Iterable[ArrivalEvent], fmt: Union[Format, str] = Format.CSV) -> str:
    fmt = Format(fmt)
    buf = io.StringIO(newline="")
    if fmt is Format.CSV:
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(COLUMNS)
        for ev in events:
            writer.writerow((ev.worker_id, ev.task_id, ev.timestamp, "true" if ev.is_winner else "false"))
    else:
        for ev in events:
            buf.write(json.dumps({
                "worker_id": ev.worker_id,
                "task_id": ev.task_id,
                "timestamp": ev.timestamp,
                "is_winner": ev.is_winner,
            }, separators=(",", ":")))
            buf.write("\n")
    return buf.getvalue()
