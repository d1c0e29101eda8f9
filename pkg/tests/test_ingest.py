import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from churnforge.ingest import (
    Format,
    IngestReport,
    SchemaError,
    finalize_log,
    parse_events,
    serialize_events,
)
from churnforge.model import ArrivalEvent, ValidationError

HEADER = "worker_id,task_id,timestamp,is_winner\n"


def test_csv_line_maps_to_event():
    events, report = parse_events(HEADER + "w1,t1,100,true\n")
    assert events == [ArrivalEvent("w1", "t1", 100, True)]
    assert report.events_read == 1 and report.events_rejected == 0


def test_header_only_is_empty():
    events, report = parse_events(HEADER.encode())
    assert events == [] and report.events_read == 0


def test_bad_timestamp_is_skipped_with_line_number():
    text = HEADER + "w1,t1,1,false\nw2,t1,2,1\nw3,t1,soon,0\nw4,t2,4,true\n"
    events, report = parse_events(io.BytesIO(text.encode()), Format.CSV)
    assert [e.worker_id for e in events] == ["w1", "w2", "w4"]
    assert report.events_rejected == 1
    assert report.rejection_reasons[0][0] == 4
    assert "timestamp" in report.rejection_reasons[0][1]


def test_crlf_and_boolean_spellings():
    text = HEADER.replace("\n", "\r\n") + "a,t,1,1\r\nb,t,2,0\r\nc,u,3,TRUE\r\n"
    events, _ = parse_events(text)
    assert [e.is_winner for e in events] == [True, False, True]


def test_other_malformed_rows():
    text = HEADER + "w1,t1,5\nw1,t1,5,maybe\n,t1,5,true\nw1,t1,-3,false\n"
    events, report = parse_events(text)
    assert events == []
    assert [n for n, _ in report.rejection_reasons] == [2, 3, 4, 5]


def test_missing_column_is_fatal():
    with pytest.raises(SchemaError, match="is_winner"):
        parse_events("worker_id,task_id,timestamp\nw1,t1,1\n")
    with pytest.raises(SchemaError):
        parse_events("")


def test_jsonl_ignores_unknown_keys_and_reports_bad_lines():
    text = (
        '{"worker_id":"w1","task_id":"t1","timestamp":7,"is_winner":true,"fee":3}\n'
        "not json\n"
        '{"worker_id":"w2","task_id":"t1"}\n'
        '{"worker_id":"w2","task_id":"t1","timestamp":"8","is_winner":"false"}\n'
    )
    events, report = parse_events(text, "jsonl")
    assert events == [ArrivalEvent("w1", "t1", 7, True), ArrivalEvent("w2", "t1", 8, False)]
    assert [n for n, _ in report.rejection_reasons] == [2, 3]


def test_finalize_sorts_and_sets_horizon():
    events = [ArrivalEvent("w3", "t3", 30), ArrivalEvent("w1", "t1", 10), ArrivalEvent("w2", "t2", 20)]
    log = finalize_log(events)
    assert [e.timestamp for e in log] == [10, 20, 30]
    assert (log.horizon_start, log.horizon_end) == (10, 30)


def test_finalize_collapses_duplicates_with_or():
    report = IngestReport()
    log = finalize_log(
        [ArrivalEvent("w1", "t1", 5, False), ArrivalEvent("w1", "t1", 5, True)], report=report
    )
    assert list(log) == [ArrivalEvent("w1", "t1", 5, True)]
    assert report.duplicates_collapsed == [("w1", "t1")]


def test_finalize_rejects_two_winners_by_task():
    with pytest.raises(ValidationError, match="t9"):
        finalize_log([ArrivalEvent("a", "t9", 1, True), ArrivalEvent("b", "t9", 2, True)])


def test_finalize_empty_needs_horizon():
    with pytest.raises(ValidationError):
        finalize_log([])
    assert len(finalize_log([], (0, 100))) == 0


ids = st.text(alphabet="abcxyz0123456789_-", min_size=1, max_size=6)


@st.composite
def event_lists(draw):
    pairs = draw(st.lists(st.tuples(ids, ids), unique=True, max_size=30))
    events = []
    has_winner = set()
    for worker, task in pairs:
        win = draw(st.booleans()) and task not in has_winner
        if win:
            has_winner.add(task)
        events.append(ArrivalEvent(worker, task, draw(st.integers(0, 10**9)), win))
    return events


@settings(max_examples=150, deadline=None)
@given(event_lists(), st.sampled_from(list(Format)))
def test_round_trip_identity(events, fmt):
    log = finalize_log(events, (0, 10**9))
    parsed, report = parse_events(serialize_events(log.events, fmt), fmt)
    assert report.events_rejected == 0
    assert finalize_log(parsed, (0, 10**9)) == log


@settings(max_examples=100, deadline=None)
@given(event_lists())
def test_finalize_is_idempotent(events):
    if not events:
        return
    once = finalize_log(events)
    assert finalize_log(once.events, (once.horizon_start, once.horizon_end)) == once
    assert finalize_log(once.events) == once
