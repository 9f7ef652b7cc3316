import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from extreme_bandits.traces import (
    TraceDataset,
    TraceFormatError,
    bin_events,
    bundled_trace_path,
    ingest_trace,
    write_counts_csv,
)


def write(tmp_path, text, name="trace.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_hand_binned_events(tmp_path):
    d = ingest_trace(write(tmp_path, "0,1.0\n0,2.0\n0,5.0\n"))
    assert d.labels == ["0"]
    assert list(d.counts[0]) == [2, 1]


def test_pre_binned_counts(tmp_path):
    d = ingest_trace(write(tmp_path, "0,7\n"))
    assert list(d.counts[0]) == [7]


def test_unparseable_row_reports_line_one(tmp_path):
    with pytest.raises(TraceFormatError) as exc:
        ingest_trace(write(tmp_path, "a,b\n"))
    assert exc.value.line == 1


def test_bad_row_later_in_file(tmp_path):
    with pytest.raises(TraceFormatError) as exc:
        ingest_trace(write(tmp_path, "arm_id,count\nh1,3\nh1,4\nh1,x\n"))
    assert exc.value.line == 4


def test_wrong_field_count(tmp_path):
    with pytest.raises(TraceFormatError) as exc:
        ingest_trace(write(tmp_path, "h1,3\nh1,3,4\n"))
    assert exc.value.line == 2


def test_negative_count(tmp_path):
    with pytest.raises(TraceFormatError, match="negative"):
        ingest_trace(write(tmp_path, "h1,3\nh1,-2\n"))


def test_empty_arm_id(tmp_path):
    with pytest.raises(TraceFormatError, match="empty arm"):
        ingest_trace(write(tmp_path, "h1,3\n,2\n"))


def test_fractional_count_rejected_when_schema_is_counts(tmp_path):
    with pytest.raises(TraceFormatError):
        ingest_trace(write(tmp_path, "h1,3\nh1,2.5\n"), schema="counts")


def test_no_data_rows(tmp_path):
    with pytest.raises(TraceFormatError):
        ingest_trace(write(tmp_path, "arm_id,count\n"))


def test_header_detection_and_schema(tmp_path):
    d = ingest_trace(write(tmp_path, "arm_id,timestamp_seconds\nh1,0\nh1,3\nh2,10\nh1,9\n"))
    assert d.labels == ["h1", "h2"]
    assert list(d.counts[0]) == [2, 0, 1] and list(d.counts[1]) == [1]
    d = ingest_trace(write(tmp_path, "host,count\nh1,0\nh1,3\n"))
    assert list(d.counts[0]) == [0, 3]


def test_integer_events_need_explicit_schema(tmp_path):
    # integer second fields default to counts; the event reading is opt-in
    p = write(tmp_path, "h1,0\nh1,1\nh1,6\n")
    assert list(ingest_trace(p).counts[0]) == [0, 1, 6]
    assert list(ingest_trace(p, schema="events").counts[0]) == [2, 1]


def test_custom_window(tmp_path):
    d = ingest_trace(write(tmp_path, "0,1.0\n0,2.0\n0,5.0\n"), window=1.0)
    assert list(d.counts[0]) == [1, 1, 0, 0, 1]


def test_bin_events_validation():
    with pytest.raises(ValueError):
        bin_events([], 4.0)
    with pytest.raises(ValueError):
        bin_events([1.0], 0.0)


@given(st.lists(st.floats(0, 1e4), min_size=1, max_size=300), st.floats(0.5, 100))
def test_binning_conserves_events(ts, window):
    counts = bin_events(ts, window)
    assert counts.sum() == len(ts) and counts[0] >= 1 and counts[-1] >= 1


@given(st.dictionaries(st.text("abcxyz_", min_size=1, max_size=6),
                       st.lists(st.integers(0, 10_000), min_size=1, max_size=40), min_size=1, max_size=5))
def test_counts_round_trip(tmp_path_factory, data):
    d = TraceDataset(list(data), [np.asarray(v) for v in data.values()])
    p = tmp_path_factory.mktemp("rt") / "counts.csv"
    write_counts_csv(d, p)
    back = ingest_trace(p)
    assert back.labels == d.labels
    assert all(np.array_equal(a, b) for a, b in zip(back.counts, d.counts))


def test_dataset_validation_and_select():
    with pytest.raises(ValueError):
        TraceDataset(["a"], [np.array([], dtype=int)])
    with pytest.raises(ValueError):
        TraceDataset(["a"], [np.array([-1])])
    d = TraceDataset(["a", "b"], [np.array([1]), np.array([2, 3])])
    assert d.select(["b"]).labels == ["b"]
    with pytest.raises(KeyError):
        d.select(["c"])
    arms = d.arms()
    assert arms[1].samples == (2.0, 3.0) and arms[1].label == "b"


def test_bundled_trace():
    d = ingest_trace(bundled_trace_path())
    assert d.n_arms == 5
    assert all(len(c) == 3000 and c.min() >= 0 for c in d.counts)
