import math

import pytest

from mirrorpdmm.errors import InputError
from mirrorpdmm.trace import CSV_HEADER, DiagnosticsRecord, RunTrace


@pytest.fixture
def trace():
    return RunTrace(
        variant="bregman",
        records=[
            DiagnosticsRecord(0, 1.5, 0.2, wall_nanos=10),
            DiagnosticsRecord(1, 0.1, 0.05, R=0.3, V=2.0, wall_nanos=20),
            DiagnosticsRecord(2, math.nan, 1e-3, R=1e-17, V=1.0 / 3.0, wall_nanos=35),
            DiagnosticsRecord(3, -0.01, 5e-5, R=0.0, wall_nanos=40),
        ],
        stop_reason="max_iters",
    )


def test_csv_round_trip(tmp_path, trace):
    path = trace.write_csv(tmp_path / "out" / "bregman.csv")
    loaded = RunTrace.read_csv(path)
    assert loaded.variant == "bregman"
    assert len(loaded.records) == 4
    for a, b in zip(trace.records, loaded.records):
        assert (a.t, a.consensus_residual, a.R, a.V, a.wall_nanos) == (
            b.t,
            b.consensus_residual,
            b.R,
            b.V,
            b.wall_nanos,
        )
    assert math.isnan(loaded.records[2].objective_gap)


def test_csv_layout(tmp_path, trace):
    lines = trace.write_csv(tmp_path / "t.csv").read_text().split("\n")
    assert lines[0] == ",".join(CSV_HEADER)
    assert lines[1] == "0,1.5,0.2,,,10"
    assert lines[3] == "2,nan,0.001,1e-17,0.3333333333333333,35"
    assert lines[-1] == ""
    assert len(lines) == 6


def test_read_rejects_foreign_files(tmp_path):
    path = tmp_path / "other.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(InputError):
        RunTrace.read_csv(path)
    with pytest.raises(InputError):
        RunTrace.read_csv(tmp_path / "missing.csv")
    bad = tmp_path / "bad.csv"
    bad.write_text(",".join(CSV_HEADER) + "\n1,x,0,,,0\n")
    with pytest.raises(InputError):
        RunTrace.read_csv(bad)


def test_first_crossing_skips_initial_record(trace):
    assert trace.first_crossing(0.5) == 1
    assert trace.first_crossing(1e-3) == 2
    assert trace.first_crossing(1e-6) is None
    assert trace.first_crossing(0.0, metric="objective_gap") == 3
    assert trace.crossings([1e-2, 1e-4]) == {"0.01": 2, "0.0001": 3}


def test_iterations_and_last(trace):
    assert trace.iterations == 3
    assert trace.last.t == 3
    assert RunTrace("euclid").iterations == 0
