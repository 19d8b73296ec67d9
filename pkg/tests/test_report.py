import numpy as np
import pytest

from mirrorpdmm.errors import InputError
from mirrorpdmm.report import report, summarize
from mirrorpdmm.trace import CSV_HEADER, DiagnosticsRecord, RunTrace


def make_trace(variant, rate):
    records = [
        DiagnosticsRecord(t, objective_gap=rate**t - 0.5, consensus_residual=rate**t)
        for t in range(30)
    ]
    return RunTrace(variant, records)


@pytest.fixture
def trace_paths(tmp_path):
    return [
        make_trace("bregman", 0.5).write_csv(tmp_path / "bregman.csv"),
        make_trace("euclid", 0.8).write_csv(tmp_path / "euclid.csv"),
    ]


def test_report_writes_svg_and_summary(tmp_path, trace_paths):
    svg = tmp_path / "plots" / "figure.svg"
    result = report(trace_paths, svg)
    assert result.svg_path == svg
    assert svg.read_text().lstrip().startswith("<?xml")
    assert svg.with_suffix(".txt").read_text() == result.summary
    assert set(result.series) == {"bregman", "euclid"}


def test_report_series_follow_csv(tmp_path, trace_paths):
    result = report(trace_paths, tmp_path / "figure.svg")
    series = result.series["euclid"]
    np.testing.assert_array_equal(series.t, np.arange(30))
    np.testing.assert_allclose(series.consensus_residual, 0.8 ** np.arange(30), rtol=1e-15)
    assert series.objective_gap[0] == 0.5


def test_report_is_reproducible(tmp_path, trace_paths):
    a = report(trace_paths, tmp_path / "a.svg").svg_path.read_bytes()
    b = report(trace_paths, tmp_path / "b.svg").svg_path.read_bytes()
    assert a == b


def test_summary_lists_crossings():
    summary = summarize({"bregman": make_trace("bregman", 0.5)}, [1e-2, 1e-12])
    assert summary == (
        "bregman: 29 iterations, final consensus 1.862645149230957e-09, "
        "first crossings {0.01: 7, 1e-12: -}\n"
    )


def test_report_errors(tmp_path):
    with pytest.raises(InputError):
        report([], tmp_path / "x.svg")
    empty = tmp_path / "empty.csv"
    empty.write_text(",".join(CSV_HEADER) + "\n")
    with pytest.raises(InputError):
        report([empty], tmp_path / "x.svg")
    with pytest.raises(InputError):
        report([tmp_path / "missing.csv"], tmp_path / "x.svg")
