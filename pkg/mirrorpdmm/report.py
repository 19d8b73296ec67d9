from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .errors import InputError  # noqa: E402
from .trace import RunTrace  # noqa: E402
from .utils import format_float  # noqa: E402

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLDS = (1e-2, 1e-4, 1e-6)
# Fixed id salt so identical traces give byte-identical SVGs.
SVG_RC = {"svg.hashsalt": "mirrorpdmm"}


@dataclass(frozen=True)
class Series:
    t: np.ndarray
    consensus_residual: np.ndarray
    objective_gap: np.ndarray


@dataclass
class ReportResult:
    svg_path: Path
    summary: str
    series: dict[str, Series] = field(default_factory=dict)


def _positive(values: np.ndarray) -> np.ndarray:
    """Nonpositive entries are masked; log axes cannot show them."""
    return np.where(values > 0, values, np.nan)


def summarize(traces: dict[str, RunTrace], thresholds: Sequence[float]) -> str:
    lines = []
    for label, trace in traces.items():
        crossings = ", ".join(
            f"{format_float(thr)}: {'-' if t is None else t}"
            for thr, t in trace.crossings(list(thresholds)).items()
        )
        lines.append(
            f"{label}: {trace.iterations} iterations, "
            f"final consensus {format_float(trace.last.consensus_residual)}, "
            f"first crossings {{{crossings}}}"
        )
    return "\n".join(lines) + "\n"


def report(
    trace_paths: Sequence[str | Path],
    svg_path: str | Path,
    thresholds: Sequence[float] = DEFAULT_THRESHOLDS,
) -> ReportResult:
    """Overlay consensus residual and objective gap of each trace on log axes.

    Writes the SVG and a text summary next to it (same stem, ``.txt``).
    """
    if not trace_paths:
        raise InputError("report needs at least one trace")
    traces = {Path(p).stem: RunTrace.read_csv(p) for p in trace_paths}
    empty = [label for label, trace in traces.items() if not trace.records]
    if empty:
        raise InputError(f"traces without records: {', '.join(empty)}")
    svg_path = Path(svg_path)
    svg_path.parent.mkdir(parents=True, exist_ok=True)

    result = ReportResult(svg_path=svg_path, summary=summarize(traces, thresholds))
    with plt.rc_context(SVG_RC):
        _plot(traces, svg_path, result)

    svg_path.with_suffix(".txt").write_text(result.summary, encoding="utf-8")
    logger.info("Wrote %s for %d traces", svg_path, len(traces))
    return result


def _plot(traces: dict[str, RunTrace], svg_path: Path, result: ReportResult) -> None:
    fig, (ax_cons, ax_gap) = plt.subplots(1, 2, figsize=(12, 4.5))
    try:
        for label, trace in traces.items():
            t = np.array([r.t for r in trace.records], dtype=np.float64)
            consensus = np.array([r.consensus_residual for r in trace.records])
            gap = np.array([r.objective_gap for r in trace.records])
            result.series[label] = Series(t, consensus, gap)
            ax_cons.plot(t, _positive(consensus), label=label)
            ax_gap.plot(t, _positive(gap), label=label)
        ax_cons.set_yscale("log")
        ax_cons.set_xlabel("iteration")
        ax_cons.set_ylabel("consensus residual")
        ax_gap.set_yscale("log")
        ax_gap.set_xlabel("iteration")
        ax_gap.set_ylabel("ergodic objective gap")
        for ax in (ax_cons, ax_gap):
            ax.grid(True, which="both", alpha=0.3)
            ax.legend()
        fig.tight_layout()
        fig.savefig(svg_path, format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)
