from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import InputError
from .utils import format_float

CSV_HEADER = ("t", "objective_gap", "consensus_residual", "R", "V", "wall_nanos")


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: int
    objective_gap: float
    consensus_residual: float
    R: Optional[float] = None
    V: Optional[float] = None
    wall_nanos: int = 0
    ergodic_consensus_residual: Optional[float] = None

    def to_row(self) -> list[str]:
        return [
            str(self.t),
            format_float(self.objective_gap),
            format_float(self.consensus_residual),
            format_float(self.R),
            format_float(self.V),
            str(self.wall_nanos),
        ]

    @classmethod
    def from_row(cls, row: dict[str, str]) -> DiagnosticsRecord:
        def optional(key: str) -> Optional[float]:
            value = row[key]
            return float(value) if value != "" else None

        return cls(
            t=int(row["t"]),
            objective_gap=float(row["objective_gap"]),
            consensus_residual=float(row["consensus_residual"]),
            R=optional("R"),
            V=optional("V"),
            wall_nanos=int(row["wall_nanos"]),
        )


@dataclass
class RunTrace:
    variant: str
    records: list[DiagnosticsRecord] = field(default_factory=list)
    stop_reason: Optional[str] = None

    def append(self, record: DiagnosticsRecord) -> None:
        self.records.append(record)

    @property
    def iterations(self) -> int:
        return max(0, len(self.records) - 1)

    @property
    def last(self) -> DiagnosticsRecord:
        return self.records[-1]

    def first_crossing(
        self, threshold: float, metric: str = "consensus_residual"
    ) -> Optional[int]:
        """First t >= 1 whose ``metric`` is at or below ``threshold``."""
        for record in self.records[1:]:
            value = getattr(record, metric)
            if value is not None and not math.isnan(value) and value <= threshold:
                return record.t
        return None

    def crossings(self, thresholds: list[float]) -> dict[str, Optional[int]]:
        return {format_float(thr): self.first_crossing(thr) for thr in thresholds}

    def write_csv(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            writer.writerows(record.to_row() for record in self.records)
        return path

    @classmethod
    def read_csv(cls, path: str | Path, variant: str | None = None) -> RunTrace:
        path = Path(path)
        try:
            with path.open(newline="", encoding="utf-8") as fh:
                reader = csv.DictReader(fh)
                if tuple(reader.fieldnames or ()) != CSV_HEADER:
                    raise InputError(f"{path} is not a trace file: header {reader.fieldnames}")
                records = [DiagnosticsRecord.from_row(row) for row in reader]
        except (OSError, KeyError, ValueError) as e:
            if isinstance(e, InputError):
                raise
            raise InputError(f"cannot read trace {path}: {e}") from e
        return cls(variant=variant or path.stem, records=records)
