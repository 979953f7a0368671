"""Result records: JSON-lines persistence and CSV flattening.

One :class:`ResultRecord` is one measured metric.  A record carries the
full resolved parameter set of the experiment that produced it, so it can
be regenerated from the line alone.  Timing is informational only and is
excluded from identity comparisons (everything else must reproduce
bit-for-bit under the same seed).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, asdict

# fixed CSV column order; ``coords`` keys are flattened into their own columns
CSV_COLUMNS = [
    "experiment",
    "metric",
    "p",
    "q",
    "t",
    "eps",
    "side",
    "sign",
    "theta_index",
    "angle_count",
    "estimate",
    "stderr",
    "ci_low",
    "ci_high",
    "samples",
    "seed",
    "passed",
    "wall_time_ms",
    "params",
]
_COORD_KEYS = ("p", "q", "t", "eps", "side", "sign", "theta_index", "angle_count")


@dataclass(frozen=True)
class ResultRecord:
    experiment: str
    metric: str
    estimate: float
    samples: int
    seed: int
    params: dict = field(default_factory=dict)
    coords: dict = field(default_factory=dict)
    stderr: float | None = None
    ci_low: float | None = None
    ci_high: float | None = None
    passed: bool | None = None
    wall_time_ms: float = 0.0

    def to_line(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, allow_nan=True)

    def identity_line(self) -> str:
        """Serialized form with the timing field zeroed, for byte comparisons."""
        d = asdict(self)
        d["wall_time_ms"] = 0.0
        return json.dumps(d, sort_keys=True, allow_nan=True)

    @staticmethod
    def from_line(line: str) -> "ResultRecord":
        try:
            d = json.loads(line)
        except json.JSONDecodeError as exc:
            raise RecordFormatError(f"not a JSON record: {exc}") from exc
        try:
            return ResultRecord(
                experiment=d["experiment"],
                metric=d["metric"],
                estimate=d["estimate"],
                samples=d["samples"],
                seed=d["seed"],
                params=d["params"],
                coords=d["coords"],
                stderr=d.get("stderr"),
                ci_low=d.get("ci_low"),
                ci_high=d.get("ci_high"),
                passed=d.get("passed"),
                wall_time_ms=d.get("wall_time_ms", 0.0),
            )
        except (KeyError, TypeError) as exc:
            raise RecordFormatError(f"record is missing field {exc}") from exc


class RecordFormatError(ValueError):
    """Record line does not match the expected schema."""


def write_records(records, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(rec.to_line() + "\n")


def read_records(path: str) -> list[ResultRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(ResultRecord.from_line(line))
    return out


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)  # shortest round-trip decimal
    return str(value)


def export_csv(records, path: str) -> None:
    """Flatten records to CSV in the fixed :data:`CSV_COLUMNS` order."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for rec in records:
            row = []
            for col in CSV_COLUMNS:
                if col in _COORD_KEYS:
                    row.append(_format_cell(rec.coords.get(col)))
                elif col == "params":
                    row.append(json.dumps(rec.params, sort_keys=True))
                else:
                    row.append(_format_cell(getattr(rec, col)))
            writer.writerow(row)


def _parse_cell(text: str):
    if text == "":
        return None
    if text == "true":
        return True
    if text == "false":
        return False
    try:
        as_float = float(text)
    except ValueError:
        return text
    if text.lstrip("+-").isdigit():
        return int(text)
    return as_float


def import_csv(path: str) -> list[ResultRecord]:
    """Reverse of :func:`export_csv`; numeric fields round-trip exactly."""
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != CSV_COLUMNS:
            raise RecordFormatError("unexpected CSV header")
        for row in reader:
            cells = dict(zip(CSV_COLUMNS, row))
            coords = {k: _parse_cell(cells[k]) for k in _COORD_KEYS if cells[k] != ""}
            out.append(
                ResultRecord(
                    experiment=cells["experiment"],
                    metric=cells["metric"],
                    estimate=float(cells["estimate"]),
                    samples=int(cells["samples"]),
                    seed=int(cells["seed"]),
                    params=json.loads(cells["params"]),
                    coords=coords,
                    stderr=None if cells["stderr"] == "" else float(cells["stderr"]),
                    ci_low=None if cells["ci_low"] == "" else float(cells["ci_low"]),
                    ci_high=None if cells["ci_high"] == "" else float(cells["ci_high"]),
                    passed=_parse_cell(cells["passed"]),
                    wall_time_ms=float(cells["wall_time_ms"]),
                )
            )
    return out
