"""Tabular export with a provenance header, as CSV or JSON.

Floats are written with ``repr`` (shortest round-trip decimal), so both
formats re-import bit-exactly.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

__all__ = ["ExportTable", "read_table"]


def _cell(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_cell(text: str):
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def _json_value(value):
    # JSON has no inf/nan; encode them as strings.
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value


def _from_json_value(value):
    if value in ("inf", "-inf", "nan"):
        return float(value)
    return value


@dataclass
class ExportTable:
    """Rectangular table with column names, a units row and provenance."""

    columns: list[str]
    units: list[str]
    rows: list[list] = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.columns:
            raise ValueError("a table needs at least one column")
        if len(self.units) != len(self.columns):
            raise ValueError("units row must match the columns")
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError("rows must have one value per column")

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [row[i] for row in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        for key, value in self.provenance.items():
            buf.write(f"# {key}: {json.dumps(value, sort_keys=True)}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        writer.writerow(self.units)
        for row in self.rows:
            writer.writerow([_cell(v) for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "provenance": self.provenance,
            "columns": self.columns,
            "units": self.units,
            "rows": [[_json_value(v) for v in row] for row in self.rows],
        }
        return json.dumps(doc, indent=1, sort_keys=True)

    def render(self, fmt: str) -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json":
            return self.to_json()
        raise ValueError(f"unknown format {fmt!r}")

    @classmethod
    def from_csv(cls, text: str) -> "ExportTable":
        provenance = {}
        body = []
        for line in text.splitlines():
            if line.startswith("# "):
                key, _, value = line[2:].partition(": ")
                provenance[key] = json.loads(value)
            elif line:
                body.append(line)
        reader = list(csv.reader(body))
        columns, units, data = reader[0], reader[1], reader[2:]
        return cls(columns, units, [[_parse_cell(c) for c in row] for row in data], provenance)

    @classmethod
    def from_json(cls, text: str) -> "ExportTable":
        doc = json.loads(text)
        rows = [[_from_json_value(v) for v in row] for row in doc["rows"]]
        return cls(doc["columns"], doc["units"], rows, doc["provenance"])


def read_table(path: str) -> ExportTable:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        return ExportTable.from_json(text)
    return ExportTable.from_csv(text)
