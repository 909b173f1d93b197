"""Tabular results and their CSV/JSON serialization."""

from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__


@dataclass
class Table:
    name: str
    columns: list[str]
    rows: list = field(default_factory=list)
    params: dict = field(default_factory=dict)

    def add(self, *values):
        if len(values) != len(self.columns):
            raise ValueError(f"row has {len(values)} values, expected {len(self.columns)}")
        self.rows.append(tuple(values))

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows])


def _cell(x):
    if isinstance(x, (bool, np.bool_)):
        return int(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        # repr is the shortest string that round-trips the double exactly
        return repr(float(x))
    return str(x)


def _json_value(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, (list, tuple)):
        return [_json_value(v) for v in x]
    return str(x)


def _header(table: Table, timestamp: bool) -> dict:
    head = {"table": table.name, "version": __version__}
    head.update(table.params)
    if timestamp:
        head["generated"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return head


def to_csv(table: Table, timestamp: bool = True) -> str:
    buf = io.StringIO()
    for key, value in _header(table, timestamp).items():
        if isinstance(value, (list, tuple)):
            value = " ".join(_cell(v) for v in value)
        buf.write(f"# {key}={_cell(value)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def to_json(table: Table, timestamp: bool = True) -> str:
    doc = {
        "parameters": {k: _json_value(v) for k, v in _header(table, timestamp).items()},
        "columns": table.columns,
        "rows": [[_json_value(v) for v in row] for row in table.rows],
    }
    return json.dumps(doc, indent=1) + "\n"


def render(table: Table, fmt: str = "csv", timestamp: bool = True) -> str:
    if fmt == "csv":
        return to_csv(table, timestamp)
    if fmt == "json":
        return to_json(table, timestamp)
    raise ValueError(f"unknown format {fmt!r}")


def read_csv(text: str) -> Table:
    """Parse text produced by :func:`to_csv` (values stay strings)."""
    params = {}
    lines = text.splitlines()
    body = []
    for line in lines:
        if line.startswith("# "):
            key, _, value = line[2:].partition("=")
            params[key] = value
        else:
            body.append(line)
    reader = csv.reader(body)
    columns = next(reader)
    return Table(params.get("table", ""), columns, [tuple(r) for r in reader], params)
