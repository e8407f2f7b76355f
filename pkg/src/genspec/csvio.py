"""Self-describing CSV tables: ``#`` metadata lines, one header line, rows.

Floats are written with ``repr`` (shortest round-trip form), so identical
inputs always give byte-identical files.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

from genspec.model import STATE_NAMES, Params

EQUILIBRIA_COLUMNS = ("name", *STATE_NAMES, "feasible", "residual")
REPORT_COLUMNS = ("name", *(f"re{i}" for i in range(1, 8)), *(f"im{i}" for i in range(1, 8)), "classification")
CURVE_COLUMNS = ("label", "alpha", "alpha_s")
TRAJECTORY_COLUMNS = ("t", *STATE_NAMES)
CLASSIFICATION_COLUMNS = ("alpha", "alpha_s", "zs0", "z0", "kind", "target", "metrics")
MAP_COLUMNS = ("alpha", "alpha_s", "attractor", "probability")
LLE_COLUMNS = ("alpha", "alpha_s", "lle", "converged")


def sweep_columns(axis: str) -> tuple[str, ...]:
    return (axis, "equilibrium", "norm", "stable", "po_max", "po_min")


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return repr(value)
    if hasattr(value, "item"):  # numpy scalar
        return fmt(value.item())
    return str(value)


def format_metrics(metrics: dict) -> str:
    """``key=value`` pairs joined by ``;`` in sorted key order."""
    return ";".join(f"{k}={fmt(metrics[k])}" for k in sorted(metrics))


@dataclass
class Table:
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)
    meta: list[tuple[str, object]] = field(default_factory=list)

    def add_params(self, p: Params) -> Table:
        self.meta.extend(p.as_dict().items())
        return self

    def render(self) -> str:
        buf = io.StringIO()
        for key, value in self.meta:
            buf.write(f"# {key}={fmt(value)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError(f"row has {len(row)} fields, expected {len(self.columns)}")
            w.writerow([fmt(v) for v in row])
        return buf.getvalue()

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.render())


def read_table(source: str | Path) -> Table:
    """Parse text written by :meth:`Table.render` (values stay strings)."""
    text = Path(source).read_text() if isinstance(source, Path) else source
    meta, body = [], []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            meta.append((key, value))
        elif line:
            body.append(line)
    rows = list(csv.reader(body))
    if not rows:
        raise ValueError("table has no header line")
    return Table(tuple(rows[0]), [tuple(r) for r in rows[1:]], meta)
