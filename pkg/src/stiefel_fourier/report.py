"""Report emitters: aligned text tables, CSV and versioned JSON.

A report is a command name, a list of flat row dicts and an optional flat
summary dict.  Cell values are ``str``, ``int``, ``float``, ``bool`` or
``None``; lists of strings are allowed in JSON and joined with `` | `` in the
other formats.  Floats carry 17 significant digits in CSV and JSON so the
machine formats round-trip exactly.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from importlib import resources

SCHEMA_VERSION = 1
_JOIN = " | "


@dataclass
class Report:
    command: str
    rows: list
    summary: dict = field(default_factory=dict)


def _num(x):
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        if not math.isfinite(x):
            return repr(x)
        text = "%.17g" % x
        # keep floats distinguishable from ints after a round trip
        return text if any(c in text for c in ".e") else text + ".0"
    return str(x)


def _cell_text(x, digits=None):
    if x is None:
        return ""
    if isinstance(x, (list, tuple)):
        return _JOIN.join(map(str, x))
    if digits is not None and isinstance(x, float) and not isinstance(x, bool):
        return f"{x:.{digits}g}"
    return _num(x) if isinstance(x, (bool, int, float)) else str(x)


def _columns(rows):
    cols = []
    for row in rows:
        for key in row:
            if key not in cols:
                cols.append(key)
    return cols


def to_table(report, digits=12):
    out = []
    if report.rows:
        cols = _columns(report.rows)
        cells = [[_cell_text(r.get(c), digits) for c in cols] for r in report.rows]
        widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
        out.append("  ".join(c.ljust(w) for c, w in zip(cols, widths)).rstrip())
        out.append("  ".join("-" * w for w in widths))
        out.extend("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() for row in cells)
    for key, val in report.summary.items():
        out.append(f"{key}: {_cell_text(val, digits)}")
    return "\n".join(out) + "\n"


def to_csv(report):
    buf = io.StringIO()
    cols = _columns(report.rows)
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for row in report.rows:
        writer.writerow([_cell_text(row.get(c)) for c in cols])
    return buf.getvalue()


def _parse_cell(text):
    if text == "":
        return None
    if text in ("true", "false"):
        return text == "true"
    for kind in (int, float):
        try:
            return kind(text)
        except ValueError:
            pass
    return text


def parse_csv(text):
    """Inverse of :func:`to_csv` for scalar cells; blank cells come back as ``None``."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None:
        return []
    rows = []
    for rec in reader:
        rows.append({k: _parse_cell(v) for k, v in zip(header, rec)})
    return rows


def _dump(x):
    if x is None:
        return "null"
    if isinstance(x, float):
        return _num(x) if math.isfinite(x) else "null"
    if isinstance(x, (bool, int)):
        return _num(x)
    if isinstance(x, str):
        return json.dumps(x, ensure_ascii=False)
    if isinstance(x, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_dump(v)}" for k, v in x.items()) + "}"
    if isinstance(x, (list, tuple)):
        return "[" + ", ".join(_dump(v) for v in x) + "]"
    raise TypeError(f"cannot serialize {type(x).__name__}")


def to_json(report):
    doc = {"schema": SCHEMA_VERSION, "command": report.command, "rows": report.rows, "summary": report.summary}
    return _dump(doc) + "\n"


def load_schema():
    text = resources.files("stiefel_fourier").joinpath("report.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def render(report, fmt):
    if fmt == "csv":
        return to_csv(report)
    if fmt == "json":
        return to_json(report)
    return to_table(report)
