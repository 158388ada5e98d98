"""CSV / JSON serialization of report lists.

CSV layout: one header row, then one row per report in input order.
Complex fields become two columns ``<name>_re`` and ``<name>_im``; list
fields are stored as JSON text; floats use 17 significant digits so that
reloading reproduces them bit for bit.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

__all__ = ["emit_table", "read_csv", "read_json", "to_jsonable"]


def to_jsonable(value):
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, dict):
        return {k: to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if hasattr(value, "item") and not isinstance(value, (str, bytes)):
        return to_jsonable(value.item())
    return value


def _fmt(x):
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        if math.isnan(x) or math.isinf(x):
            return json.dumps(x)
        return format(x, ".17g")
    if isinstance(x, (list, tuple, dict)):
        return json.dumps(to_jsonable(x))
    return str(x)


def _flatten(row: dict):
    flat = {}
    for key, value in row.items():
        if hasattr(value, "item") and not isinstance(value, (str, bytes)):
            value = value.item()
        if isinstance(value, complex):
            flat[f"{key}_re"] = _fmt(value.real)
            flat[f"{key}_im"] = _fmt(value.imag)
        else:
            flat[key] = _fmt(value)
    return flat


def emit_table(reports, fmt, path=None):
    """Write ``reports`` (all of one type, each with ``to_dict``) as CSV or JSON.

    Returns the text; also writes it to ``path`` when given.
    """
    reports = list(reports)
    kinds = {type(r) for r in reports}
    if len(kinds) > 1:
        raise TypeError(f"mixed report types: {sorted(k.__name__ for k in kinds)}")
    rows = [r.to_dict() for r in reports]
    if fmt == "json":
        text = json.dumps(to_jsonable(rows), indent=2) + "\n"
    elif fmt == "csv":
        flat = [_flatten(row) for row in rows]
        buf = io.StringIO()
        if flat:
            writer = csv.DictWriter(buf, fieldnames=list(flat[0]), lineterminator="\n")
            writer.writeheader()
            writer.writerows(flat)
        text = buf.getvalue()
    else:
        raise ValueError(f"unknown table format {fmt!r}")
    if path is not None:
        Path(path).write_text(text)
    return text


def _parse_cell(text):
    try:
        return json.loads(text)
    except ValueError:
        return text


def read_csv(path):
    """Reload a table written by :func:`emit_table`; complex columns are re-paired."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        out = []
        for raw in reader:
            row = {}
            for key, text in raw.items():
                if key.endswith("_im") and key[:-3] + "_re" in raw:
                    continue
                if key.endswith("_re") and key[:-3] + "_im" in raw:
                    base = key[:-3]
                    row[base] = complex(float(text), float(raw[base + "_im"]))
                else:
                    row[key] = _parse_cell(text)
            out.append(row)
    return out


def read_json(path):
    return json.loads(Path(path).read_text())
