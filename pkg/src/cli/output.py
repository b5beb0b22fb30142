# src/cli/output.py
from __future__ import annotations

import csv
import json
import math
from typing import Any, Callable, Dict, Optional, Sequence, TextIO

FloatFormat = Callable[[float], str]

FORMATS = ("csv", "json")


def cell(value: Any, float_format: Optional[FloatFormat] = None) -> str:
    """CSV text for one value. Floats use repr so parsing gives back the same float."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if float_format is not None and math.isfinite(value):
            return float_format(value)
        return repr(value)
    return str(value)


def _json_value(value: Any, float_format: Optional[FloatFormat]) -> Any:
    if isinstance(value, float):
        if not math.isfinite(value):
            return None
        if float_format is not None:
            return float(float_format(value))
    return value


def write_rows(
    rows: Sequence[Dict[str, Any]],
    columns: Sequence[str],
    fmt: str,
    stream: TextIO,
    float_format: Optional[FloatFormat] = None,
) -> None:
    """Header always emitted for CSV; JSON is a list of objects in column order."""
    if fmt == "csv":
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([cell(r.get(c), float_format) for c in columns])
    elif fmt == "json":
        payload = [{c: _json_value(r.get(c), float_format) for c in columns} for r in rows]
        json.dump(payload, stream, indent=2)
        stream.write("\n")
    else:
        raise ValueError(f"unknown output format {fmt!r} (use csv or json)")
