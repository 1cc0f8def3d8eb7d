"""Deterministic text output: JSON and CSV with round-trip-exact doubles."""

from __future__ import annotations

import csv
import io
import json
import math

SCHEMA_VERSION = "1.0"


def format_float(value: float) -> str:
    """17 significant digits, which round-trips every double."""
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"non-finite value {value!r} cannot be written")
    return "%.17g" % (value + 0.0)  # folds -0.0 into 0


def to_json(obj, indent: int | None = 2, _level: int = 0) -> str:
    """Serialize dicts/lists/scalars with a fixed layout.

    Floats go through :func:`format_float`; key order is insertion order, so
    equal inputs always produce identical bytes. ``indent=None`` gives a
    single line.
    """
    if indent is None:
        return _compact(obj)
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {to_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(to_json(v) for v in obj) + "]"
        items = [pad + to_json(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if hasattr(obj, "item"):  # numpy scalar
        return to_json(obj.item(), indent, _level)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _compact(obj) -> str:
    if isinstance(obj, dict):
        return "{" + ",".join(f"{json.dumps(str(k))}:{_compact(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_compact(v) for v in obj) + "]"
    return to_json(obj)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float) or hasattr(value, "item") and isinstance(value.item(), float):
        return format_float(value)
    return str(value)


def to_csv(header: list[str], rows, meta: dict | None = None) -> str:
    """CSV text; ``meta`` becomes leading ``#`` comment lines (one JSON value each)."""
    buf = io.StringIO()
    if meta:
        for key, value in meta.items():
            buf.write(f"# {key}: {to_json(value, indent=None)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()
