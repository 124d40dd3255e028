"""CSV and JSON writers with deterministic bytes.

CSV files start with a '# schema=<name>/v1' line, then a header row.
Floats use '%.17g' so they round-trip exactly. JSON is written with
sorted keys and numpy values converted to plain Python.
"""

from __future__ import annotations

import dataclasses
import json
import math
from collections.abc import Iterable, Sequence
from pathlib import Path

import numpy as np

SCHEMA_VERSION = "v1"


def format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % float(value)
    return str(value)


def write_csv(
    path: Path, schema: str, header: Sequence[str], rows: Iterable[Sequence]
) -> Path:
    """Write a versioned CSV table; returns the path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# schema={schema}/{SCHEMA_VERSION}", ",".join(header)]
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"row has {len(row)} fields, header has {len(header)}")
        lines.append(",".join(format_value(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_csv(path: Path) -> tuple[str, list[str], list[list[str]]]:
    """Read a table written by write_csv: (schema, header, rows as strings)."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    schema = lines[0].removeprefix("# schema=")
    header = lines[1].split(",")
    return schema, header, [line.split(",") for line in lines[2:]]


def to_jsonable(value):
    """Recursively convert numpy scalars/arrays, tuples and non-finite floats."""
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return to_jsonable(
            {f.name: getattr(value, f.name) for f in dataclasses.fields(value)}
        )
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    return value


def write_json(path: Path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(to_jsonable(obj), sort_keys=True, indent=2)
    path.write_text(text + "\n", encoding="utf-8")
    return path
