"""Reading and writing point sequences.

CSV is one ``x,y`` pair per line, no header, ``.`` as decimal separator.
JSON is an array of ``[x, y]`` arrays.  Values are written with ``repr``
so every double survives a round trip unchanged.
"""

from __future__ import annotations

import io
import json
from pathlib import Path

import numpy as np

from .core import InvalidInputError, PointSeq

FORMATS = ("csv", "json")


def guess_format(path: str | Path) -> str:
    return "json" if str(path).lower().endswith(".json") else "csv"


def parse_csv(text: str) -> np.ndarray:
    rows = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        line = line.strip()
        if not line:
            continue
        fields = line.split(",")
        if len(fields) != 2:
            raise InvalidInputError(f"line {lineno}: expected 'x,y', got {line!r}")
        try:
            rows.append((float(fields[0]), float(fields[1])))
        except ValueError:
            raise InvalidInputError(f"line {lineno}: not a number in {line!r}") from None
    return np.array(rows, dtype=np.float64).reshape(-1, 2)


def parse_json(text: str) -> np.ndarray:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise InvalidInputError(f"invalid JSON: {e}") from None
    if not isinstance(data, list):
        raise InvalidInputError("expected a JSON array of [x, y] pairs")
    rows = []
    for i, item in enumerate(data):
        if not (isinstance(item, list) and len(item) == 2 and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in item)):
            raise InvalidInputError(f"element {i}: expected [x, y], got {item!r}")
        rows.append((float(item[0]), float(item[1])))
    return np.array(rows, dtype=np.float64).reshape(-1, 2)


def parse_points(text: str, fmt: str = "csv", role: str = "") -> PointSeq:
    xy = parse_json(text) if fmt == "json" else parse_csv(text)
    return PointSeq(xy, role)


def read_points(path: str | Path, fmt: str | None = None, role: str = "") -> PointSeq:
    fmt = fmt or guess_format(path)
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InvalidInputError(f"cannot read {path}: {e.strerror}") from None
    return parse_points(text, fmt, role)


def format_points(points, fmt: str = "csv") -> str:
    xy = points.xy if isinstance(points, PointSeq) else np.asarray(points, dtype=np.float64)
    if fmt == "json":
        return json.dumps([[float(x), float(y)] for x, y in xy]) + "\n"
    buf = io.StringIO()
    for x, y in xy:
        buf.write(f"{float(x)!r},{float(y)!r}\n")
    return buf.getvalue()


def write_points(path: str | Path, points, fmt: str | None = None) -> None:
    fmt = fmt or guess_format(path)
    Path(path).write_text(format_points(points, fmt), encoding="utf-8", newline="\n")
