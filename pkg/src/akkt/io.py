"""Trace and report files.

Numbers are written with 17 significant digits; non-finite values become
the strings ``"inf"``, ``"-inf"`` and ``"nan"``.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .alm import AlmTrace

TRACE_KEYS = ("k", "rho", "v", "eps_residual", "r_residual", "feasibility",
              "multiplier_norm", "inner_iters", "safeguard_active")


def _num(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def dumps(obj) -> str:
    """JSON text with every float rendered as %.17g."""
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _restore(obj):
    if isinstance(obj, str) and obj in ("inf", "-inf", "nan"):
        return float(obj)
    if isinstance(obj, list):
        return [_restore(v) for v in obj]
    if isinstance(obj, dict):
        return {k: _restore(v) for k, v in obj.items()}
    return obj


def loads(text: str):
    return _restore(json.loads(text))


def trace_lines(trace: AlmTrace, with_iterates: bool = True):
    for row in trace.rows:
        d = row.flat()
        if with_iterates:
            d["x"] = row.record.x
            d["lambda"] = row.record.lam
        yield dumps(d)


def write_trace(trace: AlmTrace, path, with_iterates: bool = True) -> Path:
    path = Path(path)
    with path.open("w") as fh:
        for line in trace_lines(trace, with_iterates):
            fh.write(line + "\n")
    return path


def read_trace(path) -> list[dict]:
    rows = []
    for line in Path(path).read_text().splitlines():
        if line.strip():
            row = loads(line)
            for key in ("x", "lambda"):
                if key in row:
                    row[key] = np.asarray(row[key], dtype=float)
            rows.append(row)
    return rows


def write_json(obj, path) -> Path:
    path = Path(path)
    path.write_text(dumps(obj) + "\n")
    return path


def read_json(path):
    return loads(Path(path).read_text())
