"""Deterministic report serialization.

Reports must be byte-identical across runs with the same configuration, so
floats are printed with a fixed 17-significant-digit format, object keys are
emitted sorted, and arrays keep row-major point order.  The standard json
module is only used for string escaping; numbers go through the fixed
formatter.
"""

from __future__ import annotations

import dataclasses
import json
import math

import numpy as np

__all__ = [
    "ReportError",
    "build_report",
    "classification_csv",
    "format_float",
    "render_json",
    "to_jsonable",
    "trajectory_csv",
]


class ReportError(ValueError):
    """A value that cannot be represented in a deterministic report."""


def format_float(x: float) -> str:
    if not math.isfinite(x):
        raise ReportError(f"non-finite value {x!r} in report")
    return f"{x:.17g}"


def to_jsonable(obj):
    """Rewrite numpy containers, dataclasses and tuples into plain types."""
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name))
                for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    return obj


def render_json(value) -> str:
    """Serialize with sorted keys and fixed float formatting."""
    value = to_jsonable(value)
    parts: list[str] = []
    _render(value, parts)
    return "".join(parts)


def _render(value, parts: list[str]) -> None:
    if value is None:
        parts.append("null")
    elif value is True:
        parts.append("true")
    elif value is False:
        parts.append("false")
    elif isinstance(value, int):
        parts.append(str(value))
    elif isinstance(value, float):
        parts.append(format_float(value))
    elif isinstance(value, str):
        parts.append(json.dumps(value, ensure_ascii=True))
    elif isinstance(value, dict):
        parts.append("{")
        for i, key in enumerate(sorted(value)):
            if not isinstance(key, str):
                raise ReportError(f"non-string key {key!r}")
            if i:
                parts.append(", ")
            parts.append(json.dumps(key, ensure_ascii=True))
            parts.append(": ")
            _render(value[key], parts)
        parts.append("}")
    elif isinstance(value, list):
        parts.append("[")
        for i, item in enumerate(value):
            if i:
                parts.append(", ")
            _render(item, parts)
        parts.append("]")
    else:
        raise ReportError(f"cannot serialize {type(value).__name__}")


def build_report(command: str, config: dict, results: dict,
                 residual_maxima: dict, verdict: str | None = None) -> dict:
    payload = {
        "schema": 1,
        "command": command,
        "config": config,
        "results": results,
        "residual_maxima": residual_maxima,
        "runtime_ms": None,
    }
    if verdict is not None:
        payload["verdict"] = verdict
    return payload


def _csv_cell(value) -> str:
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def classification_csv(points) -> str:
    """Per-point dump of a classification sweep, one row per grid point."""
    points = list(points)
    nl = len(points[0].landsberg) if points else 2
    header = ["r", "s", "phi", "riemann", "berwald_1", "berwald_2"]
    header += [f"landsberg_{i + 1}" for i in range(nl)]
    header += ["margin1", "margin2", "spray_denominator"]
    lines = [",".join(header)]
    for pt in points:
        row = [pt.r, pt.s, pt.phi, pt.riemann, *pt.berwald, *pt.landsberg,
               pt.margin1, pt.margin2, pt.spray_denominator]
        lines.append(",".join(_csv_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def trajectory_csv(tr) -> str:
    """Per-step dump of a trajectory: time, position, velocity, F."""
    n = tr.x.shape[1]
    header = ["t"] + [f"x{i + 1}" for i in range(n)]
    header += [f"y{i + 1}" for i in range(n)] + ["F"]
    lines = [",".join(header)]
    for k in range(len(tr.t)):
        row = [tr.t[k], *tr.x[k], *tr.y[k], tr.F[k]]
        lines.append(",".join(_csv_cell(v) for v in row))
    return "\n".join(lines) + "\n"
