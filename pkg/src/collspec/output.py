"""Deterministic CSV/JSON writers.

Floats are written with ``repr`` (shortest round-trip form), keys in fixed
order, and no timestamps, so identical inputs give identical bytes.
"""

import json
import math
import os

import numpy as np

from . import __version__

TOOL = "collspec"


def fmt(x):
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {x!r} in output")
    return repr(x)


def header_lines(meta):
    lines = [f"# {TOOL} {__version__}"]
    lines += [f"# {k}={meta[k]}" for k in meta]
    return lines


def _to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def dumps_json(payload, meta):
    doc = {"meta": {"tool": TOOL, "version": __version__, **meta}}
    doc.update(_to_jsonable(payload))
    return json.dumps(doc, indent=2, sort_keys=False, allow_nan=False) + "\n"


def write_text(path, text):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
    return path


def write_json(path, payload, meta):
    return write_text(path, dumps_json(payload, meta))


def columns_csv(columns, names, meta):
    lines = header_lines(meta)
    lines.append(",".join(names))
    for row in zip(*columns):
        lines.append(",".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def write_series(out_dir, stem, columns, names, meta, fmt_kind="csv"):
    """Write named columns as ``stem.csv`` or ``stem.json``."""
    if fmt_kind == "csv":
        return write_text(os.path.join(out_dir, stem + ".csv"), columns_csv(columns, names, meta))
    payload = {name: [float(v) for v in col] for name, col in zip(names, columns)}
    return write_json(os.path.join(out_dir, stem + ".json"), payload, meta)


def read_csv_columns(path):
    """Inverse of :func:`columns_csv`: ``(meta, names, columns)``."""
    meta, names, rows = {}, None, []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    k, v = body.split("=", 1)
                    meta[k] = v
                continue
            if names is None:
                names = line.split(",")
                continue
            rows.append([float(v) for v in line.split(",")])
    cols = [np.array(c) for c in zip(*rows)] if rows else [np.zeros(0) for _ in names or []]
    return meta, names, cols
