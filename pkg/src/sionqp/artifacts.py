"""CSV and JSON output shared by the solvers and the command line."""
from __future__ import annotations

import csv
import io
import json
import os

import numpy as np

FLOAT_FMT = "{:.16e}"  # 17 significant digits, round-trips a double


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return FLOAT_FMT.format(float(v))
    return str(v)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def read_csv(text: str):
    """Header and rows with numeric fields parsed to float."""
    rows = list(csv.reader(io.StringIO(text)))
    out = []
    for r in rows[1:]:
        vals = []
        for v in r:
            try:
                vals.append(float(v))
            except ValueError:
                vals.append(v)
        out.append(vals)
    return rows[0], out


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return [to_jsonable(v) for v in obj]
        return obj.tolist()
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        obj = float(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return None if np.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def write_text(path, text: str) -> str:
    d = os.path.dirname(str(path))
    if d:
        os.makedirs(d, exist_ok=True)
    with open(path, "w", newline="") as f:
        f.write(text)
    return str(path)


def write_json(path, obj) -> str:
    return write_text(path, json.dumps(to_jsonable(obj), indent=1, sort_keys=True) + "\n")
