"""Deterministic report artifacts: canonical JSON, CSV tables, plot text.

Reports are plain dicts with a conventional shape:

    {"check": str, "params": {...}, "rows": [row, ...],
     "passed": bool | None, "details": {...}}

where each row is {"parameter": number | str, "value": complex-ish,
"stderr": float}.  Serialization is byte-deterministic for a fixed report:
keys sorted, no timestamps, shortest-repr floats, complex values encoded as
[re, im] pairs.
"""

from __future__ import annotations

import csv
import io
import json
import os

import numpy as np

from .errors import UsageError
from .montecarlo import CheckReport, MCEstimate


def to_jsonable(x):
    """Recursively convert numpy/complex/report objects to JSON types."""
    if isinstance(x, (bool, int, str)) or x is None:
        return x
    if isinstance(x, float):
        if not np.isfinite(x):
            raise UsageError(f"cannot serialize non-finite value {x}")
        return x
    if isinstance(x, complex):
        return [to_jsonable(x.real), to_jsonable(x.imag)]
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return to_jsonable(float(x))
    if isinstance(x, np.complexfloating):
        return to_jsonable(complex(x))
    if isinstance(x, np.ndarray):
        return [to_jsonable(v) for v in x.tolist()]
    if isinstance(x, MCEstimate):
        return {"mean": to_jsonable(x.mean), "stderr": to_jsonable(x.stderr),
                "n": int(x.n), "seed": int(x.seed)}
    if isinstance(x, CheckReport):
        return {"check": x.check, "lhs": to_jsonable(x.lhs),
                "rhs": to_jsonable(x.rhs), "stderr": to_jsonable(x.stderr),
                "passed": bool(x.passed), "n": int(x.n), "seed": int(x.seed),
                "details": to_jsonable(x.details)}
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    raise UsageError(f"cannot serialize {type(x).__name__} into a report")


def estimate_row(parameter, value, stderr: float = 0.0) -> dict:
    return {"parameter": parameter, "value": value, "stderr": float(stderr)}


def report_json_bytes(report: dict) -> bytes:
    text = json.dumps(to_jsonable(report), sort_keys=True, indent=2)
    return (text + "\n").encode("utf-8")


def _row_fields(row) -> tuple:
    value = row.get("value", 0.0)
    if isinstance(value, (list, tuple)):
        re, im = float(value[0]), float(value[1])
    else:
        value = complex(value)
        re, im = value.real, value.imag
    return row.get("parameter", ""), re, im, float(row.get("stderr", 0.0))


def report_csv_bytes(report: dict) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["parameter", "value_re", "value_im", "stderr"])
    for row in report.get("rows", []):
        p, re, im, se = _row_fields(row)
        writer.writerow([p, repr(re), repr(im), repr(se)])
    return buf.getvalue().encode("utf-8")


def report_plot(report: dict) -> str:
    """Plot-ready text: parameter, value and stderr columns.

    Non-numeric parameters are replaced by the row index (the label moves
    into a comment); the value column is the real part.
    """
    if not report.get("rows") and not report.get("check"):
        return ""
    lines = [f"# {report.get('check', 'report')}",
             "# columns: parameter  value(re)  stderr"]
    for i, row in enumerate(report.get("rows", [])):
        p, re, _, se = _row_fields(row)
        if isinstance(p, (int, float)) and not isinstance(p, bool):
            x = float(p)
        else:
            x = float(i)
            lines.append(f"# row {i}: {p}")
        lines.append(f"{x:.17g} {re:.17g} {se:.17g}")
    return "\n".join(lines) + "\n"


def write_artifacts(report: dict, out_dir: str, name: str) -> dict:
    """Write {name}.json/.csv/.dat under out_dir; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {}
    for ext, data in (("json", report_json_bytes(report)),
                      ("csv", report_csv_bytes(report)),
                      ("dat", report_plot(report).encode("utf-8"))):
        path = os.path.join(out_dir, f"{name}.{ext}")
        with open(path, "wb") as fh:
            fh.write(data)
        paths[ext] = path
    return paths
