"""Serialization of experiment and verification reports.

JSON output is the report as nested objects with a fixed key order.  CSV
output flattens it: one ``trial`` row per (method, m, trial) followed by
one ``aggregate`` row per (method, m).  Columns that do not apply to a row
are left empty.  Both formats start with the schema version (a
``schema_version`` key, or a ``# schema_version=N`` comment line).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import is_dataclass
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1

CSV_COLUMNS = ("record", "method", "m", "trial", "error", "error_std", "nll", "nll_std", "value", "trials")

_REPORT_ORDER = ("mode", "dataset", "config", "full", "trials", "aggregates", "runtime")


def _plain(obj):
    """Recursively convert to JSON-ready builtins, keeping key order."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def report_record(report) -> dict:
    """Ordered dict form of a report with the schema version first."""
    if is_dataclass(report):
        body = {key: getattr(report, key) for key in _REPORT_ORDER if hasattr(report, key)}
        if body.get("runtime") is None:
            body.pop("runtime", None)
    elif isinstance(report, dict):
        body = dict(report)
    elif isinstance(report, list):
        body = {"records": report}
    else:
        raise TypeError(f"cannot serialize {type(report).__name__}")
    return {"schema_version": SCHEMA_VERSION, **_plain(body)}


def to_json(report) -> str:
    return json.dumps(report_record(report), indent=2, allow_nan=False) + "\n"


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def to_csv(report) -> str:
    rec = report_record(report)
    buf = io.StringIO()
    buf.write(f"# schema_version={SCHEMA_VERSION}\n")
    if "trials" not in rec:
        # verification records: one row each, union of keys in first-seen order
        rows = rec.get("records", [rec])
        cols = []
        for row in rows:
            for key in row:
                if key not in cols:
                    cols.append(key)
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(cols)
        for row in rows:
            writer.writerow([_cell(row.get(c)) if not isinstance(row.get(c), (list, dict))
                             else json.dumps(row.get(c)) for c in cols])
        return buf.getvalue()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rec["trials"]:
        writer.writerow([_cell(x) for x in ("trial", row["method"], row["m"], row["trial"], row["error"],
                                            None, row.get("nll"), None, row.get("value"), None)])
    for agg in rec["aggregates"]:
        writer.writerow([_cell(x) for x in ("aggregate", agg["method"], agg["m"], None,
                                            agg.get("mean_error"), agg.get("std_error"),
                                            agg.get("mean_nll"), agg.get("std_nll"), None, agg["trials"])])
    return buf.getvalue()


def emit_report(report, path, format: str = "json") -> Path:
    """Write ``report`` as ``json`` or ``csv``; the bytes depend only on the report contents."""
    if format not in ("json", "csv"):
        raise ValueError(f"unknown report format {format!r}")
    text = to_json(report) if format == "json" else to_csv(report)
    path = Path(path)
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc
    return path


def read_csv_report(path) -> list:
    """Rows of a CSV report as dicts (the schema comment line is skipped)."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    return list(csv.DictReader(lines))
