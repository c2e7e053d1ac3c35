"""
Report serialisation: JSON with 17 significant digits per float, and CSV
with a header row and fixed column order.
"""

import csv
import io
import json
import math
from numbers import Integral, Real

import numpy as np

REPORT_FIELDS = (
    "state",
    "n",
    "alpha",
    "quantum_value",
    "lhv_bound",
    "violation_factor",
    "settings",
    "method",
    "seed",
)
SETTING_FIELDS = ("theta1", "phi1", "theta2", "phi2")


def format_float(value):
    """Shortest text carrying 17 significant digits; non-finite -> null."""
    value = float(value)
    if not math.isfinite(value):
        return "null"
    text = format(value, ".17g")
    if not any(c in text for c in ".en"):
        text += ".0"
    return text


def dump_json(obj):
    """
    Deterministic JSON text. Dict keys keep insertion order.
    """
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (Integral, np.integer)):
        return str(int(obj))
    if isinstance(obj, (Real, np.floating)):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = (f"{json.dumps(str(k))}: {dump_json(v)}" for k, v in obj.items())
        return "{" + ", ".join(items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dump_json(v) for v in obj) + "]"
    raise TypeError(f"Cannot serialise {type(obj).__name__}")


def _cell(value):
    if isinstance(value, (list, tuple, dict)):
        return dump_json(value)
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (Integral, np.integer)):
        return str(int(value))
    if isinstance(value, (Real, np.floating)):
        return format_float(value)
    return str(value)


def dump_csv(rows, columns):
    """
    CSV text for a list of dicts; ``columns`` fixes header and order.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(column)) for column in columns])
    return buffer.getvalue()


def validate_report(report):
    """
    Check a decoded violation report against the published schema.

    Returns:
        list of problems (empty when valid)
    """
    problems = []
    if not isinstance(report, dict):
        return ["report is not an object"]
    if tuple(report.keys()) != REPORT_FIELDS:
        problems.append(f"keys {list(report.keys())} != {list(REPORT_FIELDS)}")
    expectations = {
        "state": (str,),
        "n": (int,),
        "quantum_value": (int, float),
        "lhv_bound": (int, float),
        "violation_factor": (int, float),
        "method": (str,),
    }
    for name, types in expectations.items():
        value = report.get(name)
        if isinstance(value, bool) or not isinstance(value, types):
            problems.append(f"{name} has type {type(value).__name__}")
    if report.get("alpha") is not None and not isinstance(report["alpha"], (int, float)):
        problems.append("alpha must be a number or null")
    if report.get("seed") is not None and not isinstance(report["seed"], int):
        problems.append("seed must be an integer or null")
    settings = report.get("settings")
    if not isinstance(settings, list):
        problems.append("settings must be a list")
    else:
        for i, entry in enumerate(settings):
            if not isinstance(entry, dict) or tuple(entry.keys()) != SETTING_FIELDS:
                problems.append(f"settings[{i}] must have keys {list(SETTING_FIELDS)}")
    return problems
