"""Canonical JSON serialization for certification reports.

Floats are written as decimal strings with 17 significant digits, rationals
as ``"p/q"`` and integers as decimal strings, so nothing large or inexact
passes through a JSON number.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction

import numpy as np


def fmt_float(x: float) -> str:
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return str(x)
    if x == 0.0:
        return "0"  # folds -0.0
    return f"{x:.17g}"


def jsonable(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [fmt_float(obj.real), fmt_float(obj.imag)]
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [jsonable(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(report: dict) -> str:
    return json.dumps(jsonable(report), indent=2) + "\n"
