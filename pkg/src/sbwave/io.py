"""Locale-independent number formatting and small file writers."""
import json
import math

import numpy as np


def fmt(x) -> str:
    """17 significant digits, ``.`` separator; ``nan``/``inf`` spelled out."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x + 0.0, ".17g")  # + 0.0 folds -0.0 into 0.0


def _default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def dumps(obj) -> str:
    """Deterministic JSON (sorted keys, repr-exact floats)."""
    return json.dumps(obj, sort_keys=True, default=_default, allow_nan=True)


def write_json(obj, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(obj))
        fh.write("\n")
