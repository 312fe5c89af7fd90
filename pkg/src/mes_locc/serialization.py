"""JSON state files and report serialization.

State files look like::

    {"kind": "state", "dims": [2, 2], "party": ["A", "B"], "labels": ["A", "B"],
     "data": [[0.70710678118654757, 0.0], ...]}

``data`` holds N [re, im] pairs for states and N*N row-major pairs for
density matrices.  All reals are written with 17 significant digits so a
file round-trips bit-exactly.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .tensor import DensityMatrix, LayoutError, StateVector, Subsystem, SubsystemLayout


class StateFormatError(ValueError):
    pass


def format_real(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        return "null"
    s = format(x, ".17g")
    # keep floats recognisable as floats
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def _encode(obj, indent: int | None, level: int) -> str:
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_real(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if indent is None:
        sep, pad, pad_end = "", "", ""
        item_sep, key_sep = ", ", ": "
    else:
        sep = "\n"
        pad = " " * (indent * (level + 1))
        pad_end = " " * (indent * level)
        item_sep, key_sep = ",", ": "
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}{key_sep}{_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{" + sep + (item_sep + sep).join(items) + sep + pad_end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        # numeric pairs stay on one line
        if indent is not None and all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_encode(v, None, 0) for v in obj) + "]"
        items = [f"{pad}{_encode(v, indent, level + 1)}" for v in obj]
        return "[" + sep + (item_sep + sep).join(items) + sep + pad_end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int | None = 2) -> str:
    """JSON text with every real written to 17 significant digits."""
    return _encode(obj, indent, 0)


def state_to_json(x: StateVector | DensityMatrix) -> dict:
    if isinstance(x, StateVector):
        kind, flat = "state", x.amplitudes
    elif isinstance(x, DensityMatrix):
        kind, flat = "density", x.matrix.reshape(-1)
    else:
        raise TypeError(f"expected StateVector or DensityMatrix, got {type(x).__name__}")
    return {
        "kind": kind,
        "dims": list(x.layout.dims),
        "party": list(x.layout.parties),
        "labels": list(x.layout.labels),
        "data": [[float(z.real), float(z.imag)] for z in flat],
    }


def state_from_json(obj: dict) -> StateVector | DensityMatrix:
    try:
        kind = obj["kind"]
        dims, parties, labels, data = obj["dims"], obj["party"], obj["labels"], obj["data"]
    except (KeyError, TypeError) as exc:
        raise StateFormatError(f"state file is missing field {exc}") from None
    if kind not in ("state", "density"):
        raise StateFormatError(f"unknown kind {kind!r}")
    if not (len(dims) == len(parties) == len(labels)):
        raise StateFormatError("dims, party and labels must have equal length")
    try:
        layout = SubsystemLayout(tuple(Subsystem(l, d, p) for l, d, p in zip(labels, dims, parties)))
        arr = np.array([complex(re, im) for re, im in data], dtype=np.complex128)
    except (LayoutError, TypeError, ValueError) as exc:
        raise StateFormatError(f"invalid state file: {exc}") from None
    n = layout.total_dim
    try:
        if kind == "state":
            return StateVector(layout, arr)
        if arr.size != n * n:
            raise StateFormatError(f"density data has {arr.size} entries, expected {n * n}")
        return DensityMatrix(layout, arr.reshape(n, n))
    except StateFormatError:
        raise
    except ValueError as exc:
        raise StateFormatError(f"invalid {kind}: {exc}") from None


def save_state(x: StateVector | DensityMatrix, path) -> None:
    Path(path).write_text(dumps(state_to_json(x)) + "\n")


def load_state(path) -> StateVector | DensityMatrix:
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise StateFormatError(f"cannot read state file {path}: {exc}") from None
    return state_from_json(obj)
