"""CSV and JSON readers/writers used by the command line."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .ecology import (DEFAULT_DT, DEFAULT_HORIZON, EcologyParams, EcoState, PARAM_NAMES)
from .errors import MissingParameters, PumiError


class InputFormatError(PumiError):
    """Malformed input file; ``line`` is 1-based and counts the header."""

    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def fmt(x: float) -> str:
    return repr(float(x))


def read_numeric_csv(path, columns) -> np.ndarray:
    """Read the named columns of a headed CSV into an (n, k) float array."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise InputFormatError("empty file", 1) from None
        missing = [c for c in columns if c not in header]
        if missing:
            raise InputFormatError(f"header lacks column(s) {', '.join(missing)}", 1)
        pos = [header.index(c) for c in columns]
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise InputFormatError(f"expected {len(header)} fields, got {len(row)}", lineno)
            try:
                vals = [float(row[i]) for i in pos]
            except ValueError:
                raise InputFormatError(f"non-numeric value in row {row!r}", lineno) from None
            if not all(math.isfinite(v) for v in vals):
                raise InputFormatError(f"non-finite value in row {row!r}", lineno)
            rows.append(vals)
    return np.array(rows, dtype=float).reshape(-1, len(columns))


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def read_points_csv(path):
    arr = read_numeric_csv(path, ("x", "y", "f"))
    return arr[:, :2], arr[:, 2]


def read_query_csv(path):
    return read_numeric_csv(path, ("x", "y"))


def load_param_file(path) -> dict:
    """Parse a parameter JSON document.

    Layout::

        {"params": {<13 model parameters>},
         "initial_state": {"H": .., "G": .., "T": ..},
         "dt": 0.5, "horizon": 36500,
         "surface": {...optional scan settings...}}

    Missing ``a``/``b`` (or any other parameter) raises MissingParameters.
    """
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InputFormatError(f"invalid JSON: {exc.msg}", exc.lineno) from None
    if not isinstance(doc, dict):
        raise InputFormatError("top level must be an object")
    raw = doc.get("params", {})
    missing = [n for n in PARAM_NAMES if raw.get(n) is None]
    if missing:
        raise MissingParameters(missing)
    try:
        params = EcologyParams.from_mapping(raw)
        st = doc.get("initial_state")
        if st is None:
            raise InputFormatError("missing initial_state")
        state = EcoState(float(st["H"]), float(st["G"]), float(st["T"]))
        dt = float(doc.get("dt", DEFAULT_DT))
        horizon = float(doc.get("horizon", DEFAULT_HORIZON))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputFormatError(f"bad parameter file: {exc}") from None
    return {"params": params, "state": state, "dt": dt, "horizon": horizon,
            "surface": doc.get("surface", {})}
