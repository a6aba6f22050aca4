"""Quaternion sample files and fit reports."""

import csv

import numpy as np

from ._validation import NORM_TOL
from .exceptions import ParseError


def read_quaternions(path):
    """Read rows ``q1,q2,q3,q4`` (optional header) into an (n, 4) array."""
    rows = []
    with open(path, newline="") as fh:
        for lineno, rec in enumerate(csv.reader(fh), start=1):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != 4:
                raise ParseError(f"expected 4 fields, got {len(rec)}", line=lineno, path=path)
            try:
                q = [float(c) for c in rec]
            except ValueError:
                if lineno == 1:
                    continue
                raise ParseError(f"non-numeric field in {rec!r}", line=lineno, path=path) from None
            norm = float(np.linalg.norm(q))
            if not np.isfinite(norm) or abs(norm - 1.0) > NORM_TOL:
                raise ParseError(f"not a unit quaternion (norm={norm:.8g})", line=lineno, path=path)
            rows.append(q)
    if not rows:
        raise ParseError("no quaternion rows", path=path)
    X = np.array(rows)
    return X / np.linalg.norm(X, axis=1, keepdims=True)


def write_quaternions(path, X, extra=None, header=("q1", "q2", "q3", "q4")):
    """Write quaternions (and optional extra integer columns) as CSV."""
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(header)
        for i, q in enumerate(np.asarray(X, dtype=float)):
            row = [repr(float(v)) for v in q]
            if extra is not None:
                row.append(int(extra[i]))
            out.writerow(row)


def format_fit_report(fields):
    """Flat ``key=value`` text, one pair per line, floats at full precision."""
    lines = []
    for key, val in fields.items():
        if isinstance(val, bool):
            val = str(val).lower()
        elif isinstance(val, (float, np.floating)):
            val = repr(float(val))
        elif isinstance(val, np.ndarray):
            val = ",".join(repr(float(v)) for v in val)
        lines.append(f"{key}={val}")
    return "\n".join(lines) + "\n"


def parse_fit_report(text):
    """Inverse of :func:`format_fit_report`; values stay strings."""
    out = {}
    for line in text.splitlines():
        if line.strip():
            key, _, val = line.partition("=")
            out[key.strip()] = val.strip()
    return out
