"""Readers and writers for matrices, field samples, channels and datasets."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from ._validation import DEFAULT_TOL, PolarizationError
from .polmat import PolarizationMatrix, from_field_samples

__all__ = [
    "ParseError",
    "round_sig",
    "rounded",
    "dumps",
    "read_matrix_json",
    "write_matrix_json",
    "read_samples_csv",
    "write_samples_csv",
    "load_matrix",
    "parse_spectrum",
    "records_to_csv",
]

SIG_DIGITS = 12


class ParseError(PolarizationError):
    """The input could not be read or decoded (as opposed to being invalid)."""


def round_sig(x, digits=SIG_DIGITS):
    x = float(x)
    if not math.isfinite(x) or x == 0:
        return x
    return float(f"{x:.{digits}g}")


def rounded(obj, digits=SIG_DIGITS):
    """Recursively round every float in a JSON-like structure."""
    if isinstance(obj, dict):
        return {k: rounded(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [rounded(v, digits) for v in obj]
    if isinstance(obj, np.ndarray):
        return rounded(obj.tolist(), digits)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = round_sig(obj, digits)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    return obj


def dumps(obj):
    return json.dumps(rounded(obj), indent=2, sort_keys=False)


def _read_text(path):
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror or exc}") from exc


def read_matrix_json(path, tol=DEFAULT_TOL):
    try:
        data = json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc.msg})") from exc
    if not isinstance(data, dict) or "entries" not in data or "dim" not in data:
        raise ParseError(f"{path}: expected an object with 'dim' and 'entries'")
    try:
        raw = np.asarray(data["entries"], dtype=float)
        dim = int(data["dim"])
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{path}: entries must be numeric [re, im] pairs") from exc
    if raw.shape != (dim, dim, 2):
        raise ParseError(f"{path}: entries shape {raw.shape} does not match dim {dim}")
    return PolarizationMatrix(raw[..., 0] + 1j * raw[..., 1], tol=tol)


def write_matrix_json(matrix, path):
    if not isinstance(matrix, PolarizationMatrix):
        matrix = PolarizationMatrix(matrix)
    Path(path).write_text(json.dumps(matrix.to_dict()) + "\n", encoding="utf-8")


def _sample_header(dim):
    return [f"{part}_E{i}" for i in range(1, dim + 1) for part in ("re", "im")]


def read_samples_csv(path):
    """Field realizations from CSV with header ``re_E1,im_E1,...``."""
    rows = list(csv.reader(io.StringIO(_read_text(path))))
    rows = [r for r in rows if r and any(cell.strip() for cell in r)]
    if not rows:
        raise ParseError(f"{path}: empty samples file")
    header = [h.strip() for h in rows[0]]
    dim = len(header) // 2
    if len(header) % 2 or dim not in (2, 3) or header != _sample_header(dim):
        raise ParseError(f"{path}: header must be {','.join(_sample_header(max(dim, 2)))}")
    if len(rows) == 1:
        raise ParseError(f"{path}: no field realizations after the header")
    try:
        vals = np.array([[float(c) for c in r] for r in rows[1:]])
    except ValueError as exc:
        raise ParseError(f"{path}: non-numeric sample ({exc})") from exc
    if vals.ndim != 2 or vals.shape[1] != 2 * dim:
        raise ParseError(f"{path}: every row needs {2 * dim} columns")
    return vals[:, 0::2] + 1j * vals[:, 1::2]


def write_samples_csv(samples, path):
    E = np.asarray(samples, dtype=complex)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(_sample_header(E.shape[1]))
        for row in E:
            w.writerow([repr(float(v)) for z in row for v in (z.real, z.imag)])


def load_matrix(path, fmt=None, tol=DEFAULT_TOL):
    """Coherency matrix from a matrix JSON file or a samples CSV file."""
    if fmt is None:
        fmt = "csv" if str(path).lower().endswith(".csv") else "json"
    if fmt == "json":
        return read_matrix_json(path, tol)
    if fmt == "csv":
        return from_field_samples(read_samples_csv(path), tol)
    raise ParseError(f"unknown input format {fmt!r}")


def parse_spectrum(text):
    """Parse ``"0.5,0.4,0.1"`` into a float array."""
    try:
        vals = [float(v) for v in text.replace("(", "").replace(")", "").split(",") if v.strip()]
    except ValueError as exc:
        raise ParseError(f"cannot parse spectrum {text!r}") from exc
    return np.array(vals)


def records_to_csv(records, columns):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for rec in records:
        w.writerow(
            [f"{round_sig(rec[c]):.12g}" if isinstance(rec[c], float) else rec[c] for c in columns]
        )
    return buf.getvalue()
