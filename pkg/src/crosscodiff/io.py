"""CSV and JSON file formats.

* trajectory: header ``x1,x2``, one row per time point;
* codifference series: header ``h,cd``, signed lags ascending;
* Monte Carlo summary: header ``n,estimator,median,failures``.

Floats are written with 17 significant digits so that reading a file
back reproduces every value bit for bit.
"""

from __future__ import annotations

import csv
import json
import os
from pathlib import Path

import numpy as np

from crosscodiff.theory import CodiffSeries
from crosscodiff.var_process import BiTrajectory

FLOAT_FMT = "%.17g"


class FormatError(ValueError):
    """A data file does not follow its documented layout."""


def _fmt(x: float) -> str:
    return FLOAT_FMT % x


def _read_rows(path, header: list[str]):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty file") from None
        if [c.strip() for c in first] != header:
            raise FormatError(f"{path}: expected header {','.join(header)!r}, got {','.join(first)!r}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise FormatError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            rows.append(row)
    return rows


def write_trajectory(traj: BiTrajectory, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        fh.write("x1,x2\n")
        for a, b in zip(traj.x1.tolist(), traj.x2.tolist()):
            fh.write(f"{_fmt(a)},{_fmt(b)}\n")
    return path


def read_trajectory(path) -> BiTrajectory:
    rows = _read_rows(path, ["x1", "x2"])
    try:
        data = np.array([[float(a), float(b)] for a, b in rows], dtype=float).reshape(-1, 2)
    except ValueError as exc:
        raise FormatError(f"{path}: non-numeric value ({exc})") from None
    try:
        return BiTrajectory(data[:, 0], data[:, 1])
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None


def write_series(series: CodiffSeries, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        fh.write("h,cd\n")
        for h, v in zip(series.lags.tolist(), series.values.tolist()):
            fh.write(f"{h:d},{_fmt(v)}\n")
    return path


def read_series(path) -> CodiffSeries:
    rows = _read_rows(path, ["h", "cd"])
    try:
        lags = [int(h) for h, _ in rows]
        values = [float(v) for _, v in rows]
    except ValueError as exc:
        raise FormatError(f"{path}: malformed row ({exc})") from None
    try:
        return CodiffSeries(lags, values)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None


def write_mc_summary(summary, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        fh.write("n,estimator,median,failures\n")
        for n, name, med, fails in summary.rows():
            fh.write(f"{n:d},{name},{_fmt(med)},{fails:d}\n")
    return path


def read_mc_summary(path) -> list[tuple[int, str, float, int]]:
    rows = _read_rows(path, ["n", "estimator", "median", "failures"])
    return [(int(n), name, float(med), int(f)) for n, name, med, f in rows]


def write_json(obj, path) -> Path:
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    os.replace(tmp, path)
    return path


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")
