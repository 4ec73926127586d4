"""Reader for the trajectory CSV contract."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SCALARS = (
    "s", "sigma", "varsigma", "lambda", "mu", "nu",
    "curvature", "V", "delta_total", "delta_W", "z",
)


class FormatError(ValueError):
    """The file does not follow the trajectory CSV contract."""


@dataclass
class TrajectoryData:
    path: Path
    n: int
    s: np.ndarray       # (N,)
    C: np.ndarray       # (N, n)
    T: np.ndarray       # (N, n)
    scalars: dict       # column name -> (N,), NaN where the field is empty


def expected_header(n: int) -> list:
    head = ["s", "sigma", "varsigma"]
    head += [f"C_{i + 1}" for i in range(n)]
    head += [f"T_{i + 1}" for i in range(n)]
    head += ["lambda", "mu", "nu", "curvature", "V", "delta_total", "delta_W", "z"]
    return head


def read_trajectory(path) -> TrajectoryData:
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise FormatError(f"{path}: empty file")
    header = rows[0]
    n = sum(1 for h in header if h.startswith("C_"))
    if n == 0:
        raise FormatError(f"{path}: no C_i columns in header")
    want = expected_header(n)
    if header != want:
        missing = [c for c in want if c not in header]
        raise FormatError(f"{path}: header mismatch, missing columns {missing}")
    body = rows[1:]
    if not body:
        raise FormatError(f"{path}: no samples")
    width = len(header)
    if any(len(r) != width for r in body):
        raise FormatError(f"{path}: ragged rows")
    try:
        vals = np.array(
            [[float(x) if x != "" else np.nan for x in r] for r in body], dtype=float
        )
    except ValueError as e:
        raise FormatError(f"{path}: malformed number ({e})") from e
    col = {name: k for k, name in enumerate(header)}
    return TrajectoryData(
        path=path,
        n=n,
        s=vals[:, col["s"]],
        C=vals[:, col["C_1"]:col["C_1"] + n],
        T=vals[:, col["T_1"]:col["T_1"] + n],
        scalars={name: vals[:, col[name]] for name in SCALARS},
    )
