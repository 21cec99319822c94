"""Dataset files and synthetic instances.

File format: CSV with a header ``id,x1,...,xd,t_start,t_end``; the dimension
is inferred from the header. Floats are written with ``repr`` so a
write/read round trip reproduces every value exactly.
"""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path
from typing import TextIO

import numpy as np

from .core import Dataset, InputError, Lifespan, Metric, TemporalPoint

__all__ = ["read_csv", "write_csv", "load", "save", "generate", "LIFESPAN_MODELS"]

LIFESPAN_MODELS = ("uniform", "exponential")


def _header_dim(header: list[str]) -> int:
    names = [h.strip() for h in header]
    if len(names) < 3 or names[0] != "id" or names[-2:] != ["t_start", "t_end"]:
        raise InputError("line 1: header must be id,x1,...,xd,t_start,t_end")
    coords = names[1:-2]
    expected = [f"x{k + 1}" for k in range(len(coords))]
    if coords != expected:
        raise InputError(f"line 1: coordinate columns must be {','.join(expected) or '(none)'}")
    return len(coords)


def _number(text: str, line: int, what: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise InputError(f"line {line}: {what} is not a number: {text!r}") from None
    if not math.isfinite(v):
        raise InputError(f"line {line}: {what} must be finite, got {text!r}")
    return v


def read_csv(stream: TextIO, metric: Metric | None = None) -> Dataset:
    """Parse a dataset; errors name the offending line (1-based, header is line 1)."""
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        return Dataset([], metric or Metric.l2(), dim=0)
    d = _header_dim(header)
    points: list[TemporalPoint] = []
    seen: dict[int, int] = {}
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != d + 3:
            raise InputError(f"line {line}: expected {d + 3} fields, got {len(row)}")
        try:
            pid = int(row[0])
        except ValueError:
            raise InputError(f"line {line}: id is not an integer: {row[0]!r}") from None
        if pid in seen:
            raise InputError(f"line {line}: duplicate id {pid} (first on line {seen[pid]})")
        seen[pid] = line
        coords = tuple(_number(row[1 + k], line, f"x{k + 1}") for k in range(d))
        start = _number(row[d + 1], line, "t_start")
        end = _number(row[d + 2], line, "t_end")
        if start > end:
            raise InputError(f"line {line}: t_start {start!r} exceeds t_end {end!r}")
        points.append(TemporalPoint(pid, coords, Lifespan(start, end)))
    if sorted(seen) != list(range(len(seen))):
        raise InputError("ids must be exactly 0..n-1")
    return Dataset(points, metric or Metric.l2(), dim=d)


def load(path: str | Path, metric: Metric | None = None) -> Dataset:
    with open(path, newline="") as fh:
        return read_csv(fh, metric)


def write_csv(ds: Dataset, stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["id", *[f"x{k + 1}" for k in range(ds.dim)], "t_start", "t_end"])
    for p in ds.points:
        writer.writerow([p.id, *map(repr, map(float, p.coords)), repr(float(p.start)),
                         repr(float(p.end))])


def save(ds: Dataset, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        write_csv(ds, fh)


def dumps(ds: Dataset) -> str:
    buf = io.StringIO()
    write_csv(ds, buf)
    return buf.getvalue()


def generate(n: int, d: int = 2, clusters: int = 4, lifespan: str = "exponential",
             seed: int = 0, spread: float = 0.05, horizon: float = 100.0,
             mean_length: float = 10.0, metric: Metric | None = None) -> Dataset:
    """Gaussian clusters clipped to ``[0, 1]^d`` with random lifespans.

    Starts are uniform on ``[0, horizon]``; lengths are exponential with mean
    ``mean_length`` or uniform on ``[0, 2 * mean_length]``. The same arguments
    always give the same dataset.
    """
    if n < 1:
        raise InputError("n must be >= 1")
    if d < 1 or clusters < 1:
        raise InputError("d and clusters must be >= 1")
    if lifespan not in LIFESPAN_MODELS:
        raise InputError(f"lifespan model must be one of {LIFESPAN_MODELS}")
    rng = np.random.default_rng(seed)
    centers = rng.random((clusters, d))
    which = rng.integers(0, clusters, size=n)
    coords = np.clip(centers[which] + rng.normal(0.0, spread, size=(n, d)), 0.0, 1.0)
    starts = rng.uniform(0.0, horizon, size=n)
    if lifespan == "exponential":
        lengths = rng.exponential(mean_length, size=n)
    else:
        lengths = rng.uniform(0.0, 2 * mean_length, size=n)
    return Dataset.from_arrays(coords, starts, starts + lengths, metric)
