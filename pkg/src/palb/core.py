"""Core data types: datasets, lines, the affine normalization, compensated sums.

A dataset is a pair of immutable float64 arrays.  No ordering or distinctness
of the x values is assumed anywhere.  Fits may run on affinely rescaled
coordinates; ``AffineNormalization`` records the transform so results can be
mapped back to the input frame, using

    m = m' * sigma_y / sigma_x
    t = t' * sigma_y - m * tau_x + tau_y

which preserves minimisers and scales objective values by sigma_y.
"""

from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence, Union

import numpy as np

from ._kernels import _normalize_arrays, _objective


class DataPoint(NamedTuple):
    x: float
    y: float


class Line(NamedTuple):
    """A non-vertical line y = m*x + t."""

    m: float
    t: float


class DatasetError(ValueError):
    """Invalid dataset contents (empty, non-finite, mismatched lengths)."""


class DatasetParseError(ValueError):
    """CSV input rejected; carries the offending 1-based line number."""

    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


class Dataset:
    """Immutable collection of (x, y) samples.

    The coordinate arrays are copied to contiguous float64 and marked
    read-only, so a dataset can be shared freely across solver instances.
    """

    __slots__ = ("x", "y")

    def __init__(self, x, y):
        xa = np.ascontiguousarray(x, dtype=np.float64).copy()
        ya = np.ascontiguousarray(y, dtype=np.float64).copy()
        if xa.ndim != 1 or ya.ndim != 1:
            raise DatasetError("coordinates must be one-dimensional")
        if xa.size != ya.size:
            raise DatasetError(
                f"length mismatch: {xa.size} x values vs {ya.size} y values")
        if xa.size == 0:
            raise DatasetError("dataset must contain at least one point")
        if not np.isfinite(xa).all() or not np.isfinite(ya).all():
            raise DatasetError("coordinates must be finite (no NaN/inf)")
        xa.setflags(write=False)
        ya.setflags(write=False)
        object.__setattr__(self, "x", xa)
        object.__setattr__(self, "y", ya)

    def __setattr__(self, name, value):
        raise AttributeError("Dataset is immutable")

    @property
    def n(self) -> int:
        return self.x.size

    def __len__(self) -> int:
        return self.x.size

    def __iter__(self) -> Iterator[DataPoint]:
        for xi, yi in zip(self.x, self.y):
            yield DataPoint(float(xi), float(yi))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return np.array_equal(self.x, other.x) and np.array_equal(self.y, other.y)

    def __repr__(self) -> str:
        return f"Dataset(n={self.n})"

    @staticmethod
    def from_points(points: Sequence[tuple]) -> "Dataset":
        xs = [p[0] for p in points]
        ys = [p[1] for p in points]
        return Dataset(xs, ys)


@dataclass(frozen=True)
class AffineNormalization:
    """Per-axis scale/translation with x = sigma_x*x' + tau_x (same for y)."""

    sigma_x: float
    sigma_y: float
    tau_x: float
    tau_y: float

    def __post_init__(self):
        if not (self.sigma_x > 0.0 and self.sigma_y > 0.0):
            raise ValueError("scale factors must be positive")

    @staticmethod
    def identity() -> "AffineNormalization":
        return AffineNormalization(1.0, 1.0, 0.0, 0.0)


def normalize(dataset: Dataset) -> tuple[Dataset, AffineNormalization]:
    """Translate the centroid to the origin and scale into [-1, 1]^2.

    Each axis is scaled by its maximum absolute deviation from the centroid;
    a zero extent is clamped to scale 1 so the transform stays invertible.
    """
    out_x = np.empty(dataset.n)
    out_y = np.empty(dataset.n)
    sx, sy, tx, ty = _normalize_arrays(dataset.x, dataset.y, out_x, out_y)
    return Dataset(out_x, out_y), AffineNormalization(sx, sy, tx, ty)


def denormalize(dataset: Dataset, tr: AffineNormalization) -> Dataset:
    return Dataset(tr.sigma_x * dataset.x + tr.tau_x,
                   tr.sigma_y * dataset.y + tr.tau_y)


def denormalize_line(line: Line, tr: AffineNormalization) -> Line:
    """Map a line fitted in normalized coordinates back to the input frame."""
    m = line.m * tr.sigma_y / tr.sigma_x
    t = line.t * tr.sigma_y - m * tr.tau_x + tr.tau_y
    return Line(m, t)


def normalize_slope(m: float, tr: AffineNormalization) -> float:
    """Input-frame slope expressed in normalized coordinates."""
    return m * tr.sigma_x / tr.sigma_y


def objective_value(dataset: Dataset, line: Line) -> float:
    """Sum of absolute residuals of ``line`` on ``dataset`` (compensated)."""
    return float(_objective(dataset.x, dataset.y, line.m, line.t))


class CompensatedAccumulator:
    """Running Kahan-Babuska-Neumaier sum.

    Keeps a correction term alongside the running sum so that long series of
    mixed-magnitude additions round only once, when the value is read.
    """

    __slots__ = ("_sum", "_compensation")

    def __init__(self, value: float = 0.0):
        self._sum = float(value)
        self._compensation = 0.0

    def add(self, value: float) -> None:
        v = float(value)
        s = self._sum
        t = s + v
        if abs(s) >= abs(v):
            self._compensation += (s - t) + v
        else:
            self._compensation += (v - t) + s
        self._sum = t

    def extend(self, values) -> None:
        for v in values:
            self.add(v)

    @property
    def value(self) -> float:
        return self._sum + self._compensation


def parse_dataset_csv(text: str) -> Dataset:
    """Parse the two-column dataset format.

    Optional ``x,y`` header, one ``<x>,<y>`` record per line, ``.`` decimal
    separator, LF or CRLF endings.  NaN/inf tokens and malformed records are
    rejected with the 1-based line number.
    """
    xs: list[float] = []
    ys: list[float] = []
    header_allowed = True
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.rstrip("\r\n")
        if line == "":
            continue
        if header_allowed and line.strip().lower() == "x,y":
            header_allowed = False
            continue
        header_allowed = False
        fields = line.split(",")
        if len(fields) != 2:
            raise DatasetParseError(lineno, f"expected 2 fields, got {len(fields)}")
        values = []
        for name, tok in zip(("x", "y"), fields):
            tok = tok.strip()
            try:
                v = float(tok)
            except ValueError:
                raise DatasetParseError(lineno, f"invalid {name} value {tok!r}") from None
            if not math.isfinite(v):
                raise DatasetParseError(lineno, f"non-finite {name} value {tok!r}")
            values.append(v)
        xs.append(values[0])
        ys.append(values[1])
    if not xs:
        raise DatasetParseError(1, "no data records")
    return Dataset(xs, ys)


def load_dataset_csv(path: Union[str, os.PathLike]) -> Dataset:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return parse_dataset_csv(fh.read())


def write_dataset_csv(dataset: Dataset, path: Union[str, os.PathLike]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x,y\n")
        for xi, yi in zip(dataset.x, dataset.y):
            fh.write(f"{float(xi)!r},{float(yi)!r}\n")
