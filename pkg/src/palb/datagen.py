"""Seeded synthetic data generators and station-CSV ingestion.

Three experiment families, all with abscissas uniform on [0, 1]:

* linear   - ground-truth line with g(0), g(1) ~ U[0,1]; noise is
             Laplace(0, 0.1) + U[-0.05, 0.05];
* poly5    - degree-5 polynomial with U[0,1] Bernstein coefficients
             (evaluated by de Casteljau), same noise as linear;
* outliers - ground-truth line as above; each sample draws Laplace(0, 0.01)
             with probability 1-p and Cauchy(0, 0.5) with probability p=0.05.

Randomness is pinned: one numpy PCG64 stream per replicate, seeded through
SeedSequence(seed), with draw order g (2 uniforms where applicable), x (n),
then the noise blocks in the documented order.  Laplace and Cauchy variates
come from explicit inverse CDFs, so fixtures are portable across platforms.

Station CSVs (timestamp, temperature) map time to years since 1950-01-01 UTC
using a 31557600-second year; rows with an empty temperature are dropped and
series shorter than 10 remaining rows are rejected.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Optional, Union

import numpy as np

from .core import Dataset, Line

FAMILIES = ("linear", "poly5", "outliers")

EPOCH = datetime(1950, 1, 1, tzinfo=timezone.utc)
SECONDS_PER_YEAR = 31_557_600
MIN_SERIES_LENGTH = 10


class StationCsvError(ValueError):
    """Malformed station CSV; carries the offending 1-based line number."""

    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


class SeriesTooShortError(ValueError):
    """Fewer than MIN_SERIES_LENGTH usable rows after dropping nulls."""

    def __init__(self, remaining: int):
        self.remaining = remaining
        super().__init__(
            f"series has {remaining} usable rows, need {MIN_SERIES_LENGTH}")


@dataclass(frozen=True)
class NoiseParams:
    laplace_scale: float
    uniform_halfwidth: float = 0.0
    cauchy_scale: float = 0.0
    outlier_prob: float = 0.0

    def __post_init__(self):
        for name in ("laplace_scale", "uniform_halfwidth", "cauchy_scale"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be nonnegative")
        if not 0.0 <= self.outlier_prob <= 1.0:
            raise ValueError("outlier_prob must be in [0, 1]")


def default_noise(family: str) -> NoiseParams:
    if family in ("linear", "poly5"):
        return NoiseParams(laplace_scale=0.1, uniform_halfwidth=0.05)
    if family == "outliers":
        return NoiseParams(laplace_scale=0.01, cauchy_scale=0.5,
                           outlier_prob=0.05)
    raise ValueError(f"unknown family {family!r}")


@dataclass(frozen=True)
class ExperimentSpec:
    family: str
    n: int
    seed: int
    params: Optional[NoiseParams] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.n < 1:
            raise ValueError("n must be >= 1")

    def noise(self) -> NoiseParams:
        return self.params if self.params is not None else default_noise(self.family)

    def to_json(self) -> str:
        doc = {"family": self.family, "n": self.n, "seed": self.seed}
        if self.params is not None:
            doc["params"] = {
                "laplace_scale": self.params.laplace_scale,
                "uniform_halfwidth": self.params.uniform_halfwidth,
                "cauchy_scale": self.params.cauchy_scale,
                "outlier_prob": self.params.outlier_prob,
            }
        return json.dumps(doc)

    @staticmethod
    def from_json(text: str) -> "ExperimentSpec":
        doc = json.loads(text)
        params = None
        if "params" in doc and doc["params"] is not None:
            params = NoiseParams(**doc["params"])
        return ExperimentSpec(family=doc["family"], n=int(doc["n"]),
                              seed=int(doc["seed"]), params=params)


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def _laplace_inverse_cdf(u: np.ndarray, scale: float) -> np.ndarray:
    # u must stay inside (0, 1) for a finite value; clamp the open endpoint.
    u = np.maximum(u, 2.0 ** -53)
    return scale * np.sign(u - 0.5) * np.log1p(-2.0 * np.abs(u - 0.5))


def _cauchy_inverse_cdf(u: np.ndarray, scale: float) -> np.ndarray:
    return scale * np.tan(np.pi * (u - 0.5))


def laplace_samples(rng: np.random.Generator, scale: float, n: int) -> np.ndarray:
    return _laplace_inverse_cdf(rng.random(n), scale)


def cauchy_samples(rng: np.random.Generator, scale: float, n: int) -> np.ndarray:
    return _cauchy_inverse_cdf(rng.random(n), scale)


def bernstein_eval(coefficients: np.ndarray, x: np.ndarray) -> np.ndarray:
    """De Casteljau evaluation of a Bernstein-basis polynomial on [0, 1]."""
    coefficients = np.asarray(coefficients, dtype=np.float64)
    degree = coefficients.size - 1
    layers = np.repeat(coefficients[:, None], x.size, axis=1)
    for r in range(degree, 0, -1):
        layers[:r] = (1.0 - x) * layers[:r] + x * layers[1:r + 1]
    return layers[0]


def generate_linear(spec: ExperimentSpec) -> tuple[Dataset, Line]:
    noise = spec.noise()
    rng = _rng(spec.seed)
    g0, g1 = rng.random(2)
    x = rng.random(spec.n)
    eps = laplace_samples(rng, noise.laplace_scale, spec.n)
    w = noise.uniform_halfwidth
    eps = eps + rng.uniform(-w, w, spec.n)
    y = g0 * (1.0 - x) + g1 * x + eps
    return Dataset(x, y), Line(float(g1 - g0), float(g0))


def generate_poly5(spec: ExperimentSpec) -> tuple[Dataset, np.ndarray]:
    noise = spec.noise()
    rng = _rng(spec.seed)
    coefficients = rng.random(6)
    x = rng.random(spec.n)
    eps = laplace_samples(rng, noise.laplace_scale, spec.n)
    w = noise.uniform_halfwidth
    eps = eps + rng.uniform(-w, w, spec.n)
    y = bernstein_eval(coefficients, x) + eps
    return Dataset(x, y), coefficients


def generate_outliers(spec: ExperimentSpec) -> tuple[Dataset, Line]:
    noise = spec.noise()
    rng = _rng(spec.seed)
    g0, g1 = rng.random(2)
    x = rng.random(spec.n)
    inlier = rng.random(spec.n) < (1.0 - noise.outlier_prob)
    laplace = laplace_samples(rng, noise.laplace_scale, spec.n)
    cauchy = cauchy_samples(rng, noise.cauchy_scale, spec.n)
    eps = np.where(inlier, laplace, cauchy)
    y = g0 * (1.0 - x) + g1 * x + eps
    return Dataset(x, y), Line(float(g1 - g0), float(g0))


def generate(spec: ExperimentSpec) -> tuple[Dataset, object]:
    if spec.family == "linear":
        return generate_linear(spec)
    if spec.family == "poly5":
        return generate_poly5(spec)
    return generate_outliers(spec)


def _parse_timestamp(token: str, lineno: int) -> datetime:
    raw = token.strip()
    text = raw
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    try:
        dt = datetime.fromisoformat(text)
    except ValueError:
        raise StationCsvError(lineno, f"invalid timestamp {raw!r}") from None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt


def timestamp_to_years(dt: datetime) -> float:
    return (dt - EPOCH).total_seconds() / SECONDS_PER_YEAR


def ingest_station_csv(path: Union[str, os.PathLike]) -> Dataset:
    """Load one station series as (years since 1950, temperature).

    Raises StationCsvError on malformed rows and SeriesTooShortError when
    fewer than 10 usable rows remain after dropping null temperatures.
    """
    xs: list[float] = []
    ys: list[float] = []
    header_allowed = True
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if line == "":
                continue
            if header_allowed and line.strip().lower().replace(" ", "") == \
                    "timestamp,temperature":
                header_allowed = False
                continue
            header_allowed = False
            fields = line.split(",")
            if len(fields) != 2:
                raise StationCsvError(
                    lineno, f"expected 2 fields, got {len(fields)}")
            dt = _parse_timestamp(fields[0], lineno)
            temp_token = fields[1].strip()
            if temp_token == "":
                continue  # null measurement
            try:
                temp = float(temp_token)
            except ValueError:
                raise StationCsvError(
                    lineno, f"invalid temperature {temp_token!r}") from None
            if not math.isfinite(temp):
                raise StationCsvError(
                    lineno, f"non-finite temperature {temp_token!r}")
            xs.append(timestamp_to_years(dt))
            ys.append(temp)
    if len(xs) < MIN_SERIES_LENGTH:
        raise SeriesTooShortError(len(xs))
    return Dataset(xs, ys)
