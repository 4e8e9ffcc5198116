"""Exact LAD line fitting by piecewise affine lower bounding.

The solver minimises the convex piecewise-affine marginal J(m).  It keeps a
bracketing interval [a_k, b_k] together with boundary evaluations and, per
step, does exactly one of:

* terminate - a boundary (or the last candidate) has 0 in its subdifferential;
* subdivide - boundary subgradients have opposing signs: the supporting lines
  at a_k and b_k intersect at the minimiser of the current two-piece lower
  bound; that point, projected onto the safeguard interval
  [a_k + eps_k, b_k - eps_k], replaces the boundary whose subgradient sign it
  shares;
* expand - both boundary subgradients share a sign: shift the interval in the
  descent direction by delta_k = 2^(k+1) * w (w the initial half-width), an
  exponential search that abuts the old interval.

Because the cut point is the minimiser of the lower bound rather than a fixed
rule, the iteration reaches an exact minimiser in finitely many steps; width
and iteration caps only guard against floating-point stalls.  Each step costs
one linear-time marginal evaluation and constant extra memory.

The iteration is exposed as a pull-based iterator of observable events so
callers can watch or abort a fit; ``fit`` drives it to completion and maps the
result back to input coordinates.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Iterator, Optional

import numpy as np

from ._kernels import _introselect, _l2_slope, _objective
from .core import (
    AffineNormalization,
    Dataset,
    Line,
    denormalize_line,
    normalize,
    normalize_slope,
)
from .marginal import EvaluationContext, MarginalEvaluation

SMALL_N_GUESS_CUTOFF = 100


class FitStatus(enum.Enum):
    CONVERGED = "converged"
    WIDTH_CUTOFF = "width_cutoff"
    ITERATION_CAP = "iteration_cap"


class Phase(enum.Enum):
    EXPANSION = "expansion"
    SUBDIVISION = "subdivision"
    TERMINATED = "terminated"


def integer_log10(n: int) -> int:
    if n < 1:
        raise ValueError("n must be >= 1")
    return len(str(n)) - 1


def default_iteration_cap(n: int) -> int:
    return 15 * integer_log10(n) + 300


@dataclass(frozen=True)
class SolverConfig:
    """Tuning knobs; the defaults are the ones used everywhere in testing.

    ``m0=None`` picks the initial slope automatically (least squares, or the
    first/last-point line for small inputs); an explicit ``m0`` is interpreted
    in input coordinates.  ``mu`` is the relative uncertainty attached to the
    guess: the search starts on [m0 - w, m0 + w] with w = mu * max(|m0|, 1).
    """

    mu: float = 0.01
    m0: Optional[float] = None
    safeguard_fraction: float = 0.01
    width_cutoff: float = 1e-15
    iteration_cap: Callable[[int], int] = default_iteration_cap
    normalize: bool = True

    def __post_init__(self):
        if not self.mu > 0.0:
            raise ValueError("mu must be positive")
        if not 0.0 <= self.safeguard_fraction < 0.5:
            raise ValueError("safeguard_fraction must be in [0, 0.5)")
        if not self.width_cutoff > 0.0:
            raise ValueError("width_cutoff must be positive")
        if self.m0 is not None and not math.isfinite(self.m0):
            raise ValueError("explicit m0 must be finite")


@dataclass(frozen=True)
class BoundaryState:
    m: float
    eval: MarginalEvaluation


@dataclass(frozen=True)
class IterationEvent:
    phase: Phase
    a: float
    b: float
    k: int
    candidate: Optional[float] = None


@dataclass(frozen=True)
class FitResult:
    line: Line
    objective: float
    expansion_steps: int
    subdivision_steps: int
    status: FitStatus

    @property
    def total_steps(self) -> int:
        return self.expansion_steps + self.subdivision_steps


def intersect_supports(a: float, f_a: float, g_a: float,
                       b: float, f_b: float, g_b: float) -> float:
    """Abscissa where the supporting lines at a and b intersect.

    Requires g_a < 0 < g_b and a < b, which makes the intersection unique and
    interior to (a, b) in exact arithmetic.  Computed in coordinates shifted
    so the interval midpoint sits at zero, then shifted back.
    """
    if not a < b:
        raise ValueError("need a < b")
    if not (g_a < 0.0 < g_b):
        raise ValueError("need g_a < 0 < g_b")
    c = 0.5 * (a + b)
    a_s = a - c
    b_s = b - c
    xi_s = (f_b - f_a + g_a * a_s - g_b * b_s) / (g_a - g_b)
    return c + xi_s


def initial_guess(dataset: Dataset, small_n_cutoff: int = SMALL_N_GUESS_CUTOFF) -> float:
    """Starting slope: first/last-point line for small n, else least squares.

    Falls back to the least-squares slope when the endpoints share an x value
    and to 0.0 when the x spread vanishes entirely.
    """
    x, y = dataset.x, dataset.y
    if dataset.n <= small_n_cutoff:
        dx = x[-1] - x[0]
        if dx != 0.0:
            return float((y[-1] - y[0]) / dx)
    return float(_l2_slope(x, y))


def _upper_median(values: np.ndarray) -> float:
    buf = np.ascontiguousarray(values, dtype=np.float64).copy()
    idx = np.zeros(buf.size, dtype=np.int64)
    counter = np.zeros(1, dtype=np.int64)
    return float(_introselect(buf, idx, 0, buf.size, buf.size // 2, counter))


def _is_degenerate(dataset: Dataset) -> bool:
    return dataset.n == 1 or float(dataset.x.min()) == float(dataset.x.max())


class PalbIterator:
    """Pull-based fit: each ``next()`` performs one step and yields its event.

    The final event has phase TERMINATED, after which ``result`` is set.
    Abandoning the iterator early is safe; it holds only its own buffers.
    """

    def __init__(self, dataset: Dataset, config: Optional[SolverConfig] = None):
        self.config = config or SolverConfig()
        self._dataset = dataset
        if self.config.normalize:
            work, self._transform = normalize(dataset)
        else:
            work, self._transform = dataset, AffineNormalization.identity()
        self._ctx = EvaluationContext(work)
        if self.config.m0 is not None:
            m0 = normalize_slope(self.config.m0, self._transform)
        else:
            m0 = initial_guess(work)
        self._half_width = self.config.mu * max(abs(m0), 1.0)
        self._a = m0 - self._half_width
        self._b = m0 + self._half_width
        self._eval_a = self._ctx.evaluate(self._a)
        self._eval_b = self._ctx.evaluate(self._b)
        self._cap = self.config.iteration_cap(dataset.n)
        self._k = 0
        self.expansion_steps = 0
        self.subdivision_steps = 0
        self._pending: Optional[tuple[MarginalEvaluation, FitStatus]] = None
        self.result: Optional[FitResult] = None

    def __iter__(self) -> Iterator[IterationEvent]:
        return self

    def __next__(self) -> IterationEvent:
        if self.result is not None:
            raise StopIteration
        return self._step()

    @property
    def interval(self) -> tuple[float, float]:
        return self._a, self._b

    def boundary_states(self) -> tuple[BoundaryState, BoundaryState]:
        return (BoundaryState(self._a, self._eval_a),
                BoundaryState(self._b, self._eval_b))

    def _finish(self, ev: MarginalEvaluation, status: FitStatus) -> IterationEvent:
        line_n = Line(ev.m, ev.upper_median)
        line = denormalize_line(line_n, self._transform)
        objective = float(_objective(self._dataset.x, self._dataset.y,
                                     line.m, line.t))
        self.result = FitResult(line=line, objective=objective,
                                expansion_steps=self.expansion_steps,
                                subdivision_steps=self.subdivision_steps,
                                status=status)
        return IterationEvent(Phase.TERMINATED, self._a, self._b, self._k)

    def _finish_best_boundary(self, status: FitStatus) -> IterationEvent:
        ev = self._eval_a if self._eval_a.value <= self._eval_b.value else self._eval_b
        return self._finish(ev, status)

    def _step(self) -> IterationEvent:
        if self._pending is not None:
            ev, status = self._pending
            return self._finish(ev, status)
        ea, eb = self._eval_a, self._eval_b
        if ea.subdiff.contains_zero():
            return self._finish(ea, FitStatus.CONVERGED)
        if eb.subdiff.contains_zero():
            return self._finish(eb, FitStatus.CONVERGED)
        if self._k >= self._cap:
            return self._finish_best_boundary(FitStatus.ITERATION_CAP)
        a, b, k = self._a, self._b, self._k
        sign_a = ea.subdiff.sign()
        sign_b = eb.subdiff.sign()
        if sign_a < 0 < sign_b:
            return self._subdivide(a, b, k, ea, eb)
        return self._expand(a, b, k, sign_a)

    def _subdivide(self, a, b, k, ea, eb) -> IterationEvent:
        if b - a < self.config.width_cutoff:
            return self._finish_best_boundary(FitStatus.WIDTH_CUTOFF)
        xi = intersect_supports(a, ea.value, ea.subdiff.hi,
                                b, eb.value, eb.subdiff.lo)
        eps = self.config.safeguard_fraction * (b - a)
        lo_s, hi_s = a + eps, b - eps
        if not lo_s <= hi_s:
            return self._finish_best_boundary(FitStatus.WIDTH_CUTOFF)
        xi = min(max(xi, lo_s), hi_s)
        if not (a < xi < b) or not math.isfinite(xi):
            # The safeguard cannot move off the endpoints once the interval is
            # a few ulps wide; stop instead of spinning.
            return self._finish_best_boundary(FitStatus.WIDTH_CUTOFF)
        ex = self._ctx.evaluate(xi)
        self.subdivision_steps += 1
        self._k += 1
        if ex.subdiff.contains_zero():
            self._pending = (ex, FitStatus.CONVERGED)
        elif ex.subdiff.sign() < 0:
            self._a, self._eval_a = xi, ex
        else:
            self._b, self._eval_b = xi, ex
        return IterationEvent(Phase.SUBDIVISION, a, b, k, candidate=xi)

    def _expand(self, a, b, k, sign_a) -> IterationEvent:
        delta = 2.0 ** (self.expansion_steps + 1) * self._half_width
        if sign_a < 0:
            # J still decreasing at both ends: move right.
            new_b = b + delta
            if not math.isfinite(new_b):
                return self._finish_best_boundary(FitStatus.ITERATION_CAP)
            self._a, self._eval_a = b, self._eval_b
            self._b = new_b
            self._eval_b = self._ctx.evaluate(new_b)
        else:
            new_a = a - delta
            if not math.isfinite(new_a):
                return self._finish_best_boundary(FitStatus.ITERATION_CAP)
            self._b, self._eval_b = a, self._eval_a
            self._a = new_a
            self._eval_a = self._ctx.evaluate(new_a)
        self.expansion_steps += 1
        self._k += 1
        return IterationEvent(Phase.EXPANSION, a, b, k)


def _fit_degenerate(dataset: Dataset) -> FitResult:
    # All x coincide (or n == 1): any slope is optimal once the intercept is a
    # median of y; report the canonical slope 0.
    t = _upper_median(dataset.y)
    objective = float(_objective(dataset.x, dataset.y, 0.0, t))
    return FitResult(line=Line(0.0, t), objective=objective,
                     expansion_steps=0, subdivision_steps=0,
                     status=FitStatus.CONVERGED)


def fit(dataset: Dataset, config: Optional[SolverConfig] = None) -> FitResult:
    """Fit the least-absolute-deviations line; exact up to float evaluation."""
    if _is_degenerate(dataset):
        return _fit_degenerate(dataset)
    it = PalbIterator(dataset, config)
    for _ in it:
        pass
    assert it.result is not None
    return it.result


def iterate(dataset: Dataset, config: Optional[SolverConfig] = None) -> PalbIterator:
    """Observable-iteration form of ``fit``.

    Degenerate inputs (all x equal) yield a single TERMINATED event.
    """
    if _is_degenerate(dataset):
        return _DegenerateIterator(dataset)
    return PalbIterator(dataset, config)


class _DegenerateIterator:
    def __init__(self, dataset: Dataset):
        self.result: Optional[FitResult] = None
        self._dataset = dataset
        self.expansion_steps = 0
        self.subdivision_steps = 0

    def __iter__(self):
        return self

    def __next__(self) -> IterationEvent:
        if self.result is not None:
            raise StopIteration
        self.result = _fit_degenerate(self._dataset)
        m = self.result.line.m
        return IterationEvent(Phase.TERMINATED, m, m, 0)
