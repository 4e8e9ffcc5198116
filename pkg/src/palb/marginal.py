"""The marginal objective J(m) = min_t sum_i |m*x_i + t - y_i|.

For a fixed slope m the optimal intercepts are the medians of the dual-line
values r_i = y_i - m*x_i; J is convex and piecewise affine in m.  Its full
subdifferential at m is the convex hull of two compact intervals, one per
extreme median t in {t_low, t_high}:

    E(t) = [s_min + S, s_max + S]

where, splitting indices by the sign of m*x_i + t - y_i into I+/I-/I0,

    S = sum_{I+} x_i - sum_{I-} x_i,      B = |I+| - |I-|,

and s_min/s_max extremise sum_{I0} alpha_i x_i over alpha in [-1,1]^{|I0|}
with sum alpha_i = -B.  That extremisation is a continuous equality knapsack,
solved greedily through a selection pivot, so a full evaluation (value,
intercepts, subdifferential) costs linear time and constant extra memory
beyond the context's persistent buffers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._kernels import (
    _copy_region_x,
    _gather_keys,
    _introselect,
    _max_knapsack,
    _max_prefix_count,
    _negate_prefix,
    _partition3,
    _partition_stats,
    _signed_x_sum,
    kbn_sum,
)
from .core import Dataset


class PartitionInvariantError(RuntimeError):
    """Knapsack capacity left [0, |I0|]; indicates a broken partition."""


class SubdifferentialInterval(NamedTuple):
    lo: float
    hi: float

    def contains_zero(self) -> bool:
        return self.lo <= 0.0 <= self.hi

    def sign(self) -> int:
        """Uniform sign of the interval: -1, +1, or 0 if it straddles zero."""
        if self.hi < 0.0:
            return -1
        if self.lo > 0.0:
            return 1
        return 0


@dataclass(frozen=True)
class IndexPartition:
    """Classification of indices at a fixed (m, t); test/introspection aid."""

    i_plus: np.ndarray
    i_minus: np.ndarray
    i_zero: np.ndarray
    s: float
    b: int


@dataclass(frozen=True)
class MarginalEvaluation:
    m: float
    value: float
    lower_median: float
    upper_median: float
    subdiff: SubdifferentialInterval
    median_line_index: int


def solve_knapsack(values, capacity: float) -> float:
    """Maximise sum(beta*values) with beta in [0,1]^n and sum(beta) = capacity.

    The floor(capacity) largest values get weight 1 and the next one the
    fractional remainder; located with a selection pivot in linear time.
    Minimisation follows by negating the values.
    """
    vals = np.ascontiguousarray(values, dtype=np.float64).copy()
    n = vals.size
    if not 0.0 <= capacity <= n:
        raise ValueError(f"capacity {capacity} outside [0, {n}]")
    scratch = np.zeros(n, dtype=np.int64)
    counter = np.zeros(1, dtype=np.int64)
    return float(_max_knapsack(vals, n, float(capacity), scratch, counter))


class EvaluationContext:
    """Reusable evaluation state for one dataset.

    Owns a permutation buffer (dual-line keys plus original indices) and the
    knapsack scratch space; repeated evaluations allocate nothing.  A context
    is single-owner; create one per solver/thread.
    """

    def __init__(self, dataset: Dataset):
        self.dataset = dataset
        n = dataset.n
        self._keys = np.empty(n, dtype=np.float64)
        self._idx = np.arange(n, dtype=np.int64)
        self._scratch = np.empty(n, dtype=np.float64)
        self._scratch_idx = np.zeros(n, dtype=np.int64)
        self.counter = np.zeros(1, dtype=np.int64)

    @property
    def n(self) -> int:
        return self.dataset.n

    def _interval_at_current_keys(
            self, t: float) -> tuple[SubdifferentialInterval, int, int, float]:
        """E(t) for the keys currently in the buffer.

        One fused partition pass also yields the objective value at
        intercept t; returns (interval, n_below, n_equal, value).
        """
        x = self.dataset.x
        keys, idx = self._keys, self._idx
        n = keys.size
        lt, gt, s, value = _partition_stats(keys, idx, x, t, self.counter)
        nb = int(lt)
        ne = int(gt - lt)
        na = n - nb - ne
        s = float(s)
        b = nb - na
        cap2 = ne - b  # twice the knapsack capacity, exactly representable
        if cap2 < 0 or cap2 > 2 * ne:
            raise PartitionInvariantError(
                f"knapsack capacity {cap2 / 2.0} outside [0, {ne}]")
        cap = cap2 / 2.0
        scratch, sidx = self._scratch, self._scratch_idx
        _copy_region_x(x, idx, nb, ne, scratch)
        total = kbn_sum(scratch[:ne])
        o_beta = _max_knapsack(scratch, ne, cap, sidx, self.counter)
        s_max = 2.0 * o_beta - total
        _negate_prefix(scratch, ne)
        o_beta_neg = _max_knapsack(scratch, ne, cap, sidx, self.counter)
        s_min = -(2.0 * o_beta_neg + total)
        return SubdifferentialInterval(s_min + s, s_max + s), nb, ne, float(value)

    def evaluate(self, m: float) -> MarginalEvaluation:
        """J(m), the optimal intercept pair, and the full subdifferential."""
        n = self.n
        x, y = self.dataset.x, self.dataset.y
        keys, idx = self._keys, self._idx
        _gather_keys(x, y, idx, keys, float(m))
        k_lo = (n - 1) // 2
        k_hi = n // 2
        t_hi = float(_introselect(keys, idx, 0, n, k_hi, self.counter))
        median_index = int(idx[k_hi])
        interval_hi, nb, ne, value = self._interval_at_current_keys(t_hi)
        if k_lo >= nb:
            t_lo = t_hi
            subdiff = interval_hi
        else:
            t_lo, count_lo = _max_prefix_count(keys, nb)
            t_lo = float(t_lo)
            if ne == 1 and count_lo == 1:
                # Simple medians: classifying at t_lo moves exactly the two
                # median points between I+/I-/I0, and S shifts by x_lo + x_hi
                # while the forced knapsack weight flips sign, so E(t_lo)
                # equals E(t_hi) exactly.  Skip the second partition pass.
                subdiff = interval_hi
            else:
                interval_lo, _, _, _ = self._interval_at_current_keys(t_lo)
                subdiff = SubdifferentialInterval(
                    min(interval_lo.lo, interval_hi.lo),
                    max(interval_lo.hi, interval_hi.hi))
        return MarginalEvaluation(
            m=float(m), value=value, lower_median=t_lo, upper_median=t_hi,
            subdiff=subdiff, median_line_index=median_index)

    def interval_at(self, m: float, t: float) -> SubdifferentialInterval:
        """E(t) at slope m for an arbitrary intercept t."""
        _gather_keys(self.dataset.x, self.dataset.y, self._idx, self._keys,
                     float(m))
        interval, _, _, _ = self._interval_at_current_keys(float(t))
        return interval

    def index_partition(self, m: float, t: float) -> IndexPartition:
        """Materialised I+/I-/I0 split at (m, t); for tests, costs O(n) copies."""
        _gather_keys(self.dataset.x, self.dataset.y, self._idx, self._keys,
                     float(m))
        keys, idx = self._keys, self._idx
        lt, gt = _partition3(keys, idx, 0, keys.size, float(t), self.counter)
        nb, ne = int(lt), int(gt - lt)
        na = keys.size - nb - ne
        i_plus = np.sort(idx[:nb].copy())
        i_zero = np.sort(idx[nb:nb + ne].copy())
        i_minus = np.sort(idx[nb + ne:].copy())
        s = float(_signed_x_sum(self.dataset.x, idx, nb, ne))
        return IndexPartition(i_plus=i_plus, i_minus=i_minus, i_zero=i_zero,
                              s=s, b=nb - na)


def evaluate(dataset: Dataset, m: float) -> MarginalEvaluation:
    """One-shot J(m) evaluation; builds a throwaway context."""
    return EvaluationContext(dataset).evaluate(m)
