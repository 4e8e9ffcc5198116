"""In-place linear-time selection over a keyed buffer.

A buffer is a pair of equal-length arrays: float64 keys and int64 payloads
that travel with their key under every swap.  ``select_nth`` is an
introselect: randomised pivots with a depth budget of 2*log2(n), falling back
to median-of-medians (groups of five) once the budget is spent, so the worst
case stays linear.  Selection is unstable; ties are broken arbitrarily.

Both operations permute the caller's arrays and allocate nothing proportional
to their length.  The optional ``counter`` (one-element int64 array) receives
the number of key comparisons performed.
"""

from __future__ import annotations

from typing import NamedTuple, Optional

import numpy as np

from ._kernels import _bfprt, _introselect, _partition3


class KeyedEntry(NamedTuple):
    key: float
    payload: int


def _check_buffer(keys: np.ndarray, payload: np.ndarray) -> None:
    if keys.dtype != np.float64 or payload.dtype != np.int64:
        raise TypeError("keys must be float64 and payload int64")
    if keys.shape != payload.shape or keys.ndim != 1:
        raise ValueError("keys and payload must be equal-length 1-d arrays")
    if not np.isfinite(keys).all():
        raise ValueError("keys must be finite")


def _counter_or_new(counter: Optional[np.ndarray]) -> np.ndarray:
    if counter is None:
        return np.zeros(1, dtype=np.int64)
    return counter


def select_nth(keys: np.ndarray, payload: np.ndarray, k: int,
               counter: Optional[np.ndarray] = None) -> KeyedEntry:
    """Place the k-th smallest key (0-based) at position k and return it.

    Afterwards every key left of k is <= the selected key and every key right
    of it is >= the selected key.
    """
    _check_buffer(keys, payload)
    if not 0 <= k < keys.size:
        raise IndexError(f"k={k} out of range for buffer of size {keys.size}")
    value = _introselect(keys, payload, 0, keys.size, k, _counter_or_new(counter))
    return KeyedEntry(float(value), int(payload[k]))


def select_nth_guaranteed(keys: np.ndarray, payload: np.ndarray, k: int,
                          counter: Optional[np.ndarray] = None) -> KeyedEntry:
    """Pure median-of-medians selection; the introselect fallback path."""
    _check_buffer(keys, payload)
    if not 0 <= k < keys.size:
        raise IndexError(f"k={k} out of range for buffer of size {keys.size}")
    value = _bfprt(keys, payload, 0, keys.size, k, _counter_or_new(counter))
    return KeyedEntry(float(value), int(payload[k]))


def three_way_partition(keys: np.ndarray, payload: np.ndarray, pivot_key: float,
                        counter: Optional[np.ndarray] = None) -> tuple[int, int, int]:
    """Permute into [below | equal | above] regions relative to ``pivot_key``.

    Comparison against the pivot is exact. Returns the three region sizes,
    which always sum to the buffer length.
    """
    _check_buffer(keys, payload)
    lt, gt = _partition3(keys, payload, 0, keys.size, float(pivot_key),
                         _counter_or_new(counter))
    return int(lt), int(gt - lt), int(keys.size - gt)
