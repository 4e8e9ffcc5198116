"""Compiled numerical kernels.

Everything here operates in place on preallocated float64/int64 buffers so the
hot path of a fit allocates nothing.  All sums use Kahan-Babuska-Neumaier
compensation; fastmath stays off so the compensation is not optimised away.

The selection kernels count key comparisons into a caller-supplied one-element
int64 array, which the test suite uses to check the linear-time guarantee.
"""

import numpy as np
from numba import njit

# Multiplier/seed constants for the deterministic xorshift64* pivot generator.
# Randomised pivoting is required for introselect, but the stream is seeded
# from the buffer length only, so identical inputs always take identical
# pivot sequences (fits are reproducible bit for bit).
_XS_SEED = np.uint64(0x9E3779B97F4A7C15)
_XS_MULT = np.uint64(0x2545F4914F6CDD1D)


@njit(cache=True)
def kbn_sum(values):
    s = 0.0
    c = 0.0
    for i in range(values.size):
        v = values[i]
        t = s + v
        if abs(s) >= abs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
    return s + c


@njit(cache=True)
def _swap(keys, payload, i, j):
    keys[i], keys[j] = keys[j], keys[i]
    payload[i], payload[j] = payload[j], payload[i]


@njit(cache=True)
def _insertion_sort(keys, payload, lo, hi, counter):
    for i in range(lo + 1, hi):
        kv = keys[i]
        pv = payload[i]
        j = i - 1
        while j >= lo:
            counter[0] += 1
            if keys[j] > kv:
                keys[j + 1] = keys[j]
                payload[j + 1] = payload[j]
                j -= 1
            else:
                break
        keys[j + 1] = kv
        payload[j + 1] = pv


@njit(cache=True)
def _partition3(keys, payload, lo, hi, pivot, counter):
    # Dutch-flag pass: [lo, lt) < pivot, [lt, gt) == pivot, [gt, hi) > pivot.
    lt = lo
    i = lo
    gt = hi
    while i < gt:
        kv = keys[i]
        counter[0] += 1
        if kv < pivot:
            _swap(keys, payload, i, lt)
            lt += 1
            i += 1
        else:
            counter[0] += 1
            if kv > pivot:
                gt -= 1
                _swap(keys, payload, i, gt)
            else:
                i += 1
    return lt, gt


@njit(cache=True)
def _bfprt(keys, payload, lo, hi, k, counter):
    # Median-of-medians selection (groups of five); guaranteed linear time.
    while True:
        if hi - lo <= 25:
            _insertion_sort(keys, payload, lo, hi, counter)
            return keys[k]
        ngroups = 0
        g = lo
        while g < hi:
            ge = min(g + 5, hi)
            _insertion_sort(keys, payload, g, ge, counter)
            _swap(keys, payload, lo + ngroups, g + (ge - g - 1) // 2)
            ngroups += 1
            g = ge
        pivot = _bfprt(keys, payload, lo, lo + ngroups,
                       lo + ngroups // 2, counter)
        lt, gt = _partition3(keys, payload, lo, hi, pivot, counter)
        if k < lt:
            hi = lt
        elif k >= gt:
            lo = gt
        else:
            return pivot


@njit(cache=True)
def _introselect(keys, payload, lo, hi, k, counter):
    # Randomised quickselect (median-of-3 random pivots) with a depth budget
    # of 2*log2(n); past the budget the remaining subproblem is handed to
    # median-of-medians.
    n = hi - lo
    depth = 2
    while n > 1:
        n >>= 1
        depth += 2
    state = _XS_SEED ^ np.uint64(hi - lo)
    while True:
        if hi - lo <= 16:
            _insertion_sort(keys, payload, lo, hi, counter)
            return keys[k]
        if depth <= 0:
            return _bfprt(keys, payload, lo, hi, k, counter)
        depth -= 1
        span = np.uint64(hi - lo)
        state ^= state >> np.uint64(12)
        state ^= state << np.uint64(25)
        state ^= state >> np.uint64(27)
        a = keys[lo + np.int64(((state * _XS_MULT) >> np.uint64(17)) % span)]
        state ^= state >> np.uint64(12)
        state ^= state << np.uint64(25)
        state ^= state >> np.uint64(27)
        b = keys[lo + np.int64(((state * _XS_MULT) >> np.uint64(17)) % span)]
        state ^= state >> np.uint64(12)
        state ^= state << np.uint64(25)
        state ^= state >> np.uint64(27)
        c = keys[lo + np.int64(((state * _XS_MULT) >> np.uint64(17)) % span)]
        counter[0] += 3
        if a > b:
            a, b = b, a
        if b > c:
            b = c if a <= c else a
        pivot = b
        lt, gt = _partition3(keys, payload, lo, hi, pivot, counter)
        if k < lt:
            hi = lt
        elif k >= gt:
            lo = gt
        else:
            return keys[k]


@njit(cache=True)
def _partition_stats(keys, payload, x, t, counter):
    """Three-way partition around t, fused with the per-class accumulations.

    Every element is classified exactly once as the scan pointer reaches it,
    so one pass yields the region bounds, the compensated sum of
    (+x over I+ := keys < t) and (-x over I- := keys > t), and the
    compensated sum of |t - key| (= J at intercept t).
    """
    lt = 0
    i = 0
    gt = keys.size
    s = 0.0
    sc = 0.0
    f = 0.0
    fc = 0.0
    while i < gt:
        kv = keys[i]
        counter[0] += 1
        if kv < t:
            v = x[payload[i]]
            u = s + v
            if abs(s) >= abs(v):
                sc += (s - u) + v
            else:
                sc += (v - u) + s
            s = u
            w = t - kv
            u = f + w
            if abs(f) >= abs(w):
                fc += (f - u) + w
            else:
                fc += (w - u) + f
            f = u
            _swap(keys, payload, i, lt)
            lt += 1
            i += 1
        else:
            counter[0] += 1
            if kv > t:
                v = -x[payload[i]]
                u = s + v
                if abs(s) >= abs(v):
                    sc += (s - u) + v
                else:
                    sc += (v - u) + s
                s = u
                w = kv - t
                u = f + w
                if abs(f) >= abs(w):
                    fc += (f - u) + w
                else:
                    fc += (w - u) + f
                f = u
                gt -= 1
                _swap(keys, payload, i, gt)
            else:
                i += 1
    return lt, gt, s + sc, f + fc


@njit(cache=True)
def _max_knapsack(vals, n, capacity, scratch_payload, counter):
    """Maximise sum(beta*vals[:n]) with beta in [0,1]^n, sum(beta) = capacity.

    Greedy: the floor(capacity) largest entries get weight 1, the next one the
    fractional remainder.  The pivot is located with introselect, permuting
    vals[:n] in place.
    """
    if capacity <= 0.0 or n == 0:
        return 0.0
    if capacity >= n:
        return kbn_sum(vals[:n])
    full = int(np.floor(capacity))
    if full >= n:
        full = n - 1
    kth = n - 1 - full  # ascending rank of the descending-order pivot
    pivot = _introselect(vals, scratch_payload, 0, n, kth, counter)
    s = 0.0
    c = 0.0
    for i in range(kth + 1, n):
        v = vals[i]
        t = s + v
        if abs(s) >= abs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
    return (s + c) + (capacity - full) * pivot


@njit(cache=True)
def _gather_keys(x, y, idx, keys, m):
    # Dual-line values y_i - m*x_i in the buffer's current permutation order.
    for j in range(idx.size):
        i = idx[j]
        keys[j] = y[i] - m * x[i]


@njit(cache=True)
def _abs_dev_sum(keys, t):
    s = 0.0
    c = 0.0
    for j in range(keys.size):
        v = abs(t - keys[j])
        u = s + v
        if abs(s) >= abs(v):
            c += (s - u) + v
        else:
            c += (v - u) + s
        s = u
    return s + c


@njit(cache=True)
def _signed_x_sum(x, idx, nb, ne):
    # One compensated accumulation of +x over the below region and -x over
    # the above region; splitting into two sums is where cancellation bites.
    s = 0.0
    c = 0.0
    n = idx.size
    for j in range(n):
        if nb <= j < nb + ne:
            continue
        v = x[idx[j]]
        if j >= nb + ne:
            v = -v
        t = s + v
        if abs(s) >= abs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
    return s + c


@njit(cache=True)
def _max_prefix(keys, nb):
    m = keys[0]
    for j in range(1, nb):
        if keys[j] > m:
            m = keys[j]
    return m


@njit(cache=True)
def _max_prefix_count(keys, nb):
    # Maximum of keys[:nb] and its multiplicity, in one pass.
    m = keys[0]
    count = 1
    for j in range(1, nb):
        v = keys[j]
        if v > m:
            m = v
            count = 1
        elif v == m:
            count += 1
    return m, count


@njit(cache=True)
def _copy_region_x(x, idx, start, count, out):
    for j in range(count):
        out[j] = x[idx[start + j]]


@njit(cache=True)
def _negate_prefix(vals, n):
    for j in range(n):
        vals[j] = -vals[j]


@njit(cache=True)
def _objective(x, y, m, t):
    s = 0.0
    c = 0.0
    for i in range(x.size):
        v = abs(m * x[i] + t - y[i])
        u = s + v
        if abs(s) >= abs(v):
            c += (s - u) + v
        else:
            c += (v - u) + s
        s = u
    return s + c


@njit(cache=True)
def _mean(values):
    return kbn_sum(values) / values.size


@njit(cache=True)
def _normalize_arrays(x, y, out_x, out_y):
    # Centre on the centroid, scale each axis by its max absolute deviation
    # so the result sits in [-1, 1]^2; zero extents clamp to scale 1.
    tx = _mean(x)
    ty = _mean(y)
    ex = 0.0
    ey = 0.0
    for i in range(x.size):
        dx = abs(x[i] - tx)
        if dx > ex:
            ex = dx
        dy = abs(y[i] - ty)
        if dy > ey:
            ey = dy
    sx = ex if ex > 0.0 else 1.0
    sy = ey if ey > 0.0 else 1.0
    for i in range(x.size):
        out_x[i] = (x[i] - tx) / sx
        out_y[i] = (y[i] - ty) / sy
    return sx, sy, tx, ty


@njit(cache=True)
def _l2_slope(x, y):
    # Two-pass centred least-squares slope; 0.0 when the x spread vanishes.
    mx = _mean(x)
    my = _mean(y)
    sxy = 0.0
    cxy = 0.0
    sxx = 0.0
    cxx = 0.0
    for i in range(x.size):
        dx = x[i] - mx
        dy = y[i] - my
        v = dx * dy
        t = sxy + v
        if abs(sxy) >= abs(v):
            cxy += (sxy - t) + v
        else:
            cxy += (v - t) + sxy
        sxy = t
        w = dx * dx
        u = sxx + w
        if abs(sxx) >= abs(w):
            cxx += (sxx - u) + w
        else:
            cxx += (w - u) + sxx
        sxx = u
    den = sxx + cxx
    if den <= 0.0 or not np.isfinite(den):
        return 0.0
    num = sxy + cxy
    return num / den


@njit(cache=True)
def _oracle_scan(x, y):
    """Try the line through every pair with distinct x; keep the first best.

    Returns (i, j, m, t, objective); i == -1 when every pair is vertical.
    """
    n = x.size
    best = np.inf
    bi = np.int64(-1)
    bj = np.int64(-1)
    bm = 0.0
    bt = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            dx = x[j] - x[i]
            if dx == 0.0:
                continue
            m = (y[j] - y[i]) / dx
            t = y[i] - m * x[i]
            f = _objective(x, y, m, t)
            if f < best:
                best = f
                bi = np.int64(i)
                bj = np.int64(j)
                bm = m
                bt = t
    return bi, bj, bm, bt, best
