import numpy as np
import pytest

from palb.core import Dataset


def random_dataset(rng, n, style="cloud"):
    """Small random datasets for oracle comparisons."""
    if style == "cloud":
        x = rng.uniform(-2.0, 2.0, n)
        y = rng.uniform(-2.0, 2.0, n)
    elif style == "line_noise":
        x = rng.uniform(0.0, 1.0, n)
        y = rng.uniform(-1.0, 1.0) * x + rng.uniform(-1.0, 1.0) \
            + rng.normal(0.0, 0.1, n)
    elif style == "grid":
        # Integer-valued data; residual ties occur with high probability.
        x = rng.integers(0, 4, n).astype(float)
        y = rng.integers(-4, 5, n).astype(float)
        if np.min(x) == np.max(x):
            x[0] += 1.0
    else:
        raise ValueError(style)
    return Dataset(x, y)


def pairwise_slopes(dataset):
    """All slopes of lines through two sample points with distinct x."""
    x, y = dataset.x, dataset.y
    slopes = []
    for i in range(dataset.n):
        for j in range(i + 1, dataset.n):
            if x[i] != x[j]:
                slopes.append((y[j] - y[i]) / (x[j] - x[i]))
    return np.array(sorted(set(slopes)))


def marginal_value_reference(dataset, m):
    """Independent J(m): numpy median of residuals, plain summation."""
    r = dataset.y - m * dataset.x
    t = float(np.median(r))
    return float(np.sum(np.abs(m * dataset.x + t - dataset.y)))


def knapsack_bruteforce(values, capacity):
    """LP-vertex enumeration for max sum(beta*v), beta in [0,1]^n, sum=C."""
    values = list(values)
    n = len(values)
    assert 0.0 <= capacity <= n
    best = -np.inf
    for mask in range(1 << n):
        chosen = [i for i in range(n) if mask >> i & 1]
        s = len(chosen)
        base = sum(values[i] for i in chosen)
        if s == capacity:
            best = max(best, base)
        frac = capacity - s
        if 0.0 <= frac <= 1.0:
            for f in range(n):
                if not mask >> f & 1:
                    best = max(best, base + frac * values[f])
    return best


def e_interval_bruteforce(i0_x, b):
    """Vertices of {alpha in [-1,1]^n : sum(alpha) = -b}, extremes of alpha.x.

    Returns (s_min, s_max) of sum(alpha_i * x_i), or None when infeasible.
    """
    i0_x = list(i0_x)
    n = len(i0_x)
    assert n >= 1
    lo, hi = np.inf, -np.inf
    for f in range(n):
        others = [i for i in range(n) if i != f]
        for mask in range(1 << (n - 1)):
            alpha = [0.0] * n
            s = 0.0
            for pos, i in enumerate(others):
                alpha[i] = 1.0 if mask >> pos & 1 else -1.0
                s += alpha[i]
            alpha[f] = -b - s
            if abs(alpha[f]) <= 1.0 + 1e-12:
                val = sum(a * xi for a, xi in zip(alpha, i0_x))
                lo = min(lo, val)
                hi = max(hi, val)
    if lo is np.inf:
        return None
    return lo, hi


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)
