"""Reference solvers: an exact pair-enumeration oracle and an IRLS baseline.

The oracle exploits that some optimal line passes through two sample points,
so trying every pair with distinct x values (cubic cost) yields a certified
optimum for small inputs.  IRLS is the standard approximate scheme: weighted
least squares with weights 1/max(|residual|, eps), iterated to a relative
tolerance; it is fast but carries no exactness guarantee and may fail to
converge.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ._kernels import _objective, _oracle_scan
from .core import Dataset, Line


class DegenerateDataError(ValueError):
    """All x values coincide; no non-vertical line is defined by any pair."""


@dataclass(frozen=True)
class OracleResult:
    line: Line
    objective: float
    optimal_pair: tuple[int, int]


class IrlsStatus(enum.Enum):
    CONVERGED = "converged"
    NONCONVERGED = "nonconverged"


@dataclass(frozen=True)
class IrlsResult:
    line: Line
    objective: float
    iterations: int
    status: IrlsStatus


def oracle_fit(dataset: Dataset) -> OracleResult:
    """Exact minimum over all lines through two sample points.

    Ties are broken by the first pair encountered in (i, j) lexicographic
    order; pairs with equal x are skipped.  Intended for n up to a few
    hundred.
    """
    if dataset.n < 2:
        raise DegenerateDataError("need at least two points")
    i, j, m, t, obj = _oracle_scan(dataset.x, dataset.y)
    if i < 0:
        raise DegenerateDataError("all x values are equal")
    return OracleResult(line=Line(float(m), float(t)), objective=float(obj),
                        optimal_pair=(int(i), int(j)))


def least_squares_line(dataset: Dataset) -> Line:
    x, y = dataset.x, dataset.y
    mx = float(np.mean(x))
    my = float(np.mean(y))
    dx = x - mx
    den = float(dx @ dx)
    if den == 0.0 or not np.isfinite(den):
        return Line(0.0, my)
    m = float(dx @ (y - my)) / den
    return Line(m, my - m * mx)


def _weighted_ls(x, y, w) -> Line:
    sw = float(np.sum(w))
    mx = float(np.dot(w, x)) / sw
    my = float(np.dot(w, y)) / sw
    dx = x - mx
    den = float(np.dot(w, dx * dx))
    if den == 0.0 or not np.isfinite(den):
        return Line(0.0, my)
    m = float(np.dot(w, dx * (y - my))) / den
    return Line(m, my - m * mx)


def irls_fit(dataset: Dataset, max_iterations: int = 50,
             tolerance: float = 1e-10, epsilon: float = 1e-8) -> IrlsResult:
    """Iteratively reweighted least squares for the LAD objective.

    Starts from the plain least-squares line and stops once the objective
    change drops below ``tolerance`` relative to max(1, objective), the unit
    floor keeping near-zero objectives from chasing rounding noise.  Hitting
    the iteration limit reports NONCONVERGED rather than raising.
    """
    if dataset.n < 2:
        raise DegenerateDataError("need at least two points")
    x, y = dataset.x, dataset.y
    line = least_squares_line(dataset)
    objective = float(_objective(x, y, line.m, line.t))
    status = IrlsStatus.NONCONVERGED
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        r = line.m * x + line.t - y
        w = 1.0 / np.maximum(np.abs(r), epsilon)
        line = _weighted_ls(x, y, w)
        new_objective = float(_objective(x, y, line.m, line.t))
        denom = max(1.0, abs(objective), abs(new_objective))
        done = abs(objective - new_objective) / denom < tolerance
        objective = new_objective
        if done:
            status = IrlsStatus.CONVERGED
            break
    return IrlsResult(line=line, objective=objective,
                      iterations=iterations, status=status)
