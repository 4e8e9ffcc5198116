"""Timing grid runner and performance profiles.

``run_grid`` walks (problem x solver) combinations strictly sequentially,
timing only the solve (normalization included, data generation excluded) on
the monotonic clock.  Size levels run in ascending order; once a solver's
median runtime on a completed level exceeds the optional budget, larger sizes
are emitted as ``skipped`` records (a non-positive budget skips everything).

A performance profile compares solvers over a problem set: per problem p and
solver s the ratio r_{p,s} = t_{p,s} / min_s' t_{p,s'} measures how far s is
from the per-problem best, with r = inf when s failed; then

    rho_s(tau) = |{p : r_{p,s} <= tau}| / |P|

is the fraction of problems solved within factor tau of the best.  Failed
solvers plateau below 1.  For the objective metric, scores within 1e-12
relative of the best count as ratio 1 so exact solvers tie despite rounding.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from .baselines import IrlsStatus, irls_fit, oracle_fit
from .core import Dataset
from .datagen import ExperimentSpec, generate
from .solver import FitStatus, SolverConfig, fit

OK = "ok"
NONCONVERGED = "nonconverged"
CAPPED = "capped"
SKIPPED = "skipped"

RECORD_COLUMNS = ("solver", "experiment", "n", "seed", "runtime_seconds",
                  "objective", "status", "expansion_steps", "subdivision_steps")

OBJECTIVE_TIE_RTOL = 1e-12

ProblemKey = tuple[str, int, int]


@dataclass(frozen=True)
class BenchmarkRecord:
    solver: str
    experiment: str
    n: int
    seed: int
    runtime_seconds: Optional[float]
    objective: Optional[float]
    status: str
    expansion_steps: Optional[int] = None
    subdivision_steps: Optional[int] = None

    @property
    def problem(self) -> ProblemKey:
        return (self.experiment, self.n, self.seed)

    @property
    def scoreable(self) -> bool:
        # capped runs still return a usable solution; nonconverged/skipped
        # runs score infinity in profiles.
        return self.status in (OK, CAPPED)


@dataclass(frozen=True)
class SolveOutcome:
    objective: float
    status: str
    expansion_steps: Optional[int] = None
    subdivision_steps: Optional[int] = None


def _solve_palb(dataset: Dataset) -> SolveOutcome:
    result = fit(dataset, SolverConfig())
    status = OK if result.status is FitStatus.CONVERGED else CAPPED
    return SolveOutcome(result.objective, status,
                        result.expansion_steps, result.subdivision_steps)


def _solve_irls(dataset: Dataset) -> SolveOutcome:
    result = irls_fit(dataset)
    status = OK if result.status is IrlsStatus.CONVERGED else NONCONVERGED
    return SolveOutcome(result.objective, status)


def _solve_oracle(dataset: Dataset) -> SolveOutcome:
    result = oracle_fit(dataset)
    return SolveOutcome(result.objective, OK)


SOLVERS: dict[str, Callable[[Dataset], SolveOutcome]] = {
    "palb": _solve_palb,
    "irls": _solve_irls,
    "oracle": _solve_oracle,
}


def run_problems(problems: Sequence[tuple[ProblemKey, Dataset]],
                 solvers: Sequence[str],
                 budget_seconds: Optional[float] = None) -> list[BenchmarkRecord]:
    """Time each solver on each prebuilt problem, smallest sizes first."""
    for name in solvers:
        if name not in SOLVERS:
            raise ValueError(f"unknown solver {name!r}")
    records: list[BenchmarkRecord] = []
    skipped = {name: budget_seconds is not None and budget_seconds <= 0.0
               for name in solvers}
    sizes = sorted({key[1] for key, _ in problems})
    for size in sizes:
        level = [(key, ds) for key, ds in problems if key[1] == size]
        level_times: dict[str, list[float]] = {name: [] for name in solvers}
        for key, dataset in level:
            experiment, n, seed = key
            for name in solvers:
                if skipped[name]:
                    records.append(BenchmarkRecord(
                        solver=name, experiment=experiment, n=n, seed=seed,
                        runtime_seconds=None, objective=None, status=SKIPPED))
                    continue
                start = time.perf_counter()
                try:
                    outcome = SOLVERS[name](dataset)
                except Exception:
                    elapsed = time.perf_counter() - start
                    records.append(BenchmarkRecord(
                        solver=name, experiment=experiment, n=n, seed=seed,
                        runtime_seconds=elapsed, objective=None,
                        status=NONCONVERGED))
                    level_times[name].append(elapsed)
                    continue
                elapsed = time.perf_counter() - start
                records.append(BenchmarkRecord(
                    solver=name, experiment=experiment, n=n, seed=seed,
                    runtime_seconds=elapsed, objective=outcome.objective,
                    status=outcome.status,
                    expansion_steps=outcome.expansion_steps,
                    subdivision_steps=outcome.subdivision_steps))
                level_times[name].append(elapsed)
        if budget_seconds is not None:
            for name in solvers:
                times = level_times[name]
                if not skipped[name] and times and \
                        float(np.median(times)) > budget_seconds:
                    skipped[name] = True
    return records


def run_grid(specs: Sequence[ExperimentSpec], solvers: Sequence[str],
             budget_seconds: Optional[float] = None) -> list[BenchmarkRecord]:
    """Generate each spec's dataset once and time every solver on it."""
    problems = []
    for spec in specs:
        dataset, _ = generate(spec)
        problems.append(((spec.family, spec.n, spec.seed), dataset))
    return run_problems(problems, solvers, budget_seconds)


@dataclass(frozen=True)
class RuntimeSummary:
    solver: str
    experiment: str
    n: int
    runs: int
    median_runtime: float
    mean_runtime: Optional[float]  # None when any run failed (mean undefined)


def summarize_records(records: Sequence[BenchmarkRecord]) -> list[RuntimeSummary]:
    """Median runtime per (solver, experiment, n) across seeds.

    Failed runs count as infinite: the median survives them, the mean does
    not and is reported as None.  Skipped groups are omitted entirely.
    """
    groups: dict[tuple[str, str, int], list[float]] = {}
    for rec in records:
        if rec.status == SKIPPED:
            continue
        key = (rec.solver, rec.experiment, rec.n)
        value = rec.runtime_seconds if rec.scoreable and \
            rec.runtime_seconds is not None else math.inf
        groups.setdefault(key, []).append(value)
    summaries = []
    for (solver, experiment, n), times in sorted(groups.items()):
        finite = all(math.isfinite(t) for t in times)
        summaries.append(RuntimeSummary(
            solver=solver, experiment=experiment, n=n, runs=len(times),
            median_runtime=float(np.median(times)),
            mean_runtime=float(np.mean(times)) if finite else None))
    return summaries


class PerformanceProfile:
    """Per-solver ratio lists and the step functions rho_s(tau)."""

    def __init__(self, solvers: Sequence[str], problems: Sequence[ProblemKey],
                 ratios: dict[str, np.ndarray]):
        self.solvers = list(solvers)
        self.problems = list(problems)
        self.ratios = ratios

    @property
    def n_problems(self) -> int:
        return len(self.problems)

    def rho(self, solver: str, tau: float) -> float:
        if tau < 1.0:
            raise ValueError("tau must be >= 1")
        r = self.ratios[solver]
        return float(np.count_nonzero(r <= tau)) / self.n_problems

    def breakpoints(self) -> list[float]:
        values = set()
        for r in self.ratios.values():
            for v in r:
                if math.isfinite(v):
                    values.add(float(v))
        values.add(1.0)
        return sorted(values)

    def rows(self) -> list[tuple[str, float, float]]:
        taus = self.breakpoints()
        return [(s, tau, self.rho(s, tau)) for s in self.solvers for tau in taus]


def _ratio(score: float, best: float, tie_rtol: float) -> float:
    if best == 0.0:
        return 1.0 if score == 0.0 else math.inf
    if score <= best * (1.0 + tie_rtol):
        return 1.0
    return score / best


def compute_profile(records: Sequence[BenchmarkRecord],
                    metric: str = "time") -> PerformanceProfile:
    """Build the profile for ``metric`` in {"time", "objective"}.

    Nonconverged and skipped records score infinity; ok and capped records
    score their measured value.  Problems with no finite score are dropped;
    an empty record set is an error.
    """
    if metric not in ("time", "objective"):
        raise ValueError(f"unknown metric {metric!r}")
    if not records:
        raise ValueError("no records")
    solvers: list[str] = []
    problems: list[ProblemKey] = []
    scores: dict[tuple[ProblemKey, str], float] = {}
    for rec in records:
        if rec.solver not in solvers:
            solvers.append(rec.solver)
        if rec.problem not in problems:
            problems.append(rec.problem)
        key = (rec.problem, rec.solver)
        if key in scores:
            raise ValueError(f"duplicate record for {key}")
        if not rec.scoreable:
            scores[key] = math.inf
        else:
            value = rec.runtime_seconds if metric == "time" else rec.objective
            scores[key] = math.inf if value is None else float(value)
    kept: list[ProblemKey] = []
    ratio_lists: dict[str, list[float]] = {s: [] for s in solvers}
    tie_rtol = OBJECTIVE_TIE_RTOL if metric == "objective" else 0.0
    for problem in problems:
        row = [scores.get((problem, s), math.inf) for s in solvers]
        best = min(row)
        if not math.isfinite(best):
            continue
        kept.append(problem)
        for s, score in zip(solvers, row):
            ratio_lists[s].append(
                math.inf if not math.isfinite(score)
                else _ratio(score, best, tie_rtol))
    if not kept:
        raise ValueError("no problem was solved by any solver")
    ratios = {s: np.array(vals) for s, vals in ratio_lists.items()}
    return PerformanceProfile(solvers, kept, ratios)


def _format_optional(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_records_csv(records: Iterable[BenchmarkRecord],
                      path: Union[str, os.PathLike]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(RECORD_COLUMNS) + "\n")
        for rec in records:
            fh.write(",".join([
                rec.solver, rec.experiment, str(rec.n), str(rec.seed),
                _format_optional(rec.runtime_seconds),
                _format_optional(rec.objective),
                rec.status,
                _format_optional(rec.expansion_steps),
                _format_optional(rec.subdivision_steps),
            ]) + "\n")


def read_records_csv(path: Union[str, os.PathLike]) -> list[BenchmarkRecord]:
    records = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        lines = [ln.rstrip("\r\n") for ln in fh if ln.strip() != ""]
    if not lines or lines[0] != ",".join(RECORD_COLUMNS):
        raise ValueError(f"{path}: missing or wrong header")
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) != len(RECORD_COLUMNS):
            raise ValueError(f"{path}: line {lineno}: expected "
                             f"{len(RECORD_COLUMNS)} fields")
        records.append(BenchmarkRecord(
            solver=fields[0], experiment=fields[1],
            n=int(fields[2]), seed=int(fields[3]),
            runtime_seconds=float(fields[4]) if fields[4] else None,
            objective=float(fields[5]) if fields[5] else None,
            status=fields[6],
            expansion_steps=int(fields[7]) if fields[7] else None,
            subdivision_steps=int(fields[8]) if fields[8] else None,
        ))
    return records


def merge_records(groups: Sequence[Sequence[BenchmarkRecord]]) -> list[BenchmarkRecord]:
    """Concatenate record sets, rejecting conflicting duplicates."""
    seen: dict[tuple[ProblemKey, str], BenchmarkRecord] = {}
    merged: list[BenchmarkRecord] = []
    for group in groups:
        for rec in group:
            key = (rec.problem, rec.solver)
            if key in seen:
                if seen[key] != rec:
                    raise ValueError(f"inconsistent duplicate record for {key}")
                continue
            seen[key] = rec
            merged.append(rec)
    return merged


def write_profile_csv(profile: PerformanceProfile,
                      path: Union[str, os.PathLike]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("solver,tau,rho\n")
        for solver, tau, rho in profile.rows():
            fh.write(f"{solver},{tau!r},{rho!r}\n")
