import numpy as np
import pytest

from palb.bench import (
    CAPPED,
    NONCONVERGED,
    OK,
    SKIPPED,
    BenchmarkRecord,
    compute_profile,
    merge_records,
    read_records_csv,
    run_grid,
    run_problems,
    summarize_records,
    write_profile_csv,
    write_records_csv,
)
from palb.datagen import ExperimentSpec


def record(solver, problem_seed, runtime, status=OK, objective=1.0,
           experiment="linear", n=10):
    return BenchmarkRecord(solver=solver, experiment=experiment, n=n,
                           seed=problem_seed, runtime_seconds=runtime,
                           objective=objective, status=status)


class TestRunGrid:
    def test_grid_cardinality(self):
        specs = [ExperimentSpec("linear", n, seed)
                 for n in (10, 100) for seed in range(3)]
        records = run_grid(specs, ["palb"])
        assert len(records) == 6
        assert all(r.runtime_seconds >= 0 for r in records)

    def test_two_solvers_share_problems(self):
        records = run_grid([ExperimentSpec("linear", 20, 0)], ["palb", "oracle"])
        assert len(records) == 2
        assert records[0].problem == records[1].problem
        # both exact methods: identical objective on the same generated data
        assert records[0].objective == pytest.approx(records[1].objective,
                                                     rel=1e-9)

    def test_budget_zero_skips_everything(self):
        specs = [ExperimentSpec("linear", 10, s) for s in range(3)]
        records = run_grid(specs, ["palb"], budget_seconds=0.0)
        assert all(r.status == SKIPPED for r in records)
        assert all(r.runtime_seconds is None for r in records)

    def test_budget_applies_after_completed_level(self):
        specs = [ExperimentSpec("linear", n, s)
                 for n in (10, 50, 200) for s in range(2)]
        records = run_grid(specs, ["palb"], budget_seconds=1e-12)
        by_size = {}
        for r in records:
            by_size.setdefault(r.n, []).append(r.status)
        assert all(s != SKIPPED for s in by_size[10])  # first level always runs
        assert all(s == SKIPPED for s in by_size[50])
        assert all(s == SKIPPED for s in by_size[200])

    def test_palb_matches_oracle_through_grid(self):
        specs = [ExperimentSpec("linear", 40, seed) for seed in range(20)]
        records = run_grid(specs, ["palb", "oracle"])
        by_problem = {}
        for r in records:
            by_problem.setdefault(r.problem, {})[r.solver] = r
        for solvers in by_problem.values():
            assert solvers["palb"].objective == pytest.approx(
                solvers["oracle"].objective, rel=1e-9)

    def test_palb_never_worse_than_irls(self):
        specs = [ExperimentSpec("outliers", 60, seed) for seed in range(10)]
        records = run_grid(specs, ["palb", "irls"])
        by_problem = {}
        for r in records:
            by_problem.setdefault(r.problem, {})[r.solver] = r
        for solvers in by_problem.values():
            if solvers["irls"].objective is None:
                continue
            assert solvers["palb"].objective <= \
                solvers["irls"].objective + 1e-9

    def test_unknown_solver_rejected(self):
        with pytest.raises(ValueError):
            run_problems([], ["simplex"])


class TestComputeProfile:
    def test_single_solver_all_ok(self):
        records = [record("s", i, 1.0 + i) for i in range(4)]
        profile = compute_profile(records, "time")
        for tau in (1.0, 2.0, 10.0):
            assert profile.rho("s", tau) == 1.0

    def test_two_by_two_hand_example(self):
        records = [record("s1", 1, 1.0), record("s2", 1, 2.0),
                   record("s1", 2, 4.0), record("s2", 2, 2.0)]
        profile = compute_profile(records, "time")
        assert profile.rho("s1", 1.0) == 0.5
        assert profile.rho("s1", 2.0) == 1.0
        assert profile.rho("s2", 1.0) == 0.5
        assert profile.rho("s2", 2.0) == 1.0

    def test_total_failure_gives_zero_profile(self):
        records = [record("good", i, 1.0) for i in range(3)] + \
                  [record("bad", i, None, status=NONCONVERGED) for i in range(3)]
        profile = compute_profile(records, "time")
        assert profile.rho("bad", 1e12) == 0.0
        assert profile.rho("good", 1.0) == 1.0

    def test_failure_plateau_below_one(self):
        records = [record("s1", 1, 1.0), record("s2", 1, 2.0),
                   record("s1", 2, 1.0),
                   record("s2", 2, None, status=NONCONVERGED)]
        profile = compute_profile(records, "time")
        assert profile.rho("s2", 1e9) == 0.5  # plateau strictly below 1

    def test_capped_records_still_score(self):
        records = [record("s1", 1, 1.0), record("s2", 1, 3.0, status=CAPPED)]
        profile = compute_profile(records, "time")
        assert profile.rho("s2", 3.0) == 1.0

    def test_monotone_and_stabilises(self, rng):
        records = []
        for p in range(20):
            for s in ("a", "b", "c"):
                failed = rng.random() < 0.2
                records.append(record(
                    s, p, None if failed else float(rng.uniform(0.5, 5)),
                    status=NONCONVERGED if failed else OK))
        try:
            profile = compute_profile(records, "time")
        except ValueError:
            return  # every problem failed; degenerate draw
        for s in ("a", "b", "c"):
            values = [profile.rho(s, tau) for tau in np.linspace(1, 50, 200)]
            assert all(v2 >= v1 for v1, v2 in zip(values, values[1:]))
            solved = np.isfinite(profile.ratios[s]).mean()
            assert values[-1] == pytest.approx(solved)

    def test_every_problem_has_a_best_solver(self):
        records = [record("s1", 1, 1.0), record("s2", 1, 2.0),
                   record("s1", 2, 4.0), record("s2", 2, 2.0)]
        profile = compute_profile(records, "time")
        for i in range(profile.n_problems):
            assert min(profile.ratios[s][i] for s in profile.solvers) == 1.0

    def test_objective_tie_absorption(self):
        records = [record("s1", 1, 1.0, objective=5.0),
                   record("s2", 1, 2.0, objective=5.0 * (1 + 1e-13))]
        profile = compute_profile(records, "objective")
        assert profile.rho("s1", 1.0) == 1.0
        assert profile.rho("s2", 1.0) == 1.0

    def test_zero_best_objective(self):
        records = [record("s1", 1, 1.0, objective=0.0),
                   record("s2", 1, 1.0, objective=1.0)]
        profile = compute_profile(records, "objective")
        assert profile.rho("s1", 1.0) == 1.0
        assert profile.rho("s2", 1e15) == 0.0

    def test_dominant_solver(self):
        records = [record("fast", p, 1.0) for p in range(5)] + \
                  [record("slow", p, 2.0) for p in range(5)]
        profile = compute_profile(records, "time")
        assert profile.rho("fast", 1.0) == 1.0

    def test_empty_records_error(self):
        with pytest.raises(ValueError):
            compute_profile([], "time")

    def test_duplicate_pair_error(self):
        records = [record("s", 1, 1.0), record("s", 1, 2.0)]
        with pytest.raises(ValueError):
            compute_profile(records, "time")

    def test_unknown_metric(self):
        with pytest.raises(ValueError):
            compute_profile([record("s", 1, 1.0)], "energy")


class TestSummaries:
    def test_median_and_mean(self):
        records = [record("s", i, t) for i, t in enumerate((1.0, 2.0, 9.0))]
        (summary,) = summarize_records(records)
        assert summary.runs == 3
        assert summary.median_runtime == 2.0
        assert summary.mean_runtime == pytest.approx(4.0)

    def test_mean_omitted_on_failure(self):
        records = [record("s", 0, 1.0), record("s", 1, 3.0),
                   record("s", 2, 0.1, status=NONCONVERGED)]
        (summary,) = summarize_records(records)
        assert summary.median_runtime == 3.0  # median of (1, 3, inf)
        assert summary.mean_runtime is None

    def test_skipped_groups_omitted(self):
        records = [record("s", 0, None, status=SKIPPED)]
        assert summarize_records(records) == []


class TestCsvIo:
    def test_round_trip(self, tmp_path):
        records = [
            BenchmarkRecord("palb", "linear", 100, 3, 0.0125, 7.5, OK, 2, 11),
            BenchmarkRecord("irls", "linear", 100, 3, 0.5, 7.6, NONCONVERGED),
            BenchmarkRecord("palb", "linear", 1000, 3, None, None, SKIPPED),
        ]
        path = tmp_path / "records.csv"
        write_records_csv(records, path)
        header = path.read_text().splitlines()[0]
        assert header == ("solver,experiment,n,seed,runtime_seconds,objective,"
                          "status,expansion_steps,subdivision_steps")
        assert read_records_csv(path) == records

    def test_rejects_wrong_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(ValueError):
            read_records_csv(path)

    def test_merge_rejects_conflicts(self):
        a = [record("s", 1, 1.0)]
        b = [record("s", 1, 2.0)]
        with pytest.raises(ValueError):
            merge_records([a, b])

    def test_merge_dedupes_identical(self):
        a = [record("s", 1, 1.0)]
        assert merge_records([a, a]) == a

    def test_profile_csv(self, tmp_path):
        records = [record("s1", 1, 1.0), record("s2", 1, 2.0)]
        profile = compute_profile(records, "time")
        path = tmp_path / "profile.csv"
        write_profile_csv(profile, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "solver,tau,rho"
        rows = [line.split(",") for line in lines[1:]]
        assert {r[0] for r in rows} == {"s1", "s2"}
        taus = sorted({float(r[1]) for r in rows})
        assert taus == [1.0, 2.0]  # all ratio breakpoints present
