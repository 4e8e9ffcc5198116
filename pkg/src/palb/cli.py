"""Command-line front end: fit one dataset, run benchmark grids, profiles.

Exit codes: 0 success, 1 usage or input error, 2 solver finished without a
full convergence certificate (iteration cap, width cutoff, IRLS
nonconvergence).  Floats are printed with 17 significant digits so outputs
are stable goldens.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path
from typing import Optional

from . import __version__
from .baselines import DegenerateDataError, IrlsStatus, irls_fit, oracle_fit
from .bench import (
    compute_profile,
    merge_records,
    read_records_csv,
    run_grid,
    run_problems,
    write_profile_csv,
    write_records_csv,
)
from .core import DatasetParseError, load_dataset_csv
from .datagen import (
    FAMILIES,
    ExperimentSpec,
    SeriesTooShortError,
    StationCsvError,
    ingest_station_csv,
)
from .solver import FitStatus, Phase, SolverConfig, fit, iterate

ORACLE_SIZE_LIMIT = 200

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_NOT_CONVERGED = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT_ERROR)


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def _json_field(name: str, value) -> str:
    if value is None:
        return f'"{name}": null'
    if isinstance(value, float):
        return f'"{name}": {_fmt(value)}'
    if isinstance(value, int):
        return f'"{name}": {value}'
    return f'"{name}": "{value}"'


def _result_json(m, t, objective, status, expansion, subdivision, runtime) -> str:
    fields = [
        _json_field("m", float(m)),
        _json_field("t", float(t)),
        _json_field("objective", float(objective)),
        _json_field("status", status),
        _json_field("expansion_steps", expansion),
        _json_field("subdivision_steps", subdivision),
        _json_field("runtime_seconds", runtime),
    ]
    return "{" + ", ".join(fields) + "}"


def _result_csv(m, t, objective, status, expansion, subdivision, runtime) -> str:
    head = "m,t,objective,status,expansion_steps,subdivision_steps,runtime_seconds"
    row = ",".join([
        _fmt(m), _fmt(t), _fmt(objective), str(status),
        "" if expansion is None else str(expansion),
        "" if subdivision is None else str(subdivision),
        _fmt(runtime),
    ])
    return head + "\n" + row


def _event_json(event) -> str:
    fields = [
        _json_field("phase", event.phase.value),
        _json_field("a", float(event.a)),
        _json_field("b", float(event.b)),
        _json_field("k", int(event.k)),
    ]
    return "{" + ", ".join(fields) + "}"


def _parse_m0(text: str) -> Optional[float]:
    if text == "auto":
        return None
    try:
        return float(text)
    except ValueError:
        raise ValueError(f"invalid --m0 value {text!r}") from None


def cmd_fit(args) -> int:
    try:
        dataset = load_dataset_csv(args.input)
    except FileNotFoundError:
        print(f"error: no such file: {args.input}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except DatasetParseError as exc:
        print(f"error: {args.input}: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    if args.solver == "oracle" and dataset.n > ORACLE_SIZE_LIMIT and not args.force:
        print(f"error: oracle enumerates all point pairs (cubic cost); "
              f"n={dataset.n} exceeds {ORACLE_SIZE_LIMIT}. "
              f"Pass --force to run anyway.", file=sys.stderr)
        return EXIT_INPUT_ERROR
    if args.events and args.solver != "palb":
        print("error: --events requires --solver palb", file=sys.stderr)
        return EXIT_INPUT_ERROR

    try:
        if args.solver == "palb":
            config = SolverConfig(mu=args.mu, m0=_parse_m0(args.m0),
                                  normalize=not args.no_normalize)
            start = time.perf_counter()
            if args.events:
                it = iterate(dataset, config)
                last = None
                for event in it:
                    if event.phase is not Phase.TERMINATED:
                        print(_event_json(event))
                    else:
                        last = event
                runtime = time.perf_counter() - start
                print(_event_json(last))
                result = it.result
            else:
                result = fit(dataset, config)
                runtime = time.perf_counter() - start
            out = (result.line.m, result.line.t, result.objective,
                   result.status.value, result.expansion_steps,
                   result.subdivision_steps, runtime)
            code = EXIT_OK if result.status is FitStatus.CONVERGED \
                else EXIT_NOT_CONVERGED
        elif args.solver == "irls":
            start = time.perf_counter()
            result = irls_fit(dataset)
            runtime = time.perf_counter() - start
            out = (result.line.m, result.line.t, result.objective,
                   result.status.value, None, None, runtime)
            code = EXIT_OK if result.status is IrlsStatus.CONVERGED \
                else EXIT_NOT_CONVERGED
        else:
            start = time.perf_counter()
            result = oracle_fit(dataset)
            runtime = time.perf_counter() - start
            out = (result.line.m, result.line.t, result.objective,
                   "converged", None, None, runtime)
            code = EXIT_OK
    except (DegenerateDataError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    render = _result_json if args.format == "json" else _result_csv
    print(render(*out))
    return code


def _load_isd_problems(input_dir: str, log_path: Path):
    problems = []
    notes = []
    paths = sorted(Path(input_dir).glob("*.csv"))
    for index, path in enumerate(paths):
        try:
            dataset = ingest_station_csv(path)
        except SeriesTooShortError as exc:
            notes.append(f"skipped {path.name}: {exc}")
            continue
        except StationCsvError as exc:
            notes.append(f"skipped {path.name}: {exc}")
            continue
        problems.append((("isd", dataset.n, index), dataset))
    log_path.write_text("".join(line + "\n" for line in notes), encoding="utf-8")
    return problems


def cmd_bench(args) -> int:
    solvers = [s.strip() for s in args.solvers.split(",") if s.strip()]
    if not solvers:
        print("error: no solvers given", file=sys.stderr)
        return EXIT_INPUT_ERROR
    if args.seeds < 1:
        print("error: --seeds must be >= 1", file=sys.stderr)
        return EXIT_INPUT_ERROR
    try:
        if args.experiment == "isd":
            if not args.input_dir:
                print("error: --input-dir is required for the isd experiment",
                      file=sys.stderr)
                return EXIT_INPUT_ERROR
            problems = _load_isd_problems(args.input_dir,
                                          Path(str(args.out) + ".log"))
            records = run_problems(problems, solvers, args.budget_seconds)
        else:
            try:
                sizes = [int(tok) for tok in args.sizes.split(",") if tok.strip()]
            except ValueError:
                print(f"error: invalid --sizes list: {args.sizes!r}",
                      file=sys.stderr)
                return EXIT_INPUT_ERROR
            if not sizes or any(n < 1 for n in sizes):
                print(f"error: invalid --sizes list: {args.sizes!r}",
                      file=sys.stderr)
                return EXIT_INPUT_ERROR
            specs = [ExperimentSpec(args.experiment, n, seed)
                     for n in sizes for seed in range(args.seeds)]
            records = run_grid(specs, solvers, args.budget_seconds)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    write_records_csv(records, args.out)
    return EXIT_OK


def cmd_profile(args) -> int:
    groups = []
    for path in args.records:
        try:
            groups.append(read_records_csv(path))
        except FileNotFoundError:
            print(f"error: no such file: {path}", file=sys.stderr)
            return EXIT_INPUT_ERROR
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INPUT_ERROR
    try:
        merged = merge_records(groups)
        profile = compute_profile(merged, metric=args.metric)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    write_profile_csv(profile, args.out)
    return EXIT_OK


def _default_seeds() -> int:
    env = os.environ.get("PALB_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            pass
    return 1


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="palb",
                     description="Exact least-absolute-deviations line fitting")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit one CSV dataset")
    p_fit.add_argument("--input", required=True, help="dataset CSV path")
    p_fit.add_argument("--mu", type=float, default=0.01,
                       help="initial-guess uncertainty factor")
    p_fit.add_argument("--m0", default="auto",
                       help="initial slope: 'auto' or a number")
    p_fit.add_argument("--no-normalize", action="store_true",
                       help="skip the [-1,1]^2 coordinate normalization")
    p_fit.add_argument("--solver", choices=("palb", "irls", "oracle"),
                       default="palb")
    p_fit.add_argument("--format", choices=("json", "csv"), default="json")
    p_fit.add_argument("--force", action="store_true",
                       help="run the oracle past its size guard")
    p_fit.add_argument("--events", action="store_true",
                       help="stream iteration events as JSON lines before "
                            "the result (palb only)")
    p_fit.set_defaults(func=cmd_fit)

    p_bench = sub.add_parser("bench", help="run a benchmark grid")
    p_bench.add_argument("--experiment", required=True,
                         choices=FAMILIES + ("isd",))
    p_bench.add_argument("--sizes", default="",
                         help="comma-separated sample counts (synthetic)")
    p_bench.add_argument("--seeds", type=int, default=_default_seeds(),
                         help="number of replicate seeds per size")
    p_bench.add_argument("--solvers", default="palb")
    p_bench.add_argument("--budget-seconds", type=float, default=None,
                         help="skip larger sizes once a solver's level median "
                              "exceeds this")
    p_bench.add_argument("--out", required=True, help="records CSV path")
    p_bench.add_argument("--input-dir", default=None,
                         help="directory of station CSVs (isd)")
    p_bench.set_defaults(func=cmd_bench)

    p_prof = sub.add_parser("profile", help="compute performance profiles")
    p_prof.add_argument("--records", required=True, nargs="+",
                        help="one or more record CSVs")
    p_prof.add_argument("--metric", choices=("time", "objective"),
                        default="time")
    p_prof.add_argument("--out", required=True, help="profile CSV path")
    p_prof.set_defaults(func=cmd_profile)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
