"""Command-line front end.

Subcommands inspect the index, solve and verify decoupled problems, compute the
numeric Whittle index, and run simulations from config files or presets. CSV
output goes to standard output unless a path is given; human-readable tables go
to standard error when CSV is on standard output.

"""

from __future__ import annotations

import argparse
import itertools
import logging
import os
import pathlib
import sys
from typing import Optional, Sequence, TextIO

import attrs
import numpy as np

from freshcast.__version__ import VERSION
from freshcast.config import LoggingConfig, PolicySpec, SimConfig
from freshcast.data_analysis import BatchResult, BatchRunner
from freshcast.data_collection import FLOAT_FORMAT, DataTables
from freshcast.errors import (
    BracketError,
    ConfigError,
    FreshcastError,
    HorizonOverflowError,
    IndexabilityError,
    NonConvergenceError,
    TruncationError,
    UnknownPolicyError,
)
from freshcast.index import approx_index, lower_bound, p_sensitivity
from freshcast.inspection import (
    render_batch,
    render_index,
    render_p_sensitivity,
    render_solution,
    render_structure_reports,
)
from freshcast.libraries import default_policy_library
from freshcast.loaders import load_experiment
from freshcast.logs import configure_logging
from freshcast.model import ClientParams
from freshcast.oracle.decoupled import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    DecoupledProblem,
    solve_decoupled,
)
from freshcast.oracle.joint import JointProblem, solve_joint_optimal
from freshcast.oracle.structure import StructureReport, verify_structure
from freshcast.oracle.whittle import numeric_whittle
from freshcast.presets import DEFAULT_SEED, PRESETS

_logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_CHECK_FAILED = 4

JOBS_ENV_VAR = "FRESHCAST_JOBS"

VERIFY_GRID = tuple(
    itertools.product((0.2, 0.5, 0.8, 1.0), (0.3, 0.7, 1.0), (5.0, 20.0, 50.0))
)
"""Default (lambda, p, W) instances checked by ``verify``."""

_NUMERICAL_ERRORS = (
    NonConvergenceError,
    TruncationError,
    BracketError,
    IndexabilityError,
    HorizonOverflowError,
)


def _default_jobs() -> int:
    value = os.environ.get(JOBS_ENV_VAR, "1")
    try:
        return max(1, int(value))
    except ValueError:
        return 1


def _float_list(text: str) -> list[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"Expected numbers, got {text!r}.") from err


def _probabilities(values: Sequence[str]) -> list[float]:
    """Expand ``0.9``, ``0.9,0.1`` and ``20x0.9`` forms into a flat list."""
    ps: list[float] = []
    for value in values:
        for item in value.split(","):
            if not item.strip():
                continue
            count, _, p = item.partition("x")
            if p:
                ps.extend([float(p)] * int(count))
            else:
                ps.append(float(count))
    return ps


def get_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    """Configure CLI argument parser and parse args.

    Returns
    -------
    argparse.Namespace
        parsed CLI arguments.
    """
    parser = argparse.ArgumentParser(
        "freshcast", description="AoI scheduling with approximate Whittle indices."
    )
    parser.add_argument("--version", action="version", version=VERSION)
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=("DEBUG", "INFO", "WARNING", "ERROR"),
        help="Logging level.",
    )
    parser.add_argument("--log-file", type=pathlib.Path, help="Write logs here.")
    parser.add_argument(
        "-j",
        "--jobs",
        type=int,
        default=_default_jobs(),
        help=f"Worker processes for simulations (default ${JOBS_ENV_VAR} or 1).",
    )

    commands = parser.add_subparsers(dest="command", required=True)

    index = commands.add_parser("index", help="Approximate index of one state.")
    _add_state_args(index)
    _add_client_args(index)
    index.add_argument(
        "--p-sweep", type=_float_list, help="Comma-separated p values to fit."
    )

    solve = commands.add_parser("solve", help="Solve one decoupled problem.")
    _add_client_args(solve)
    solve.add_argument("--w", type=float, required=True, help="Subsidy W.")
    _add_solver_args(solve)
    solve.add_argument("--rows", type=int, default=10, help="Rows of h to print.")
    solve.add_argument(
        "--csv", type=pathlib.Path, help="Write J and the thresholds as CSV."
    )
    solve.add_argument(
        "--h-table", type=pathlib.Path, help="Write the full bias table as CSV."
    )

    verify = commands.add_parser("verify", help="Check the threshold structure.")
    verify.add_argument("--lambda", dest="lam", type=float, help="Arrival prob.")
    verify.add_argument("--p", type=float, help="Channel success probability.")
    verify.add_argument("--w", type=float, help="Subsidy W.")
    _add_solver_args(verify)
    verify.add_argument(
        "--check-tol", type=float, default=1e-6, help="Residual tolerance."
    )
    verify.add_argument("--csv", type=pathlib.Path, help="Write residuals as CSV.")

    whittle = commands.add_parser("whittle", help="Numeric Whittle index.")
    _add_state_args(whittle)
    _add_client_args(whittle)
    whittle.add_argument("--w-hi", type=float, help="Top of the W bracket.")
    whittle.add_argument("--tol-w", type=float, default=1e-4, help="Bracket width.")

    simulate = commands.add_parser("simulate", help="Simulate a config file.")
    simulate.add_argument("config", type=pathlib.Path, help="YAML experiment file.")
    simulate.add_argument(
        "--replications", type=int, help="Override the replication count."
    )
    _add_output_args(simulate)

    experiment = commands.add_parser("experiment", help="Run a preset experiment.")
    experiment.add_argument("preset", choices=sorted(PRESETS))
    experiment.add_argument(
        "--scale", type=float, default=1.0, help="Horizon multiplier in (0, 1]."
    )
    experiment.add_argument(
        "--points", type=_float_list, help="Comma-separated sweep values."
    )
    experiment.add_argument("--replications", type=int, help="Replications.")
    experiment.add_argument(
        "--policy",
        action="append",
        help="Policy to run (repeatable); defaults to the preset's policies.",
    )
    experiment.add_argument("--seed", type=int, default=DEFAULT_SEED, help="Seed.")
    _add_output_args(experiment)

    bound = commands.add_parser("bound", help="Lower bound on the average AoI.")
    bound.add_argument(
        "ps", nargs="+", help="Success probabilities, e.g. 0.9 0.1 or 20x0.9,20x0.1."
    )

    return parser.parse_args(argv)


def _add_state_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--a", type=int, required=True, help="Queuing delay.")
    parser.add_argument("--d", type=int, required=True, help="AoI reduction.")


def _add_client_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--lambda", dest="lam", type=float, required=True, help="Arrival prob."
    )
    parser.add_argument(
        "--p", type=float, required=True, help="Channel success probability."
    )


def _add_solver_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--a-max", type=int, help="Grid size in a.")
    parser.add_argument("--d-max", type=int, help="Grid size in d.")
    parser.add_argument("--tol", type=float, default=DEFAULT_TOL, help="RVI span.")
    parser.add_argument(
        "--max-iter", type=int, default=DEFAULT_MAX_ITER, help="RVI sweep limit."
    )


def _add_output_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("-o", "--output", type=pathlib.Path, help="Results CSV.")
    parser.add_argument(
        "--per-client", type=pathlib.Path, help="Per-client results CSV."
    )
    parser.add_argument(
        "--timing", action="store_true", help="Fill the wallclock_seconds column."
    )
    parser.add_argument(
        "--progress", action="store_true", help="Show a progress bar."
    )


def _problem(
    params: ClientParams, w: float, a_max: Optional[int], d_max: Optional[int]
) -> DecoupledProblem:
    if a_max is None and d_max is None:
        return DecoupledProblem.with_default_truncation(params, w)
    default = DecoupledProblem.with_default_truncation(params, w)
    return DecoupledProblem(
        params=params,
        w=w,
        a_max=a_max if a_max is not None else default.a_max,
        d_max=d_max if d_max is not None else default.d_max,
    )


def cmd_index(args: argparse.Namespace, out: TextIO) -> int:
    params = ClientParams(args.lam, args.p)
    value = approx_index(args.a, args.d, params)
    out.write(render_index(args.a, args.d, params, value) + "\n")
    if args.p_sweep:
        sensitivity = p_sensitivity(args.a, args.d, args.lam, args.p_sweep)
        out.write("\n" + render_p_sensitivity(sensitivity) + "\n")
    return EXIT_OK


def cmd_solve(args: argparse.Namespace, out: TextIO) -> int:
    params = ClientParams(args.lam, args.p)
    problem = _problem(params, args.w, args.a_max, args.d_max)
    sol = solve_decoupled(problem, tol=args.tol, max_iter=args.max_iter)
    out.write(render_solution(sol, args.rows) + "\n")

    if args.csv:
        tables = DataTables(
            {"thresholds": ("lambda", "p", "W", "J", "a", "D_a", "h_a0")}
        )
        for a in range(1, problem.a_max + 1):
            tables.add_data_row(
                "thresholds",
                {
                    "lambda": FLOAT_FORMAT % params.lam,
                    "p": FLOAT_FORMAT % params.p,
                    "W": FLOAT_FORMAT % problem.w,
                    "J": FLOAT_FORMAT % sol.J,
                    "a": str(a),
                    "D_a": str(sol.threshold(a)),
                    "h_a0": FLOAT_FORMAT % sol.h_at(a, 0),
                },
            )
        tables.write_csv("thresholds", args.csv)
    if args.h_table:
        tables = DataTables({"bias": ("a", "d", "h")})
        for (a_row, d), h in np.ndenumerate(sol.h):
            tables.add_data_row(
                "bias", {"a": str(a_row + 1), "d": str(d), "h": FLOAT_FORMAT % h}
            )
        tables.write_csv("bias", args.h_table)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, out: TextIO) -> int:
    single = (args.lam, args.p, args.w)
    if any(value is not None for value in single):
        if any(value is None for value in single):
            raise ConfigError("A single instance needs --lambda, --p and --w.")
        instances: Sequence[tuple[float, float, float]] = [single]
    else:
        instances = VERIFY_GRID

    reports: list[tuple[str, StructureReport]] = []
    for lam, p, w in instances:
        problem = _problem(ClientParams(lam, p), w, args.a_max, args.d_max)
        sol = solve_decoupled(problem, tol=args.tol, max_iter=args.max_iter)
        label = f"lambda={lam:.9g} p={p:.9g} W={w:.9g}"
        reports.append((label, verify_structure(sol, problem, args.check_tol)))

    out.write(render_structure_reports(reports) + "\n")

    if args.csv:
        tables = DataTables(
            {"checks": ("instance", "check", "residual", "tolerance", "passed")}
        )
        for label, report in reports:
            for check in report.checks:
                tables.add_data_row(
                    "checks",
                    {
                        "instance": label,
                        "check": check.name,
                        "residual": FLOAT_FORMAT % check.residual,
                        "tolerance": FLOAT_FORMAT % check.tolerance,
                        "passed": str(check.passed).lower(),
                    },
                )
        tables.write_csv("checks", args.csv)

    failed = [label for label, report in reports if not report.passed]
    if failed:
        _logger.error("Structure checks failed for: %s", "; ".join(failed))
        return EXIT_CHECK_FAILED
    return EXIT_OK


def cmd_whittle(args: argparse.Namespace, out: TextIO) -> int:
    params = ClientParams(args.lam, args.p)
    value = numeric_whittle(args.a, args.d, params, args.w_hi, args.tol_w)
    approx = approx_index(args.a, args.d, params).w
    out.write(f"numeric={value:.9g}\napprox={approx:.9g}\n")
    return EXIT_OK


def _emit(
    results: Sequence[BatchResult],
    args: argparse.Namespace,
    out: TextIO,
) -> None:
    tables = DataTables.for_experiments()
    for entry in results:
        tables.add_result(
            entry.config,
            entry.result,
            entry.lower_bound,
            entry.sweep_value,
            entry.wallclock_seconds if args.timing else None,
        )

    if args.output:
        tables.write_csv("results", args.output)
        out.write(render_batch(results) + "\n")
    else:
        out.write(tables.to_csv("results"))
        sys.stderr.write(render_batch(results) + "\n")

    if args.per_client:
        tables.write_csv("per_client", args.per_client)


def cmd_simulate(args: argparse.Namespace, out: TextIO) -> int:
    configs = load_experiment(args.config)
    if args.replications is not None:
        configs = [_with_replications(c, args.replications) for c in configs]

    results = BatchRunner(configs, jobs=args.jobs, progress=args.progress).run()
    _emit(results, args, out)
    return EXIT_OK


def _with_replications(config: SimConfig, replications: int) -> SimConfig:
    try:
        return attrs.evolve(config, replications=replications)
    except ValueError as err:
        raise ConfigError(str(err), "--replications") from err


def cmd_experiment(args: argparse.Namespace, out: TextIO) -> int:
    preset = PRESETS[args.preset]
    policies = [PolicySpec(name) for name in args.policy] if args.policy else None
    if policies:
        library = default_policy_library()
        for spec in policies:
            library.get_policy_type(spec.name)

    try:
        pairs = preset.configs(
            scale=args.scale,
            points=args.points,
            policies=policies,
            seed=args.seed,
            replications=args.replications,
        )
    except ValueError as err:
        raise ConfigError(str(err), args.preset) from err

    results = BatchRunner(
        [config for _, config in pairs],
        sweep_values=[value for value, _ in pairs],
        jobs=args.jobs,
        progress=args.progress,
    ).run()
    _emit(results, args, out)

    if preset.name == "gap":
        clients = pairs[0][1].clients
        joint = solve_joint_optimal(JointProblem(clients, age_cap=16))
        sys.stderr.write(f"joint optimum (age cap 16): J_opt/N={joint.J_opt:.9g}\n")

    return EXIT_OK


def cmd_bound(args: argparse.Namespace, out: TextIO) -> int:
    try:
        ps = _probabilities(args.ps)
    except ValueError as err:
        raise ConfigError(f"Could not parse probabilities: {err}.") from err
    out.write(f"{lower_bound(ps, len(ps)):.9g}\n")
    return EXIT_OK


COMMANDS = {
    "index": cmd_index,
    "solve": cmd_solve,
    "verify": cmd_verify,
    "whittle": cmd_whittle,
    "simulate": cmd_simulate,
    "experiment": cmd_experiment,
    "bound": cmd_bound,
}


def main(argv: Optional[Sequence[str]] = None, out: Optional[TextIO] = None) -> int:
    """Main program entry point."""
    args = get_args(argv)
    out = out if out is not None else sys.stdout

    configure_logging(
        LoggingConfig(
            log_level=args.log_level,
            log_file_path=str(args.log_file) if args.log_file else "./freshcast.log",
            log_to_terminal=args.log_file is None,
        )
    )

    try:
        return COMMANDS[args.command](args, out)
    except _NUMERICAL_ERRORS as err:
        sys.stderr.write(f"error: {err}\n")
        return EXIT_NUMERICAL
    except (ConfigError, UnknownPolicyError) as err:
        sys.stderr.write(f"error: {err}\n")
        return EXIT_USAGE
    except FreshcastError as err:
        sys.stderr.write(f"error: {err}\n")
        return EXIT_NUMERICAL
    except ValueError as err:
        sys.stderr.write(f"error: {err}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
