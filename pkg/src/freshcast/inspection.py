"""Human-readable reports.

Helper functions that render index breakdowns, solver output, structure reports
and experiment results as plain-text tables for the terminal.

"""

from __future__ import annotations

from typing import Sequence

import tabulate

from freshcast.__version__ import VERSION
from freshcast.data_analysis import BatchResult
from freshcast.index import IndexValue, PSensitivity, delta
from freshcast.model import ClientParams
from freshcast.oracle.decoupled import MdpSolution
from freshcast.oracle.structure import StructureReport

FLOAT_FORMAT = ".9g"


def render_index(a: int, d: int, params: ClientParams, value: IndexValue) -> str:
    """Describe how the index of one state was computed."""
    rows = [
        ("a", a),
        ("d", d),
        ("lambda", params.lam),
        ("p", params.p),
        ("Delta", delta(params)),
        ("x", value.x),
        ("condition lhs (d*Delta/a)", value.condition_lhs),
        ("condition rhs ((a-1)/2+Delta)", value.condition_rhs),
        ("branch", value.branch),
        ("index", value.w),
    ]
    return tabulate.tabulate(rows, floatfmt=FLOAT_FORMAT, tablefmt="plain")


def render_p_sensitivity(sensitivity: PSensitivity) -> str:
    """Tabulate the index across channel success probabilities."""
    table = tabulate.tabulate(
        list(zip(sensitivity.ps, sensitivity.values)),
        headers=("p", "index"),
        floatfmt=FLOAT_FORMAT,
    )
    return (
        f"{table}\n\n"
        f"linear fit: slope={sensitivity.slope:.9g} "
        f"intercept={sensitivity.intercept:.9g} "
        f"max residual={sensitivity.max_residual:.9g}"
    )


def render_solution(sol: MdpSolution, rows: int = 10) -> str:
    """Summarise a decoupled solution: J, thresholds and the first rows of h."""
    problem = sol.problem
    shown = min(rows, problem.a_max)
    columns = min(problem.d_max + 1, 2 * max(sol.thresholds[:shown]) + 2)

    output = f"freshcast {VERSION}\n"
    output += f"W={problem.w:.9g} {problem.params}\n"
    output += f"grid: a_max={problem.a_max}, d_max={problem.d_max}\n"
    output += f"J={sol.J:.9g} after {sol.iterations} sweeps\n"
    output += "\n=== Thresholds ===\n"
    output += tabulate.tabulate(
        [(a, sol.threshold(a)) for a in range(1, shown + 1)], headers=("a", "D_a")
    )
    output += "\n\n=== Bias h(a, d) ===\n"
    output += tabulate.tabulate(
        [[a, *sol.h[a - 1, :columns].tolist()] for a in range(1, shown + 1)],
        headers=["a\\d", *range(columns)],
        floatfmt=".4f",
    )
    return output


def render_structure_reports(reports: Sequence[tuple[str, StructureReport]]) -> str:
    """One row per instance, one residual column per check."""
    if not reports:
        return ""

    names = [check.name for check in reports[0][1].checks]
    rows = []
    for label, report in reports:
        cells = [
            f"{check.residual:.3g}" + ("" if check.passed else " FAIL")
            for check in report.checks
        ]
        rows.append([label, *cells, "ok" if report.passed else "FAIL"])

    return tabulate.tabulate(rows, headers=["instance", *names, "status"])


def render_batch(results: Sequence[BatchResult]) -> str:
    """Tabulate simulated averages next to the lower bound."""
    return tabulate.tabulate(
        [
            (
                entry.config.experiment,
                entry.sweep_value,
                entry.config.policy.name,
                entry.config.n_clients,
                entry.result.replication_mean,
                entry.result.replication_stderr,
                entry.lower_bound,
            )
            for entry in results
        ],
        headers=("experiment", "sweep", "policy", "N", "mean AoI", "stderr", "L_B"),
        floatfmt=FLOAT_FORMAT,
    )
