"""Exact MDP solvers used to validate the approximate index.

"""

from freshcast.oracle.decoupled import (
    ACTIVE,
    PASSIVE,
    DecoupledProblem,
    MdpSolution,
    bellman_q,
    extract_active_passive,
    solve_decoupled,
)
from freshcast.oracle.joint import JointProblem, JointSolution, solve_joint_optimal
from freshcast.oracle.structure import CheckResult, StructureReport, verify_structure
from freshcast.oracle.whittle import WhittleProbe, numeric_whittle

__all__ = [
    "ACTIVE",
    "PASSIVE",
    "CheckResult",
    "DecoupledProblem",
    "JointProblem",
    "JointSolution",
    "MdpSolution",
    "StructureReport",
    "WhittleProbe",
    "bellman_q",
    "extract_active_passive",
    "numeric_whittle",
    "solve_decoupled",
    "solve_joint_optimal",
    "verify_structure",
]
