"""Scheduling policies.

"""

from freshcast.policies.base_types import (
    IDLE,
    NetworkState,
    Policy,
    PolicyDecision,
    TieRule,
    break_tie,
)
from freshcast.policies.defaults import (
    BUILTIN_POLICIES,
    ApproxIndexPolicy,
    ArrivalAwarePolicy,
    MaxAgePolicy,
    OptimalTablePolicy,
    RandomPolicy,
    RoundRobinPolicy,
    decide_approx_index,
    decide_arrival_aware,
    decide_baseline,
    decide_from_table,
)

__all__ = [
    "BUILTIN_POLICIES",
    "IDLE",
    "ApproxIndexPolicy",
    "ArrivalAwarePolicy",
    "MaxAgePolicy",
    "NetworkState",
    "OptimalTablePolicy",
    "Policy",
    "PolicyDecision",
    "RandomPolicy",
    "RoundRobinPolicy",
    "TieRule",
    "break_tie",
    "decide_approx_index",
    "decide_arrival_aware",
    "decide_baseline",
    "decide_from_table",
]
