"""Built-in scheduling policies.

Each policy is a thin stateful wrapper around a ``decide_*`` function so that the
decision rules can also be called directly on a NetworkState.

"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from freshcast.config import PolicySpec
from freshcast.errors import ConfigError
from freshcast.index import approx_index_array
from freshcast.model import ClientParams
from freshcast.oracle.joint import (
    IDLE_ACTION,
    MAX_JOINT_CLIENTS,
    JointProblem,
    JointSolution,
    cached_joint_solution,
)
from freshcast.policies.base_types import (
    IDLE,
    NetworkState,
    Policy,
    PolicyDecision,
    TieRule,
    break_tie,
)
from freshcast.streams import NetworkStreams

BASELINES = ("max-age", "round-robin", "random")


def _argmax_decision(
    scores: np.ndarray, tie: TieRule, rng: Optional[np.random.Generator]
) -> PolicyDecision:
    best = scores.max()
    if best <= 0.0:
        return IDLE
    candidates = np.flatnonzero(scores == best)
    return PolicyDecision(break_tie(candidates, tie, rng))


def decide_approx_index(
    state: NetworkState,
    tie: TieRule = TieRule.LOWEST_INDEX,
    rng: Optional[np.random.Generator] = None,
) -> PolicyDecision:
    """Serve the client with the largest approximate index.

    Parameters
    ----------
    state
        The network at the start of the slot.
    tie
        Rule used when several clients share the largest index.
    rng
        Stream consumed by random tie-breaking.

    Returns
    -------
    PolicyDecision
        The client to serve, or IDLE when every index is zero.
    """
    scores = approx_index_array(state.a, state.d, state.lam, state.p)
    return _argmax_decision(scores, tie, rng)


def decide_arrival_aware(
    state: NetworkState,
    tie: TieRule = TieRule.LOWEST_INDEX,
    rng: Optional[np.random.Generator] = None,
) -> PolicyDecision:
    """Serve the client with the largest index computed as if every channel
    were reliable."""
    scores = approx_index_array(state.a, state.d, state.lam, np.ones_like(state.p))
    return _argmax_decision(scores, tie, rng)


def decide_baseline(
    kind: str,
    state: NetworkState,
    rng: Optional[np.random.Generator] = None,
    last_served: int = -1,
    tie: TieRule = TieRule.LOWEST_INDEX,
) -> PolicyDecision:
    """Decide with one of the channel-blind baselines.

    Parameters
    ----------
    kind
        One of ``max-age``, ``round-robin`` or ``random``.
    state
        The network at the start of the slot.
    rng
        Stream consumed by the random baseline and by random tie-breaking.
    last_served
        Client served last by round-robin (-1 before the first decision).
    tie
        Tie rule of max-age.

    Returns
    -------
    PolicyDecision
        The chosen client; IDLE when no client has anything new to deliver.
    """
    useful = np.flatnonzero(state.d >= 1)
    if useful.size == 0:
        return IDLE

    if kind == "max-age":
        ages = state.A[useful]
        return PolicyDecision(break_tie(useful[ages == ages.max()], tie, rng))

    if kind == "round-robin":
        n = state.n_clients
        for step in range(1, n + 1):
            client = (last_served + step) % n
            if state.A[client] > state.a[client]:
                return PolicyDecision(client)
        return IDLE

    if kind == "random":
        if rng is None:
            raise ValueError("The random baseline needs a random stream.")
        return PolicyDecision(int(useful[rng.integers(useful.size)]))

    raise ValueError(f"Unknown baseline {kind!r}; expected one of {BASELINES}.")


def decide_from_table(solution: JointSolution, state: NetworkState) -> PolicyDecision:
    """Look up the optimal joint decision, clamping states at the age cap."""
    cap = solution.problem.age_cap
    a = np.minimum(state.a, cap)
    d = np.minimum(state.d, cap)
    index = tuple(((a - 1) * (cap + 1) + d).tolist())
    action = int(solution.policy[index])
    if action == IDLE_ACTION:
        return IDLE
    return PolicyDecision(action - 1)


def _tie_rule(spec: PolicySpec) -> TieRule:
    return TieRule(spec.tie)


class ApproxIndexPolicy(Policy):
    """Serve the client with the largest approximate Whittle index."""

    __slots__ = ("tie", "rng")

    name = "approx-index"

    tie: TieRule
    rng: np.random.Generator

    def __init__(self, tie: TieRule, rng: np.random.Generator) -> None:
        self.tie = tie
        self.rng = rng

    def decide(self, state: NetworkState) -> PolicyDecision:
        return decide_approx_index(state, self.tie, self.rng)

    @classmethod
    def instantiate(
        cls,
        spec: PolicySpec,
        clients: Sequence[ClientParams],
        streams: NetworkStreams,
    ) -> Policy:
        return cls(_tie_rule(spec), streams.tie)


class ArrivalAwarePolicy(ApproxIndexPolicy):
    """The approximate index with every channel treated as reliable."""

    __slots__ = ()

    name = "arrival-aware"

    def decide(self, state: NetworkState) -> PolicyDecision:
        return decide_arrival_aware(state, self.tie, self.rng)


class MaxAgePolicy(ApproxIndexPolicy):
    """Serve the oldest client that has something new to deliver."""

    __slots__ = ()

    name = "max-age"

    def decide(self, state: NetworkState) -> PolicyDecision:
        return decide_baseline(self.name, state, self.rng, tie=self.tie)


class RoundRobinPolicy(Policy):
    """Cycle through clients, skipping those with nothing new to deliver."""

    __slots__ = ("last_served",)

    name = "round-robin"

    last_served: int
    """Client served most recently (-1 before the first decision)."""

    def __init__(self) -> None:
        self.last_served = -1

    def decide(self, state: NetworkState) -> PolicyDecision:
        decision = decide_baseline(self.name, state, last_served=self.last_served)
        if decision.choice is not None:
            self.last_served = decision.choice
        return decision

    @classmethod
    def instantiate(
        cls,
        spec: PolicySpec,
        clients: Sequence[ClientParams],
        streams: NetworkStreams,
    ) -> Policy:
        return cls()


class RandomPolicy(Policy):
    """Serve a uniformly random client among those with something to deliver."""

    __slots__ = ("rng",)

    name = "random"

    rng: np.random.Generator

    def __init__(self, rng: np.random.Generator) -> None:
        self.rng = rng

    def decide(self, state: NetworkState) -> PolicyDecision:
        return decide_baseline(self.name, state, self.rng)

    @classmethod
    def instantiate(
        cls,
        spec: PolicySpec,
        clients: Sequence[ClientParams],
        streams: NetworkStreams,
    ) -> Policy:
        return cls(streams.policy)


class OptimalTablePolicy(Policy):
    """Follow the decision table of the solved joint problem."""

    __slots__ = ("solution",)

    name = "optimal-table"

    solution: JointSolution

    def __init__(self, solution: JointSolution) -> None:
        self.solution = solution

    def decide(self, state: NetworkState) -> PolicyDecision:
        return decide_from_table(self.solution, state)

    @classmethod
    def instantiate(
        cls,
        spec: PolicySpec,
        clients: Sequence[ClientParams],
        streams: NetworkStreams,
    ) -> Policy:
        if len(clients) > MAX_JOINT_CLIENTS:
            raise ConfigError(
                f"optimal-table supports at most {MAX_JOINT_CLIENTS} clients, "
                f"got {len(clients)}.",
                source="policy",
            )
        age_cap = int(spec.option("age_cap", 16))
        return cls(cached_joint_solution(JointProblem(tuple(clients), age_cap)))


BUILTIN_POLICIES: tuple[type[Policy], ...] = (
    ApproxIndexPolicy,
    ArrivalAwarePolicy,
    MaxAgePolicy,
    RoundRobinPolicy,
    RandomPolicy,
    OptimalTablePolicy,
)
