"""Scheduling policy tests.

"""

from __future__ import annotations

from typing import Sequence

import numpy as np
import pytest

from freshcast.config import PolicySpec
from freshcast.errors import ConfigError, UnknownPolicyError
from freshcast.libraries import PolicyLibrary, default_policy_library
from freshcast.model import ClientParams, ClientState
from freshcast.oracle.joint import JointProblem, solve_joint_optimal
from freshcast.policies import (
    IDLE,
    ApproxIndexPolicy,
    NetworkState,
    OptimalTablePolicy,
    Policy,
    PolicyDecision,
    RoundRobinPolicy,
    TieRule,
    break_tie,
    decide_approx_index,
    decide_arrival_aware,
    decide_baseline,
    decide_from_table,
)
from freshcast.streams import NetworkStreams


def _state(ad: list[tuple[int, int]], params: list[tuple[float, float]]) -> NetworkState:
    return NetworkState.from_states(
        [ClientState.from_ad(a, d) for a, d in ad],
        [ClientParams(lam, p) for lam, p in params],
    )


def test_idle_when_nothing_is_new() -> None:
    state = _state([(1, 0), (3, 0)], [(0.5, 0.5), (0.5, 0.9)])

    assert decide_approx_index(state) == IDLE
    assert decide_arrival_aware(state) == IDLE
    assert decide_baseline("max-age", state) == IDLE
    assert decide_baseline("round-robin", state) == IDLE
    assert decide_baseline("random", state, np.random.default_rng(0)) == IDLE
    assert IDLE.is_idle


def test_largest_index_is_served() -> None:
    state = _state([(2, 4), (1, 1)], [(0.5, 0.5), (0.5, 0.5)])

    assert decide_approx_index(state) == PolicyDecision(0)


def test_channel_quality_changes_choice() -> None:
    # Same state, the reliable client wins under the index but not when the
    # channel is ignored
    state = _state([(1, 6), (1, 6)], [(0.5, 0.1), (0.5, 0.9)])

    assert decide_approx_index(state) == PolicyDecision(1)
    assert decide_arrival_aware(state) == PolicyDecision(0)


def test_lowest_index_tie_break() -> None:
    state = _state([(1, 3), (1, 3), (1, 3)], [(0.5, 0.5)] * 3)

    assert decide_approx_index(state) == PolicyDecision(0)


def test_random_tie_break_spreads_choices() -> None:
    state = _state([(1, 3), (1, 3), (1, 3)], [(0.5, 0.5)] * 3)
    rng = np.random.default_rng(42)

    chosen = {decide_approx_index(state, TieRule.RANDOM, rng).choice for _ in range(200)}

    assert chosen == {0, 1, 2}


def test_break_tie_needs_stream() -> None:
    with pytest.raises(ValueError):
        break_tie(np.array([0, 1]), TieRule.RANDOM, None)

    assert break_tie(np.array([4]), TieRule.RANDOM, None) == 4


def test_max_age_ignores_stale_clients() -> None:
    # Client 0 is the oldest but has nothing new
    state = _state([(9, 0), (1, 2), (2, 1)], [(0.5, 0.5)] * 3)

    assert decide_baseline("max-age", state) == PolicyDecision(1)


def test_round_robin_cycles() -> None:
    policy = RoundRobinPolicy()
    state = _state([(1, 1), (1, 0), (1, 1)], [(0.5, 0.5)] * 3)

    assert policy.decide(state) == PolicyDecision(0)
    assert policy.decide(state) == PolicyDecision(2)
    assert policy.decide(state) == PolicyDecision(0)
    assert policy.last_served == 0


def test_random_baseline_only_picks_useful_clients() -> None:
    state = _state([(1, 1), (1, 0), (1, 1)], [(0.5, 0.5)] * 3)
    rng = np.random.default_rng(3)

    chosen = {decide_baseline("random", state, rng).choice for _ in range(100)}

    assert chosen == {0, 2}


def test_unknown_baseline() -> None:
    state = _state([(1, 1)], [(0.5, 0.5)])

    with pytest.raises(ValueError):
        decide_baseline("longest-queue", state)


def test_table_lookup_clamps_at_cap() -> None:
    clients = [ClientParams(1, 1), ClientParams(1, 1)]
    solution = solve_joint_optimal(JointProblem(clients, age_cap=6))

    assert decide_from_table(solution, _state([(1, 1), (1, 2)], [(1, 1)] * 2)) == (
        PolicyDecision(1)
    )
    assert decide_from_table(solution, _state([(1, 0), (1, 0)], [(1, 1)] * 2)) == IDLE
    # Far beyond the cap behaves like the cap
    far = decide_from_table(solution, _state([(1, 40), (1, 2)], [(1, 1)] * 2))
    assert far == PolicyDecision(0)


def test_optimal_table_rejects_large_networks() -> None:
    clients = [ClientParams(0.5, 0.5)] * 3
    streams = NetworkStreams(1, 1, 3)

    with pytest.raises(ConfigError):
        OptimalTablePolicy.instantiate(PolicySpec("optimal-table"), clients, streams)


def test_optimal_table_reads_age_cap() -> None:
    clients = [ClientParams(0.6, 0.9), ClientParams(0.6, 0.6)]
    spec = PolicySpec("optimal-table", options={"age_cap": 8})

    policy = OptimalTablePolicy.instantiate(spec, clients, NetworkStreams(1, 1, 2))

    assert isinstance(policy, OptimalTablePolicy)
    assert policy.solution.problem.age_cap == 8


def test_default_library() -> None:
    library = default_policy_library()

    assert library.policy_names == [
        "approx-index",
        "arrival-aware",
        "max-age",
        "round-robin",
        "random",
        "optimal-table",
    ]
    assert "approx-index" in library
    assert "shortest-queue" not in library

    with pytest.raises(UnknownPolicyError) as info:
        library.get_policy_type("shortest-queue")

    assert info.value.policy_name == "shortest-queue"
    assert "max-age" in info.value.known


def test_library_creates_policies() -> None:
    library = default_policy_library()
    clients = [ClientParams(0.5, 0.5)] * 2

    policy = library.create(
        PolicySpec("approx-index", tie="random"), clients, NetworkStreams(5, 1, 2)
    )

    assert isinstance(policy, ApproxIndexPolicy)
    assert policy.tie is TieRule.RANDOM
    assert str(policy) == "approx-index"


class _AlwaysFirst(Policy):
    name = "always-first"

    def decide(self, state: NetworkState) -> PolicyDecision:
        return PolicyDecision(0)

    @classmethod
    def instantiate(
        cls,
        spec: PolicySpec,
        clients: Sequence[ClientParams],
        streams: NetworkStreams,
    ) -> Policy:
        return cls()


def test_custom_policy_registration() -> None:
    library = PolicyLibrary()
    library.add_policy_type(_AlwaysFirst)

    policy = library.create(
        PolicySpec("always-first"), [ClientParams(1, 1)], NetworkStreams(1, 1, 1)
    )

    assert library.policy_names == ["always-first"]
    assert policy.decide(_state([(1, 0)], [(1, 1)])) == PolicyDecision(0)


def test_network_state_views() -> None:
    state = _state([(2, 3), (1, 0)], [(0.2, 0.4), (0.6, 0.8)])

    assert state.n_clients == 2
    assert state.d.tolist() == [3, 0]
    assert state.states == [ClientState(2, 5), ClientState(1, 1)]
    assert state.params == [ClientParams(0.2, 0.4), ClientParams(0.6, 0.8)]

    with pytest.raises(ValueError):
        NetworkState(a=[1, 2], A=[1], lam=[0.5, 0.5], p=[0.5, 0.5])


def test_reliable_index_example() -> None:
    state = _state([(1, 3), (1, 2)], [(1, 1), (1, 1)])

    assert decide_approx_index(state) == PolicyDecision(0)


def test_index_policies_agree_on_reliable_channels() -> None:
    rng = np.random.default_rng(11)
    lam = [0.2, 0.5, 0.9, 0.35]

    for _ in range(200):
        a = rng.integers(1, 12, size=4)
        d = rng.integers(0, 15, size=4)
        state = NetworkState(a=a, A=a + d, lam=lam, p=np.ones(4))
        assert decide_approx_index(state) == decide_arrival_aware(state)


def test_max_age_example() -> None:
    state = _state([(8, 1), (3, 1)], [(0.5, 0.5)] * 2)

    assert decide_baseline("max-age", state) == PolicyDecision(0)


def test_round_robin_successor() -> None:
    state = _state([(1, 1)] * 3, [(0.5, 0.5)] * 3)

    assert decide_baseline("round-robin", state, last_served=1) == PolicyDecision(2)
    assert decide_baseline("round-robin", state, last_served=2) == PolicyDecision(0)
