"""Decoupled MDP solver tests.

"""

from __future__ import annotations

import numpy as np
import pytest

from freshcast.errors import NonConvergenceError, TruncationError
from freshcast.model import ClientParams
from freshcast.oracle.decoupled import (
    ACTIVE,
    PASSIVE,
    DecoupledProblem,
    MdpSolution,
    bellman_q,
    extract_active_passive,
    solve_decoupled,
)


@pytest.fixture(scope="module")
def half_half() -> MdpSolution:
    problem = DecoupledProblem.with_default_truncation(ClientParams(0.5, 0.5), 6)
    return solve_decoupled(problem)


def test_default_truncation_sizes() -> None:
    problem = DecoupledProblem.with_default_truncation(ClientParams(0.5, 0.5), 6)

    assert problem.a_interior == 12
    assert problem.k_interior == 26
    assert problem.a_max > problem.a_interior
    assert problem.d_max > problem.k_interior

    mask = problem.interior_mask()
    assert mask.shape == problem.shape
    assert mask[0, 0]
    assert not mask[-1, 0]


def test_small_truncation_is_rejected() -> None:
    with pytest.raises(TruncationError):
        DecoupledProblem(ClientParams(0.5, 0.5), w=50, a_max=5, d_max=5)


def test_no_subsidy_reliable_network() -> None:
    """Without a subsidy every useful update is taken; the AoI cycles at 2."""
    problem = DecoupledProblem.with_default_truncation(ClientParams(1, 1), 0)

    sol = solve_decoupled(problem)

    # Post-decision cost: the pre-decision AoI of 2 minus one slot
    assert sol.J + 1 == pytest.approx(2.0, abs=1e-9)

    _, passive = extract_active_passive(sol)
    assert all(d == 0 for _, d in passive)


def test_thresholds_settle(half_half: MdpSolution) -> None:
    problem = half_half.problem

    for a in range(4, problem.a_interior + 1):
        assert abs(half_half.threshold(a) - 4) <= 1


def test_bias_normalisation(half_half: MdpSolution) -> None:
    assert half_half.h_at(1, 0) == 0.0
    assert half_half.iterations > 0
    assert half_half.span < half_half.tol


def test_thresholds_match_actions(half_half: MdpSolution) -> None:
    for a, threshold in enumerate(half_half.thresholds, start=1):
        if threshold > 0:
            assert half_half.action_at(a, threshold - 1) == PASSIVE
        if threshold <= half_half.problem.d_max:
            assert half_half.action_at(a, threshold) == ACTIVE


def test_bellman_residual(half_half: MdpSolution) -> None:
    problem = half_half.problem
    mu0, mu1 = bellman_q(problem, half_half.h)

    residual = np.abs(half_half.h + half_half.J - np.minimum(mu0, mu1))

    assert residual[problem.interior_mask()].max() < 10 * half_half.tol


def test_reliable_channel_bias_flat_beyond_threshold() -> None:
    problem = DecoupledProblem.with_default_truncation(ClientParams(0.5, 1), 6)
    sol = solve_decoupled(problem)

    for a in range(1, problem.a_interior + 1):
        row = sol.h[a - 1, sol.threshold(a) :]
        assert row.size > 0
        assert np.ptp(row) < 1e-8


def test_partition(half_half: MdpSolution) -> None:
    active, passive = extract_active_passive(half_half)
    problem = half_half.problem

    assert len(active) + len(passive) == problem.a_max * (problem.d_max + 1)
    assert not set(active) & set(passive)
    assert (1, 0) in passive
    assert list(active) == sorted(active)


def test_huge_subsidy_makes_everything_passive() -> None:
    params = ClientParams(0.5, 0.5)
    problem = DecoupledProblem(params, w=1000, a_max=10, d_max=10, strict=False)

    sol = solve_decoupled(problem)
    active, passive = extract_active_passive(sol)

    assert len(active) == 0
    assert len(passive) == 10 * 11
    assert set(sol.thresholds) == {11}


def test_non_convergence() -> None:
    problem = DecoupledProblem.with_default_truncation(ClientParams(0.5, 0.5), 6)

    with pytest.raises(NonConvergenceError) as info:
        solve_decoupled(problem, max_iter=3)

    assert info.value.iterations == 3
    assert info.value.span > 0


def test_warm_start_gives_same_answer(half_half: MdpSolution) -> None:
    sol = solve_decoupled(half_half.problem, h0=half_half.h)

    assert sol.J == pytest.approx(half_half.J, abs=1e-8)
    assert sol.thresholds == half_half.thresholds
    assert sol.iterations < half_half.iterations


def test_truncation_insensitivity(half_half: MdpSolution) -> None:
    problem = half_half.problem
    larger = DecoupledProblem(
        problem.params,
        w=problem.w,
        a_max=int(problem.a_max * 1.5),
        d_max=int(problem.d_max * 1.5),
    )

    sol = solve_decoupled(larger)

    assert sol.J == pytest.approx(half_half.J, abs=1e-6)
    for a in range(1, problem.a_interior + 1):
        assert sol.threshold(a) == half_half.threshold(a)


def test_invalid_tolerance(half_half: MdpSolution) -> None:
    with pytest.raises(ValueError):
        solve_decoupled(half_half.problem, tol=0)
