"""Closed-form index unit tests.

"""

from __future__ import annotations

import itertools

import numpy as np
import pytest

from freshcast.index import (
    LINEAR,
    QUADRATIC,
    approx_index,
    approx_index_array,
    d1_upper,
    delta,
    dstar,
    lower_bound,
    p_sensitivity,
    threshold_bounds,
    threshold_upper,
)
from freshcast.model import ClientParams


def test_reliable_fresh_index() -> None:
    """With lambda = p = 1 the index of (1, d) is d(d+1)/2."""
    params = ClientParams(1, 1)

    for d in range(1, 51):
        assert approx_index(1, d, params).w == d * (d + 1) / 2


def test_quadratic_branch() -> None:
    value = approx_index(2, 4, ClientParams(0.5, 0.5))

    assert value.branch == QUADRATIC
    assert value.x == pytest.approx(3.25)
    assert value.w == pytest.approx(6.703125)
    assert float(value) == value.w


def test_zero_reduction_is_zero() -> None:
    value = approx_index(5, 0, ClientParams(0.5, 0.5))

    assert value.branch == LINEAR
    assert value.w == 0.0


def test_linear_branch() -> None:
    params = ClientParams(0.5, 0.5)
    value = approx_index(10, 1, params)

    assert value.branch == LINEAR
    assert value.condition_lhs < value.condition_rhs
    assert value.w == pytest.approx(params.p * 1 * delta(params))


def test_always_arriving_index() -> None:
    """With lambda = 1 the index of (1, d) is (p/2) d^2 + (1 - p/2) d."""
    for p in (0.1, 0.4, 0.75, 1.0):
        params = ClientParams(1, p)
        for d in range(1, 20):
            expected = p / 2 * d * d + (1 - p / 2) * d
            assert approx_index(1, d, params).w == pytest.approx(expected)


def test_index_rejects_bad_states() -> None:
    with pytest.raises(ValueError):
        approx_index(0, 1, ClientParams(0.5, 0.5))

    with pytest.raises(ValueError):
        approx_index(1, -1, ClientParams(0.5, 0.5))


def test_array_matches_scalar() -> None:
    grid = list(
        itertools.product(
            range(1, 12), range(0, 15), (0.1, 0.5, 1.0), (0.2, 0.6, 1.0)
        )
    )
    a, d, lam, p = (np.array(column) for column in zip(*grid))

    values = approx_index_array(a, d, lam, p)

    for k, (a_k, d_k, lam_k, p_k) in enumerate(grid):
        assert values[k] == approx_index(a_k, d_k, ClientParams(lam_k, p_k)).w


def test_index_grows_with_reduction() -> None:
    params = ClientParams(0.3, 0.7)

    for a in range(1, 15):
        values = [approx_index(a, d, params).w for d in range(0, 40)]
        assert values == sorted(values)


def test_linear_branch_grows_with_p() -> None:
    values = [approx_index(10, 1, ClientParams(0.5, p)).w for p in (0.2, 0.5, 0.9)]

    assert values == sorted(values)


def test_p_sensitivity_linear_branch() -> None:
    sensitivity = p_sensitivity(10, 1, 0.5, [0.8, 0.9, 1.0])

    assert sensitivity.slope == pytest.approx(1 / 0.5 - 1)
    assert sensitivity.max_residual == pytest.approx(0.0, abs=1e-9)

    with pytest.raises(ValueError):
        p_sensitivity(1, 1, 0.5, [1.0])


def test_threshold_quantities() -> None:
    params = ClientParams(0.5, 0.5)

    assert delta(params) == pytest.approx(3.0)
    assert dstar(6, params) == pytest.approx(4.0)
    assert d1_upper(6, params) == pytest.approx(3.0)
    assert threshold_upper(1, 6, params) == pytest.approx(3.0)
    assert threshold_upper(10, 6, params) == pytest.approx(6 / (0.5 * 3.0))

    bounds = threshold_bounds(6, params)
    assert bounds.dstar == pytest.approx(4.0)
    assert bounds.per_a_upper(10) == threshold_upper(10, 6, params)

    with pytest.raises(ValueError):
        dstar(-1, params)


def test_lower_bound() -> None:
    assert lower_bound([1.0, 1.0, 1.0, 1.0], 4) == pytest.approx(2.5)
    assert lower_bound([0.9] * 5 + [0.1] * 5, 10) == pytest.approx(200 / 9 + 0.5)
    assert lower_bound([0.25], 1) == pytest.approx(2.5)

    with pytest.raises(ValueError):
        lower_bound([0.5], 2)

    with pytest.raises(ValueError):
        lower_bound([0.0], 1)


def test_first_case_threshold_bound() -> None:
    params = ClientParams(0.5, 0.5)

    assert threshold_upper(2, 6, params) == pytest.approx(11 / 3)
    assert threshold_upper(1, 0, params) == 0.0
    assert threshold_upper(7, 0, params) == 0.0


def test_dstar_identity() -> None:
    for lam, p, w in itertools.product((0.1, 0.5, 1.0), (0.2, 0.7, 1.0), (0.5, 6, 80)):
        params = ClientParams(lam, p)
        assert dstar(w, params) == pytest.approx(w / (p * delta(params)), rel=1e-12)


def test_branches_meet_on_switching_surface() -> None:
    for a, lam, p in itertools.product((1, 2, 5, 13), (0.2, 0.6, 1.0), (0.3, 1.0)):
        params = ClientParams(lam, p)
        big_delta = delta(params)
        d = a * ((a - 1) / 2 + big_delta) / big_delta
        x = (d * big_delta + a * (a - 1) / 2) / (a - 1 + big_delta)

        quadratic = p / 2 * x * x + p * (big_delta - 0.5) * x
        linear = p * d * big_delta

        assert quadratic == pytest.approx(linear, abs=1e-9)


def test_index_scales_with_channel_quality() -> None:
    """The index equals p times the reliable-channel index at 1/lambda' = Delta."""
    for a, d, lam, p in itertools.product((1, 3, 8), (1, 4, 9), (0.2, 0.9), (0.1, 0.6)):
        params = ClientParams(lam, p)
        reliable = ClientParams(1 / delta(params), 1)

        assert approx_index(a, d, params).w == pytest.approx(
            p * approx_index(a, d, reliable).w, rel=1e-12
        )


def test_lower_bound_symmetries() -> None:
    ps = [0.9, 0.3, 0.5, 1.0]

    assert lower_bound([1.0], 1) == pytest.approx(1.0)
    assert lower_bound(ps, 4) == pytest.approx(lower_bound(ps[::-1], 4))
    assert lower_bound(ps * 2, 8) - 0.5 == pytest.approx(2 * (lower_bound(ps, 4) - 0.5))
