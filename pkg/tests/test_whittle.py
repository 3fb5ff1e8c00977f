"""Numeric Whittle index tests.

"""

from __future__ import annotations

import itertools

import pytest

from freshcast.errors import BracketError, IndexabilityError
from freshcast.index import approx_index
from freshcast.model import ClientParams
from freshcast.oracle.whittle import WhittleProbe, _check_monotone, numeric_whittle


def test_zero_reduction() -> None:
    assert numeric_whittle(4, 0, ClientParams(0.5, 0.5)) == 0.0


def test_reliable_fresh_state() -> None:
    value = numeric_whittle(1, 3, ClientParams(1, 1), tol_w=1e-3)

    assert value == pytest.approx(6.0, abs=2e-3)


def test_dominates_approximation() -> None:
    params = ClientParams(0.5, 0.5)

    value = numeric_whittle(2, 4, params, tol_w=1e-3)

    assert value >= 6.703125 - 1e-3


@pytest.mark.parametrize(
    "lam,p,a,d",
    list(itertools.product((0.5, 0.8), (0.5, 0.9), (1, 2, 5, 10), (1, 3, 8))),
)
def test_sampled_dominance(lam: float, p: float, a: int, d: int) -> None:
    params = ClientParams(lam, p)

    value = numeric_whittle(a, d, params, tol_w=1e-3)

    assert approx_index(a, d, params).w <= value + 1e-3


def test_bracket_failure() -> None:
    with pytest.raises(BracketError) as info:
        numeric_whittle(1, 3, ClientParams(1, 1), w_hi=0.5)

    assert info.value.state == (1, 3)
    assert info.value.w_hi == 0.5


def test_non_monotone_probes() -> None:
    probes = [WhittleProbe(4.0, True), WhittleProbe(2.0, True), WhittleProbe(3.0, False)]

    with pytest.raises(IndexabilityError) as info:
        _check_monotone((1, 2), probes)

    assert info.value.state == (1, 2)
    assert len(info.value.probes) == 3


def test_monotone_probes() -> None:
    probes = [WhittleProbe(4.0, True), WhittleProbe(1.0, False), WhittleProbe(3.0, True)]

    _check_monotone((1, 2), probes)


def test_invalid_arguments() -> None:
    with pytest.raises(ValueError):
        numeric_whittle(0, 1, ClientParams(0.5, 0.5))

    with pytest.raises(ValueError):
        numeric_whittle(1, 1, ClientParams(0.5, 0.5), tol_w=0)
