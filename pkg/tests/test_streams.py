"""Keyed random stream unit tests.

"""

from __future__ import annotations

import numpy as np
import pytest

from freshcast.streams import ClientStreams, NetworkStreams, keyed_generator


def test_keyed_generator_is_reproducible() -> None:
    first = keyed_generator(42, 1, 3, "arrival").random(5)
    second = keyed_generator(42, 1, 3, "arrival").random(5)

    np.testing.assert_array_equal(first, second)


def test_keys_are_independent() -> None:
    base = keyed_generator(42, 1, 3, "arrival").random(5)

    for other in (
        keyed_generator(43, 1, 3, "arrival"),
        keyed_generator(42, 2, 3, "arrival"),
        keyed_generator(42, 1, 4, "arrival"),
        keyed_generator(42, 1, 3, "channel"),
    ):
        assert not np.array_equal(base, other.random(5))


def test_unknown_purpose() -> None:
    with pytest.raises(KeyError):
        keyed_generator(1, 1, 0, "weather")


def test_uniforms_at_matches_block() -> None:
    arrivals, channels = ClientStreams(9, 2, 1).block(20)

    stream = ClientStreams(9, 2, 1)
    assert stream.uniforms_at(4) == (arrivals[3], channels[3])
    assert stream.uniforms_at(20) == (arrivals[19], channels[19])
    assert stream.next_slot == 21


def test_network_block_shape() -> None:
    streams = NetworkStreams(5, 1, 3)

    arrivals, channels = streams.block(7)

    assert arrivals.shape == (3, 7)
    assert channels.shape == (3, 7)

    single_arrivals, _ = ClientStreams(5, 1, 2).block(7)
    np.testing.assert_array_equal(arrivals[2], single_arrivals)


def test_block_draws_continue() -> None:
    whole, _ = ClientStreams(5, 1, 0).block(10)

    stream = ClientStreams(5, 1, 0)
    head, _ = stream.block(4)
    tail, _ = stream.block(6)

    np.testing.assert_array_equal(whole, np.concatenate([head, tail]))
