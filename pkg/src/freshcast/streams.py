"""Keyed random sub-streams.

Every random draw in a simulation is addressed by (seed, replication, client,
purpose, slot). Each (seed, replication, client, purpose) tuple seeds its own
numpy generator through a SeedSequence spawn key, and slot ``t`` always consumes
the ``t``-th value of that generator. Draws therefore do not depend on which
policy runs or in which order clients are visited, which gives common random
numbers across policies for free.

"""

from __future__ import annotations

from typing import ClassVar

import numpy as np
import numpy.typing as npt

PURPOSES: dict[str, int] = {"arrival": 0, "channel": 1, "policy": 2, "tie": 3}
"""Stream purposes mapped to the spawn-key component that separates them."""


def keyed_generator(
    seed: int, replication: int, client: int, purpose: str
) -> np.random.Generator:
    """Create the generator for one (seed, replication, client, purpose) key.

    Parameters
    ----------
    seed
        The experiment seed.
    replication
        The replication number.
    client
        The client index (0 for network-wide purposes).
    purpose
        One of the names in PURPOSES.

    Returns
    -------
    np.random.Generator
        A generator that is independent of every other key.
    """
    sequence = np.random.SeedSequence(
        entropy=seed, spawn_key=(replication, client, PURPOSES[purpose])
    )
    return np.random.Generator(np.random.PCG64(sequence))


class ClientStreams:
    """Arrival and channel streams of one client in one replication."""

    __slots__ = ("_arrival", "_channel", "_next_slot")

    _arrival: np.random.Generator
    """Uniforms compared against the arrival probability."""
    _channel: np.random.Generator
    """Uniforms compared against the channel success probability."""
    _next_slot: int
    """The 1-based slot whose draws come next."""

    def __init__(self, seed: int, replication: int, client: int) -> None:
        self._arrival = keyed_generator(seed, replication, client, "arrival")
        self._channel = keyed_generator(seed, replication, client, "channel")
        self._next_slot = 1

    @property
    def next_slot(self) -> int:
        """The slot whose draws will be returned next."""
        return self._next_slot

    def uniforms_at(self, slot: int) -> tuple[float, float]:
        """Get the (arrival, channel) uniforms of a slot.

        Slots may be skipped but never revisited.
        """
        if slot < self._next_slot:
            raise ValueError(
                f"Slot {slot} was already drawn; next slot is {self._next_slot}."
            )
        skipped = slot - self._next_slot
        if skipped:
            self._arrival.random(skipped)
            self._channel.random(skipped)
        self._next_slot = slot + 1
        return float(self._arrival.random()), float(self._channel.random())

    def block(self, n_slots: int) -> tuple[npt.NDArray[np.float64], ...]:
        """Get the (arrival, channel) uniforms of the next ``n_slots`` slots."""
        self._next_slot += n_slots
        return self._arrival.random(n_slots), self._channel.random(n_slots)


class NetworkStreams:
    """All random streams of one replication."""

    __slots__ = ("clients", "policy", "tie")

    BLOCK_SIZE: ClassVar[int] = 4096
    """Slots drawn at once by the simulator."""

    clients: list[ClientStreams]
    """Per-client arrival and channel streams."""
    policy: np.random.Generator
    """Stream consumed by randomised policies."""
    tie: np.random.Generator
    """Stream consumed by random tie-breaking."""

    def __init__(self, seed: int, replication: int, n_clients: int) -> None:
        self.clients = [ClientStreams(seed, replication, i) for i in range(n_clients)]
        self.policy = keyed_generator(seed, replication, 0, "policy")
        self.tie = keyed_generator(seed, replication, 0, "tie")

    def block(
        self, n_slots: int
    ) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
        """Get (clients x n_slots) arrays of arrival and channel uniforms."""
        draws = [stream.block(n_slots) for stream in self.clients]
        arrivals = np.stack([arrival for arrival, _ in draws])
        channels = np.stack([channel for _, channel in draws])
        return arrivals, channels
