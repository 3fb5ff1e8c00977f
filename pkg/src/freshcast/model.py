"""Per-client state dynamics.

A client is described by its arrival probability and channel success probability.
Its state is the queuing delay ``a`` of the freshest packet buffered at the base
station and the age of information ``A`` at the client. Scheduling happens at the
beginning of a slot, arrivals at its end, and only the newest packet per client is
kept (one-buffer packet management).

"""

from __future__ import annotations

import math
from typing import TYPE_CHECKING, Sequence

import attrs

if TYPE_CHECKING:
    from freshcast.streams import ClientStreams

MAX_HORIZON = 10**9
"""Largest supported number of slots; ages are stored as 64-bit integers."""


def _probability(_: object, attribute: attrs.Attribute[float], value: float) -> None:
    if not 0.0 < value <= 1.0:
        raise ValueError(f"{attribute.name} must lie in (0, 1], got {value!r}.")


@attrs.define(frozen=True)
class ClientParams:
    """Arrival and channel statistics of one client."""

    lam: float = attrs.field(converter=float, validator=_probability)
    """Per-slot probability that a fresh packet arrives at the base station."""
    p: float = attrs.field(converter=float, validator=_probability)
    """Per-slot probability that a transmission to the client succeeds."""

    def __str__(self) -> str:
        return f"(lambda={self.lam:.9g}, p={self.p:.9g})"


def _check_state(instance: ClientState, _: object, __: object) -> None:
    if not 1 <= instance.a <= instance.A:
        raise ValueError(
            f"Client state must satisfy 1 <= a <= A, got a={instance.a}, "
            f"A={instance.A}."
        )


@attrs.define(frozen=True)
class ClientState:
    """The queuing delay of the buffered packet and the client's AoI."""

    a: int = attrs.field(converter=int)
    """Age of the freshest packet buffered at the base station."""
    A: int = attrs.field(converter=int, validator=_check_state)
    """Age of information at the client."""

    @property
    def d(self) -> int:
        """The AoI reduction a successful delivery would achieve."""
        return self.A - self.a

    @classmethod
    def initial(cls) -> ClientState:
        """The state of every client at the first slot."""
        return cls(a=1, A=1)

    @classmethod
    def from_ad(cls, a: int, d: int) -> ClientState:
        """Build a state from its (a, d) coordinates."""
        return cls(a=a, A=a + d)


@attrs.define(frozen=True)
class SlotOutcome:
    """Realised randomness of one client in one slot."""

    arrival: bool
    """A fresh packet arrived at the end of the slot."""
    channel: bool
    """The link to the client was good during the slot."""


def step_client(
    state: ClientState, scheduled: bool, outcome: SlotOutcome
) -> ClientState:
    """Advance one client by one slot.

    Parameters
    ----------
    state
        The client's state at the start of the slot.
    scheduled
        True if the base station transmits to this client in this slot.
    outcome
        The slot's arrival and channel realisations.

    Returns
    -------
    ClientState
        The state at the start of the next slot.
    """
    if scheduled and outcome.channel:
        next_aoi = state.a + 1
    else:
        next_aoi = state.A + 1

    next_delay = 1 if outcome.arrival else state.a + 1

    return ClientState(a=next_delay, A=next_aoi)


def sample_outcome(
    params: ClientParams, stream: ClientStreams, slot: int
) -> SlotOutcome:
    """Draw a client's arrival and channel bits for one slot.

    Parameters
    ----------
    params
        The client's statistics.
    stream
        The client's keyed random sub-streams.
    slot
        The 1-based slot number; slots must be requested in increasing order.

    Returns
    -------
    SlotOutcome
        The realised arrival and channel bits.
    """
    arrival_u, channel_u = stream.uniforms_at(slot)
    return SlotOutcome(arrival=arrival_u < params.lam, channel=channel_u < params.p)


def average_aoi(trace: Sequence[float], n_clients: int) -> float:
    """Finite-horizon estimate of the average AoI.

    Parameters
    ----------
    trace
        Per-slot sums of the clients' AoI, sampled at the start of each slot.
    n_clients
        Number of clients in the network.

    Returns
    -------
    float
        The time and client average of the AoI.
    """
    if len(trace) == 0:
        raise ValueError("Cannot average an empty AoI trace.")
    if n_clients < 1:
        raise ValueError(f"n_clients must be positive, got {n_clients}.")

    return math.fsum(trace) / (len(trace) * n_clients)
