"""Abstract base types for implementing scheduling policies.

"""

from __future__ import annotations

import enum
from abc import ABC, abstractmethod
from typing import ClassVar, Optional, Sequence

import attrs
import numpy as np
import numpy.typing as npt

from freshcast.config import PolicySpec
from freshcast.model import ClientParams, ClientState
from freshcast.streams import NetworkStreams

IntArray = npt.NDArray[np.int64]
FloatArray = npt.NDArray[np.float64]


class TieRule(enum.Enum):
    """How a policy picks among equally urgent clients."""

    LOWEST_INDEX = "lowest-index"
    RANDOM = "random"


@attrs.define(frozen=True)
class PolicyDecision:
    """The client served in a slot, or None when the base station idles."""

    choice: Optional[int] = None

    @property
    def is_idle(self) -> bool:
        return self.choice is None


IDLE = PolicyDecision()
"""The idle decision."""


@attrs.define(frozen=True, eq=False)
class NetworkState:
    """Every client's state at the start of a slot.

    The simulator hands policies read-only views of its own arrays; policies must
    not keep references to them across slots.
    """

    a: IntArray = attrs.field(converter=lambda v: np.asarray(v, dtype=np.int64))
    """Queuing delay of each client's buffered packet."""
    A: IntArray = attrs.field(converter=lambda v: np.asarray(v, dtype=np.int64))
    """AoI of each client."""
    lam: FloatArray = attrs.field(converter=lambda v: np.asarray(v, dtype=np.float64))
    """Arrival probability of each client."""
    p: FloatArray = attrs.field(converter=lambda v: np.asarray(v, dtype=np.float64))
    """Channel success probability of each client."""
    t: int = attrs.field(default=1, validator=attrs.validators.ge(1))
    """The current slot."""

    def __attrs_post_init__(self) -> None:
        n = self.a.shape[0]
        if not self.A.shape[0] == self.lam.shape[0] == self.p.shape[0] == n:
            raise ValueError("All per-client arrays must have the same length.")

    @classmethod
    def from_states(
        cls,
        states: Sequence[ClientState],
        params: Sequence[ClientParams],
        t: int = 1,
    ) -> NetworkState:
        """Build a network state from per-client objects."""
        if len(states) != len(params):
            raise ValueError(
                f"Got {len(states)} client states for {len(params)} clients."
            )
        return cls(
            a=[s.a for s in states],
            A=[s.A for s in states],
            lam=[c.lam for c in params],
            p=[c.p for c in params],
            t=t,
        )

    @property
    def d(self) -> IntArray:
        """AoI reduction a delivery would achieve for each client."""
        return self.A - self.a

    @property
    def n_clients(self) -> int:
        return int(self.a.shape[0])

    @property
    def states(self) -> list[ClientState]:
        """Per-client state objects."""
        return [ClientState(a=a, A=A) for a, A in zip(self.a.tolist(), self.A.tolist())]

    @property
    def params(self) -> list[ClientParams]:
        """Per-client statistics."""
        return [ClientParams(lam, p) for lam, p in zip(self.lam.tolist(), self.p.tolist())]


def break_tie(
    candidates: IntArray, rule: TieRule, rng: Optional[np.random.Generator]
) -> int:
    """Pick one client out of a nonempty array of tied candidates."""
    if candidates.size == 1 or rule is TieRule.LOWEST_INDEX:
        return int(candidates[0])
    if rng is None:
        raise ValueError("Random tie-breaking needs a random stream.")
    return int(candidates[rng.integers(candidates.size)])


class Policy(ABC):
    """Abstract base class for all scheduling policies."""

    name: ClassVar[str]
    """Name the policy is registered under."""

    @abstractmethod
    def decide(self, state: NetworkState) -> PolicyDecision:
        """Choose the client to serve in the current slot."""
        raise NotImplementedError()

    @classmethod
    @abstractmethod
    def instantiate(
        cls,
        spec: PolicySpec,
        clients: Sequence[ClientParams],
        streams: NetworkStreams,
    ) -> Policy:
        """Construct a new instance of the policy for one replication."""
        raise NotImplementedError()

    def __str__(self) -> str:
        return self.name
