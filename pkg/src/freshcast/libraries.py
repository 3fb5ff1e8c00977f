"""Policy library.

Policies are looked up by the name used in configuration files and on the command
line. This makes it easy to add a custom policy type without touching the
simulator.

"""

from __future__ import annotations

from typing import Iterable, Optional, Sequence, Type

from freshcast.config import PolicySpec
from freshcast.errors import UnknownPolicyError
from freshcast.model import ClientParams
from freshcast.policies.base_types import Policy
from freshcast.policies.defaults import BUILTIN_POLICIES
from freshcast.streams import NetworkStreams


class PolicyLibrary:
    """Manages policy types and constructs them when needed."""

    __slots__ = ("_policy_types",)

    _policy_types: dict[str, Type[Policy]]
    """Policy names mapped to policy types."""

    def __init__(self, policy_types: Optional[Iterable[Type[Policy]]] = None) -> None:
        self._policy_types = {}
        for policy_type in policy_types if policy_types is not None else ():
            self.add_policy_type(policy_type)

    @property
    def policy_names(self) -> list[str]:
        """Registered policy names, in registration order."""
        return list(self._policy_types)

    def get_policy_type(self, policy_name: str) -> Type[Policy]:
        """Get a policy type."""
        try:
            return self._policy_types[policy_name]
        except KeyError:
            raise UnknownPolicyError(policy_name, self.policy_names) from None

    def add_policy_type(self, policy_type: Type[Policy]) -> None:
        """Register a policy type under its name."""
        self._policy_types[policy_type.name] = policy_type

    def create(
        self,
        spec: PolicySpec,
        clients: Sequence[ClientParams],
        streams: NetworkStreams,
    ) -> Policy:
        """Construct a policy instance for one replication."""
        return self.get_policy_type(spec.name).instantiate(spec, clients, streams)

    def __contains__(self, policy_name: str) -> bool:
        return policy_name in self._policy_types


def default_policy_library() -> PolicyLibrary:
    """A library holding every built-in policy."""
    return PolicyLibrary(BUILTIN_POLICIES)
