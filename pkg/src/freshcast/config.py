"""Simulation configuration.

"""

from __future__ import annotations

import random
from typing import Any, Optional

import attrs

from freshcast.model import MAX_HORIZON, ClientParams

TIE_RULES = ("lowest-index", "random")
"""Tie-breaking rules understood by the index policies."""


@attrs.define
class LoggingConfig:
    """Configuration settings for logging within a simulation."""

    logging_enabled: bool = True
    """Toggles if logging messages are sent anywhere."""

    log_level: str = "INFO"
    """The logging level to use."""

    log_file_path: str = "./freshcast.log"
    """Toggles if logging output should be save to this file name in log_directory."""

    log_to_terminal: bool = True
    """Toggles if logs should be printed to the terminal or saved to a file."""


@attrs.define(frozen=True)
class ClientGroup:
    """A run of identical clients, written ``count x (lambda, p)`` in configs."""

    count: int = attrs.field(validator=attrs.validators.ge(1))
    """Number of clients in the group."""
    params: ClientParams
    """Arrival and channel statistics shared by the group."""

    def expand(self) -> tuple[ClientParams, ...]:
        """Get one ClientParams entry per client."""
        return (self.params,) * self.count

    def __str__(self) -> str:
        return f"{self.count}x({self.params.lam:.9g},{self.params.p:.9g})"


def group_clients(clients: tuple[ClientParams, ...]) -> list[ClientGroup]:
    """Compress a client list into runs of identical parameters."""
    groups: list[ClientGroup] = []
    for params in clients:
        if groups and groups[-1].params == params:
            groups[-1] = ClientGroup(groups[-1].count + 1, params)
        else:
            groups.append(ClientGroup(1, params))
    return groups


def _check_tie(_: Any, attribute: attrs.Attribute[str], value: str) -> None:
    if value not in TIE_RULES:
        raise ValueError(
            f"{attribute.name} must be one of {', '.join(TIE_RULES)}, got {value!r}."
        )


@attrs.define(frozen=True)
class PolicySpec:
    """A policy selected by name plus its options."""

    name: str
    """Registered policy name (e.g. approx-index, round-robin)."""
    tie: str = attrs.field(default="lowest-index", validator=_check_tie)
    """How ties between equally urgent clients are broken."""
    options: tuple[tuple[str, Any], ...] = attrs.field(
        factory=tuple, converter=lambda o: tuple(sorted(dict(o).items()))
    )
    """Extra policy options, e.g. ``age_cap`` for optimal-table."""

    def option(self, key: str, default: Any = None) -> Any:
        """Look up a policy option."""
        return dict(self.options).get(key, default)

    def __str__(self) -> str:
        return self.name


def _to_clients(value: Any) -> tuple[ClientParams, ...]:
    expanded: list[ClientParams] = []
    for entry in value:
        if isinstance(entry, ClientGroup):
            expanded.extend(entry.expand())
        else:
            expanded.append(entry)
    return tuple(expanded)


def _to_policy(value: Any) -> PolicySpec:
    if isinstance(value, str):
        return PolicySpec(value)
    return value


@attrs.define(frozen=True)
class SimConfig:
    """Configuration settings for a simulated experiment."""

    clients: tuple[ClientParams, ...] = attrs.field(converter=_to_clients)
    """Per-client arrival and channel statistics."""
    horizon: int
    """Total number of simulated slots per replication."""
    policy: PolicySpec = attrs.field(
        default=PolicySpec("approx-index"), converter=_to_policy
    )
    """The scheduling policy."""
    warmup: Optional[int] = None
    """Slots discarded before averaging, by default 10% of the horizon."""
    seed: int = attrs.field(factory=lambda: random.randint(0, 2**63 - 1))
    """Value used for pseudo-random number generation."""
    replications: int = attrs.field(default=1, validator=attrs.validators.ge(1))
    """Number of independent replications."""
    experiment: str = "custom"
    """Label echoed into result rows."""

    def __attrs_post_init__(self) -> None:
        if not self.clients:
            raise ValueError("A simulation needs at least one client.")
        if self.horizon < 1:
            raise ValueError(f"horizon must be positive, got {self.horizon}.")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must fit in 64 bits, got {self.seed}.")
        if self.warmup is None:
            object.__setattr__(self, "warmup", self.horizon // 10)
        if not 0 <= self.measured_warmup < self.horizon:
            raise ValueError(
                f"warmup must satisfy 0 <= warmup < horizon, got {self.warmup}."
            )

    @property
    def n_clients(self) -> int:
        """Number of clients in the network."""
        return len(self.clients)

    @property
    def measured_warmup(self) -> int:
        """The warm-up length with the default resolved."""
        return self.warmup if self.warmup is not None else self.horizon // 10

    @property
    def groups(self) -> list[ClientGroup]:
        """Clients compressed into runs of identical parameters."""
        return group_clients(self.clients)

    def exceeds_horizon_limit(self) -> bool:
        """Check the horizon against the supported maximum."""
        return self.horizon > MAX_HORIZON

    def with_policy(self, policy: PolicySpec) -> SimConfig:
        """Copy of this config that runs a different policy."""
        return attrs.evolve(self, policy=policy)
