"""Built-in experiment presets.

A preset sweeps one parameter of a network family and produces one SimConfig per
sweep value and policy. ``fig2`` grows the network, ``fig3`` raises the channel
quality of half the clients and ``gap`` is a two-client network small enough to
solve exactly.

"""

from __future__ import annotations

import math
from typing import Callable, Optional, Sequence

import attrs

from freshcast.config import ClientGroup, PolicySpec, SimConfig
from freshcast.model import ClientParams

DEFAULT_SEED = 1
"""Seed used by presets unless one is given."""


@attrs.define(frozen=True)
class ExperimentPreset:
    """A named family of networks swept over one parameter."""

    name: str
    """Preset name used on the command line."""
    sweep_variable: str
    """Name of the swept parameter (echoed as sweep_value in results)."""
    sweep_values: tuple[float, ...]
    """Default sweep values, in output order."""
    network: Callable[[float], tuple[ClientGroup, ...]]
    """Clients of the network at one sweep value."""
    horizon: Callable[[float], int]
    """Full-size horizon at one sweep value."""
    policies: tuple[str, ...]
    """Policies simulated by default."""
    replications: int = 1
    """Replications per configuration by default."""
    thin_with_scale: bool = False
    """Keep only every ceil(1/scale)-th sweep value when scaled down."""

    def points(
        self, scale: float = 1.0, points: Optional[Sequence[float]] = None
    ) -> tuple[float, ...]:
        """The sweep values to run.

        Parameters
        ----------
        scale
            Horizon multiplier in (0, 1]; may also thin the sweep.
        points
            Explicit sweep values, overriding the defaults.
        """
        if points is not None:
            return tuple(float(value) for value in points)
        if self.thin_with_scale and scale < 1.0:
            stride = math.ceil(1.0 / scale)
            return self.sweep_values[::stride]
        return self.sweep_values

    def make_config(
        self,
        value: float,
        policy: PolicySpec,
        scale: float = 1.0,
        seed: int = DEFAULT_SEED,
        replications: Optional[int] = None,
    ) -> SimConfig:
        """Build the configuration of one sweep value and policy."""
        if not 0.0 < scale <= 1.0:
            raise ValueError(f"scale must lie in (0, 1], got {scale}.")
        return SimConfig(
            clients=self.network(value),
            horizon=max(10, int(round(self.horizon(value) * scale))),
            policy=policy,
            seed=seed,
            replications=replications if replications else self.replications,
            experiment=self.name,
        )

    def configs(
        self,
        scale: float = 1.0,
        points: Optional[Sequence[float]] = None,
        policies: Optional[Sequence[PolicySpec]] = None,
        seed: int = DEFAULT_SEED,
        replications: Optional[int] = None,
    ) -> list[tuple[float, SimConfig]]:
        """Every (sweep value, configuration) pair, sweep value major."""
        specs = (
            list(policies)
            if policies
            else [PolicySpec(name) for name in self.policies]
        )
        return [
            (value, self.make_config(value, spec, scale, seed, replications))
            for value in self.points(scale, points)
            for spec in specs
        ]


def _growing_network(n: float) -> tuple[ClientGroup, ...]:
    count = int(n)
    if count < 2 or count % 2:
        raise ValueError(f"fig2 needs an even number of clients, got {n}.")
    lam = 10.0 / (count + 10.0)
    half = count // 2
    return (
        ClientGroup(half, ClientParams(lam, 0.9)),
        ClientGroup(half, ClientParams(lam, 0.1)),
    )


def _improving_channels(p: float) -> tuple[ClientGroup, ...]:
    return (
        ClientGroup(20, ClientParams(0.2, 0.1)),
        ClientGroup(20, ClientParams(0.2, p)),
    )


def _two_clients(_: float) -> tuple[ClientGroup, ...]:
    return (
        ClientGroup(1, ClientParams(0.6, 0.9)),
        ClientGroup(1, ClientParams(0.6, 0.6)),
    )


FIG2 = ExperimentPreset(
    name="fig2",
    sweep_variable="N",
    sweep_values=tuple(float(n) for n in range(10, 201, 10)),
    network=_growing_network,
    horizon=lambda n: int(6 * n * 10**4),
    policies=("approx-index", "arrival-aware"),
    thin_with_scale=True,
)

FIG3 = ExperimentPreset(
    name="fig3",
    sweep_variable="p",
    sweep_values=tuple(round(0.1 * k, 1) for k in range(1, 11)),
    network=_improving_channels,
    horizon=lambda _: 3 * 10**6,
    policies=("approx-index", "arrival-aware"),
)

GAP = ExperimentPreset(
    name="gap",
    sweep_variable="instance",
    sweep_values=(0.0,),
    network=_two_clients,
    horizon=lambda _: 10**6,
    policies=("approx-index", "max-age", "round-robin", "random", "optimal-table"),
    replications=4,
)

PRESETS: dict[str, ExperimentPreset] = {
    preset.name: preset for preset in (FIG2, FIG3, GAP)
}
"""Presets by name."""
