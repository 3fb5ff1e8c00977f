"""The main simulation class.

This module contains the slotted downlink simulator. A Simulation runs one
replication of one configuration; ``run`` and ``replicate`` wrap it for the common
cases.

"""

from __future__ import annotations

import logging
import math
from typing import Optional, Sequence

import attrs
import numpy as np
import numpy.typing as npt

from freshcast.config import SimConfig
from freshcast.errors import HorizonOverflowError
from freshcast.libraries import PolicyLibrary, default_policy_library
from freshcast.model import MAX_HORIZON
from freshcast.policies.base_types import NetworkState, Policy, PolicyDecision
from freshcast.streams import NetworkStreams

_logger = logging.getLogger(__name__)


@attrs.define(frozen=True)
class SimResult:
    """Measured average AoI of one or more replications."""

    per_client_avg_aoi: tuple[float, ...]
    """Time-average AoI of each client."""
    network_avg_aoi: float
    """Time and client average AoI."""
    replication_mean: float
    """Mean of the per-replication network averages."""
    replication_stderr: float
    """Standard error of that mean (0 for a single replication)."""
    slots_simulated: int
    """Measured slots, summed over replications."""
    deliveries: tuple[int, ...]
    """Successful deliveries per client during measured slots."""
    replications: int = 1
    """Number of replications aggregated."""


class Simulation:
    """One replication of a configured network.

    Parameters
    ----------
    config
        The network, horizon, policy and seed.
    replication_id
        Replication number; replications of the same config draw independent
        streams.
    library
        Where policy names are looked up, by default every built-in policy.
    record_trace
        Keep the per-slot network AoI sum of every measured slot.
    """

    __slots__ = (
        "_config",
        "_replication_id",
        "_streams",
        "_policy",
        "_lam",
        "_p",
        "_a",
        "_A",
        "_a_view",
        "_A_view",
        "_t",
        "_aoi_sums",
        "_deliveries",
        "_trace",
        "_arrivals",
        "_successes",
        "_block_pos",
    )

    _config: SimConfig
    """Config parameters for the simulation."""
    _replication_id: int
    """The replication number."""
    _streams: NetworkStreams
    """Keyed random streams of this replication."""
    _policy: Policy
    """The scheduling policy."""
    _lam: npt.NDArray[np.float64]
    _p: npt.NDArray[np.float64]
    _a: npt.NDArray[np.int64]
    """Queuing delay of each client's buffered packet."""
    _A: npt.NDArray[np.int64]
    """AoI of each client."""
    _a_view: npt.NDArray[np.int64]
    _A_view: npt.NDArray[np.int64]
    _t: int
    """The slot that will be played next."""
    _aoi_sums: npt.NDArray[np.int64]
    """Exact per-client AoI sums over measured slots."""
    _deliveries: npt.NDArray[np.int64]
    """Per-client successful deliveries during measured slots."""
    _trace: Optional[list[int]]
    """Per-slot network AoI sums, when recorded."""
    _arrivals: npt.NDArray[np.bool_]
    """Arrival bits of the current block of slots."""
    _successes: npt.NDArray[np.bool_]
    """Channel bits of the current block of slots."""
    _block_pos: int
    """Column of the current slot within the block."""

    def __init__(
        self,
        config: SimConfig,
        replication_id: int = 1,
        library: Optional[PolicyLibrary] = None,
        record_trace: bool = False,
    ) -> None:
        if config.exceeds_horizon_limit():
            raise HorizonOverflowError(config.horizon, MAX_HORIZON)

        library = library if library is not None else default_policy_library()
        n = config.n_clients

        self._config = config
        self._replication_id = replication_id
        self._streams = NetworkStreams(config.seed, replication_id, n)
        self._policy = library.create(config.policy, config.clients, self._streams)
        self._lam = np.array([c.lam for c in config.clients])
        self._p = np.array([c.p for c in config.clients])
        self._a = np.ones(n, dtype=np.int64)
        self._A = np.ones(n, dtype=np.int64)
        self._a_view = self._a.view()
        self._a_view.flags.writeable = False
        self._A_view = self._A.view()
        self._A_view.flags.writeable = False
        self._t = 1
        self._aoi_sums = np.zeros(n, dtype=np.int64)
        self._deliveries = np.zeros(n, dtype=np.int64)
        self._trace = [] if record_trace else None
        self._arrivals = np.zeros((n, 0), dtype=np.bool_)
        self._successes = np.zeros((n, 0), dtype=np.bool_)
        self._block_pos = 0

    @property
    def config(self) -> SimConfig:
        """Config parameters for the simulation."""
        return self._config

    @property
    def policy(self) -> Policy:
        """The scheduling policy."""
        return self._policy

    @property
    def t(self) -> int:
        """The slot that will be played next."""
        return self._t

    @property
    def finished(self) -> bool:
        """True once every slot of the horizon has been played."""
        return self._t > self._config.horizon

    @property
    def trace(self) -> list[int]:
        """Per-slot network AoI sums of measured slots."""
        if self._trace is None:
            raise ValueError("The simulation was created without record_trace.")
        return self._trace

    def network_state(self) -> NetworkState:
        """The network at the start of the next slot, as policies see it."""
        return NetworkState(
            a=self._a_view, A=self._A_view, lam=self._lam, p=self._p, t=self._t
        )

    def _refill(self) -> None:
        remaining = self._config.horizon - self._t + 1
        n_slots = min(NetworkStreams.BLOCK_SIZE, remaining)
        arrival_u, channel_u = self._streams.block(n_slots)
        self._arrivals = arrival_u < self._lam[:, None]
        self._successes = channel_u < self._p[:, None]
        self._block_pos = 0

    def step(self) -> PolicyDecision:
        """Play one slot and return the policy's decision."""
        if self.finished:
            raise ValueError("The simulation has already reached its horizon.")
        if self._block_pos >= self._arrivals.shape[1]:
            self._refill()

        k = self._block_pos
        measured = self._t > self._config.measured_warmup

        if measured:
            self._aoi_sums += self._A
            if self._trace is not None:
                self._trace.append(int(self._A.sum()))

        decision = self._policy.decide(self.network_state())

        # Vectorised form of model.step_client applied to every client
        client = decision.choice
        if client is not None and self._successes[client, k]:
            self._A[client] = self._a[client]
            if measured:
                self._deliveries[client] += 1

        self._A += 1
        self._a += 1
        self._a[self._arrivals[:, k]] = 1

        self._block_pos += 1
        self._t += 1
        return decision

    def run(self) -> SimResult:
        """Play every remaining slot and measure the result."""
        _logger.info(
            "Replication %d of %s: %d clients, %d slots, policy %s.",
            self._replication_id,
            self._config.experiment,
            self._config.n_clients,
            self._config.horizon,
            self._config.policy,
        )

        while not self.finished:
            self.step()

        result = self.result()
        _logger.info(
            "Replication %d of %s finished: average AoI %.9g.",
            self._replication_id,
            self._config.experiment,
            result.network_avg_aoi,
        )
        return result

    def result(self) -> SimResult:
        """Measurements of the slots played so far."""
        played = min(self._t - 1, self._config.horizon)
        measured = max(played - self._config.measured_warmup, 0)
        if measured == 0:
            raise ValueError("No measured slots have been played yet.")

        n = self._config.n_clients
        per_client = tuple(total / measured for total in self._aoi_sums.tolist())
        network = int(self._aoi_sums.sum()) / (measured * n)

        return SimResult(
            per_client_avg_aoi=per_client,
            network_avg_aoi=network,
            replication_mean=network,
            replication_stderr=0.0,
            slots_simulated=measured,
            deliveries=tuple(int(x) for x in self._deliveries.tolist()),
        )


def run(
    config: SimConfig,
    replication_id: int = 1,
    library: Optional[PolicyLibrary] = None,
) -> SimResult:
    """Simulate one replication of a configuration."""
    return Simulation(config, replication_id, library).run()


def aggregate(results: Sequence[SimResult]) -> SimResult:
    """Combine replications, in order, into one result.

    The mean and standard error are taken over the per-replication network
    averages; per-client averages are the mean over replications and deliveries
    are totals.
    """
    if not results:
        raise ValueError("Cannot aggregate an empty list of results.")

    count = len(results)
    means = [r.network_avg_aoi for r in results]
    mean = math.fsum(means) / count
    if count > 1:
        variance = math.fsum((m - mean) ** 2 for m in means) / (count - 1)
        stderr = math.sqrt(variance) / math.sqrt(count)
    else:
        stderr = 0.0

    n_clients = len(results[0].per_client_avg_aoi)
    per_client = tuple(
        math.fsum(r.per_client_avg_aoi[i] for r in results) / count
        for i in range(n_clients)
    )
    deliveries = tuple(
        sum(r.deliveries[i] for r in results) for i in range(n_clients)
    )

    return SimResult(
        per_client_avg_aoi=per_client,
        network_avg_aoi=mean,
        replication_mean=mean,
        replication_stderr=stderr,
        slots_simulated=sum(r.slots_simulated for r in results),
        deliveries=deliveries,
        replications=count,
    )


def replicate(
    config: SimConfig, library: Optional[PolicyLibrary] = None
) -> SimResult:
    """Run every replication of a configuration sequentially and aggregate.

    Replications are numbered 1 to ``config.replications``; see
    :class:`freshcast.data_analysis.BatchRunner` for running them in parallel.
    """
    return aggregate(
        [run(config, rep, library) for rep in range(1, config.replications + 1)]
    )
