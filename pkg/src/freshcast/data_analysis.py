"""Data Analysis and Experimentation

This module runs batches of simulations (sweeps of configurations, each with
several replications) and reduces them to one result per configuration. Work can
be spread over a process pool; results are always reduced in replication order,
so the output does not depend on the number of workers.

"""

from __future__ import annotations

import logging
import multiprocessing
import time
from typing import Optional, Sequence

import attrs
import tqdm

from freshcast.config import SimConfig
from freshcast.index import lower_bound
from freshcast.simulation import SimResult, aggregate, run

_logger = logging.getLogger(__name__)


@attrs.define(frozen=True)
class BatchResult:
    """The aggregated result of one configuration of a batch."""

    config: SimConfig
    """The simulated configuration."""
    result: SimResult
    """Replications aggregated in order."""
    lower_bound: float
    """Lower bound on the average AoI of any policy for this network."""
    wallclock_seconds: float
    """Time spent simulating, summed over replications."""
    sweep_value: Optional[float] = None
    """Value of the swept parameter, if any."""


def _run_replication(job: tuple[SimConfig, int]) -> tuple[SimResult, float]:
    config, replication_id = job
    start = time.perf_counter()
    result = run(config, replication_id)
    return result, time.perf_counter() - start


class BatchRunner:
    """Runs every replication of several configurations.

    Parameters
    ----------
    configs
        The configurations to simulate.
    sweep_values
        Optional value of the swept parameter for each configuration.
    jobs
        Number of worker processes; 1 runs everything in this process.
    progress
        Show a progress bar over replications.
    """

    __slots__ = ("configs", "sweep_values", "jobs", "progress")

    configs: tuple[SimConfig, ...]
    """The configurations to simulate."""
    sweep_values: tuple[Optional[float], ...]
    """Value of the swept parameter for each configuration."""
    jobs: int
    """Number of worker processes."""
    progress: bool
    """Show a progress bar."""

    def __init__(
        self,
        configs: Sequence[SimConfig],
        sweep_values: Optional[Sequence[Optional[float]]] = None,
        jobs: int = 1,
        progress: bool = False,
    ) -> None:
        if sweep_values is not None and len(sweep_values) != len(configs):
            raise ValueError("Expected one sweep value per configuration.")
        if jobs < 1:
            raise ValueError(f"jobs must be positive, got {jobs}.")

        self.configs = tuple(configs)
        self.sweep_values = (
            tuple(sweep_values) if sweep_values is not None else (None,) * len(configs)
        )
        self.jobs = jobs
        self.progress = progress

    def run(self) -> list[BatchResult]:
        """Run the batch."""
        work = [
            (config, replication_id)
            for config in self.configs
            for replication_id in range(1, config.replications + 1)
        ]
        _logger.info(
            "Running %d replications of %d configurations on %d workers.",
            len(work),
            len(self.configs),
            self.jobs,
        )

        if self.jobs == 1:
            outputs = [
                _run_replication(job)
                for job in tqdm.tqdm(work, disable=not self.progress)
            ]
        else:
            with multiprocessing.Pool(self.jobs) as pool:
                outputs = list(
                    tqdm.tqdm(
                        pool.imap(_run_replication, work),
                        total=len(work),
                        disable=not self.progress,
                    )
                )

        batch: list[BatchResult] = []
        offset = 0
        for config, sweep_value in zip(self.configs, self.sweep_values):
            chunk = outputs[offset : offset + config.replications]
            offset += config.replications
            batch.append(
                BatchResult(
                    config=config,
                    result=aggregate([result for result, _ in chunk]),
                    lower_bound=lower_bound(
                        [c.p for c in config.clients], config.n_clients
                    ),
                    wallclock_seconds=sum(seconds for _, seconds in chunk),
                    sweep_value=sweep_value,
                )
            )

        return batch
