#!/usr/bin/env python3

"""Sample Simulation for Terminal.

Simulates a small two-class network under every channel-blind baseline and the
index policies, then prints the results next to the lower bound.

"""

import argparse
import pathlib
import random

from freshcast.config import ClientGroup, LoggingConfig, PolicySpec, SimConfig
from freshcast.data_analysis import BatchRunner
from freshcast.data_collection import DataTables
from freshcast.inspection import render_batch
from freshcast.libraries import default_policy_library
from freshcast.logs import configure_logging
from freshcast.model import ClientParams


def get_args() -> argparse.Namespace:
    """Configure CLI argument parser and parse args.

    Returns
    -------
    argparse.Namespace
        parsed CLI arguments.
    """

    parser = argparse.ArgumentParser("Freshcast Sample Simulation.")

    parser.add_argument(
        "-s",
        "--seed",
        default=random.randint(0, 9999999),
        type=int,
        help="The experiment seed.",
    )

    parser.add_argument(
        "-n",
        "--clients",
        default=10,
        type=int,
        help="Clients per channel class.",
    )

    parser.add_argument(
        "-t",
        "--horizon",
        default=200_000,
        type=int,
        help="The number of slots to simulate.",
    )

    parser.add_argument(
        "-o",
        "--output",
        type=pathlib.Path,
        help="Specify path to write the results CSV.",
    )

    return parser.parse_args()


def main() -> None:
    """Main program entry point."""
    args = get_args()

    configure_logging(LoggingConfig(log_level="INFO"))

    network = (
        ClientGroup(args.clients, ClientParams(0.2, 0.9)),
        ClientGroup(args.clients, ClientParams(0.2, 0.1)),
    )

    configs = [
        SimConfig(
            clients=network,
            horizon=args.horizon,
            policy=PolicySpec(name),
            seed=args.seed,
            experiment="sample",
        )
        for name in default_policy_library().policy_names
        if name != "optimal-table"
    ]

    results = BatchRunner(configs, progress=True).run()

    print(render_batch(results))

    if args.output:
        tables = DataTables.for_experiments()
        for entry in results:
            tables.add_result(entry.config, entry.result, entry.lower_bound)
        tables.write_csv("results", args.output)
        print(f"Results written to: {args.output}")


if __name__ == "__main__":
    main()
