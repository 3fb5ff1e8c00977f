"""Data collection.

This module collects experiment results into named tables and exports them as
polars data frames or CSV text. Every real number is written with nine significant
digits so that reruns with the same seed produce byte-identical files.

"""

from __future__ import annotations

import pathlib
from typing import Any, Iterator, Optional, Sequence, Union

import polars as pl

from freshcast.config import SimConfig
from freshcast.simulation import SimResult

FLOAT_FORMAT = "%.9g"
"""printf-style format of every real number in CSV output."""

RESULT_COLUMNS: tuple[str, ...] = (
    "experiment",
    "policy",
    "N",
    "horizon",
    "warmup",
    "seed",
    "replications",
    "mean_aoi",
    "stderr",
    "lower_bound",
    "wallclock_seconds",
    "sweep_value",
    "lambda_profile",
    "p_profile",
)
"""Columns of the results table, in output order."""

PER_CLIENT_COLUMNS: tuple[str, ...] = (
    "experiment",
    "policy",
    "sweep_value",
    "client",
    "lambda",
    "p",
    "avg_aoi",
    "deliveries",
)
"""Columns of the per-client table, in output order."""

_INTEGER_COLUMNS = frozenset(
    {"N", "horizon", "warmup", "seed", "replications", "client", "deliveries"}
)


def format_real(value: Optional[float]) -> Optional[str]:
    """Format a real number for CSV output (None stays empty)."""
    if value is None:
        return None
    return FLOAT_FORMAT % value


class DataTablesIterator:
    """Iterator for DataTables."""

    __slots__ = ("table_names", "tables", "idx")

    table_names: tuple[str, ...]
    """table names to iterate over."""
    tables: DataTables
    """Tables to iterate over."""
    idx: int
    """The current index in the table names tuple."""

    def __init__(self, table_names: Sequence[str], tables: DataTables) -> None:
        self.table_names = tuple(table_names)
        self.tables = tables
        self.idx = 0

    def __iter__(self) -> Iterator[tuple[str, pl.DataFrame]]:
        return self

    def __next__(self) -> tuple[str, pl.DataFrame]:
        if self.idx < len(self.table_names):
            name = self.table_names[self.idx]
            df = self.tables.get_data_frame(name)
            self.idx += 1
            return name, df
        raise StopIteration


class DataTables:
    """Collects result rows into tables of fixed columns."""

    __slots__ = ("_tables",)

    _tables: dict[str, dict[str, list[Any]]]
    """Table names mapped to dicts with column names mapped to data entries."""

    def __init__(
        self,
        tables: Optional[dict[str, tuple[str, ...]]] = None,
    ) -> None:
        """
        Parameters
        ----------
        tables
            Table names mapped to their column names.
        """
        self._tables = {}

        if tables:
            for table_name, column_names in tables.items():
                self.create_table(table_name, column_names)

    @classmethod
    def for_experiments(cls) -> DataTables:
        """Tables holding aggregate and per-client experiment results."""
        return cls({"results": RESULT_COLUMNS, "per_client": PER_CLIENT_COLUMNS})

    def create_table(self, table_name: str, column_names: tuple[str, ...]) -> None:
        """Create a new table for data collection.

        Parameters
        ----------
        table_name
            The name of the new table.
        column_names
            The names of columns within the table.
        """
        self._tables[table_name] = {column: [] for column in column_names}

    def add_data_row(self, table_name: str, row_data: dict[str, Any]) -> None:
        """Add a new row of data to a table.

        Parameters
        ----------
        table_name
            The table to add the row to.
        row_data
            A row of data to add to the table where each dict key is the
            name of the column.
        """
        if table_name not in self._tables:
            raise ValueError(f"Could not find table with name: {table_name}")

        table = self._tables[table_name]
        missing = [column for column in table if column not in row_data]
        if missing:
            raise KeyError(f"Row data is missing columns: {', '.join(missing)}")

        for column in table:
            table[column].append(row_data[column])

    def add_result(
        self,
        config: SimConfig,
        result: SimResult,
        lower_bound: float,
        sweep_value: Optional[float] = None,
        wallclock_seconds: Optional[float] = None,
    ) -> None:
        """Add one aggregated result and its per-client breakdown."""
        groups = config.groups
        self.add_data_row(
            "results",
            {
                "experiment": config.experiment,
                "policy": config.policy.name,
                "N": config.n_clients,
                "horizon": config.horizon,
                "warmup": config.measured_warmup,
                "seed": config.seed,
                "replications": result.replications,
                "mean_aoi": format_real(result.replication_mean),
                "stderr": format_real(result.replication_stderr),
                "lower_bound": format_real(lower_bound),
                "wallclock_seconds": format_real(wallclock_seconds),
                "sweep_value": format_real(sweep_value),
                "lambda_profile": _profile(groups, "lam"),
                "p_profile": _profile(groups, "p"),
            },
        )

        if "per_client" not in self._tables:
            return

        for client, params in enumerate(config.clients):
            self.add_data_row(
                "per_client",
                {
                    "experiment": config.experiment,
                    "policy": config.policy.name,
                    "sweep_value": format_real(sweep_value),
                    "client": client,
                    "lambda": format_real(params.lam),
                    "p": format_real(params.p),
                    "avg_aoi": format_real(result.per_client_avg_aoi[client]),
                    "deliveries": result.deliveries[client],
                },
            )

    def get_data_frame(self, table_name: str) -> pl.DataFrame:
        """Create a Polars data frame from a table.

        Parameters
        ----------
        table_name
            The name of the table to retrieve.

        Returns
        -------
        pl.DataFrame
            A polars DataFrame; reals are already formatted as text.
        """
        table = self._tables[table_name]
        schema = {
            column: pl.Int64 if column in _INTEGER_COLUMNS else pl.Utf8
            for column in table
        }
        return pl.DataFrame(table, schema=schema)

    def to_csv(self, table_name: str) -> str:
        """Render a table as CSV text."""
        return self.get_data_frame(table_name).write_csv()

    def write_csv(self, table_name: str, path: Union[str, pathlib.Path]) -> None:
        """Write a table to a CSV file."""
        pathlib.Path(path).write_text(self.to_csv(table_name), encoding="utf-8")

    def __iter__(self) -> Iterator[tuple[str, pl.DataFrame]]:
        return DataTablesIterator(list(self._tables.keys()), self)

    def __len__(self) -> int:
        return len(self._tables)


def _profile(groups: Sequence[Any], attribute: str) -> str:
    """Compress a per-client parameter into ``count x value`` runs."""
    runs: list[tuple[int, float]] = []
    for group in groups:
        value = getattr(group.params, attribute)
        if runs and runs[-1][1] == value:
            runs[-1] = (runs[-1][0] + group.count, value)
        else:
            runs.append((group.count, value))
    return ";".join(f"{count}x{FLOAT_FORMAT % value}" for count, value in runs)
