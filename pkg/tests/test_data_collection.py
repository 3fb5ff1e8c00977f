"""Result table tests.

"""

from __future__ import annotations

import pathlib

import polars as pl
import pytest

from freshcast.config import SimConfig
from freshcast.data_analysis import BatchRunner
from freshcast.data_collection import (
    PER_CLIENT_COLUMNS,
    RESULT_COLUMNS,
    DataTables,
    format_real,
)
from freshcast.model import ClientParams
from freshcast.simulation import SimResult


def _config() -> SimConfig:
    return SimConfig(
        clients=[ClientParams(0.2, 0.9)] * 2 + [ClientParams(0.2, 0.1)],
        horizon=1000,
        seed=3,
        experiment="unit",
    )


def _result() -> SimResult:
    return SimResult(
        per_client_avg_aoi=(4.5, 5.25, 20.0),
        network_avg_aoi=29.75 / 3,
        replication_mean=29.75 / 3,
        replication_stderr=0.125,
        slots_simulated=1800,
        deliveries=(100, 90, 12),
        replications=2,
    )


def test_format_real() -> None:
    assert format_real(None) is None
    assert format_real(2.5) == "2.5"
    assert format_real(1 / 3) == "0.333333333"
    assert format_real(1e-12) == "1e-12"


def test_add_data_row() -> None:
    tables = DataTables({"pairs": ("x", "y")})

    tables.add_data_row("pairs", {"x": "1", "y": "2", "z": "ignored"})

    assert tables.get_data_frame("pairs").to_dicts() == [{"x": "1", "y": "2"}]

    with pytest.raises(KeyError):
        tables.add_data_row("pairs", {"x": "1"})

    with pytest.raises(ValueError):
        tables.add_data_row("missing", {"x": "1"})


def test_add_result_rows() -> None:
    tables = DataTables.for_experiments()

    tables.add_result(_config(), _result(), lower_bound=3.75, sweep_value=0.5)

    results = tables.get_data_frame("results")
    assert tuple(results.columns) == RESULT_COLUMNS
    assert results.schema["N"] == pl.Int64
    row = results.row(0, named=True)
    assert row["experiment"] == "unit"
    assert row["policy"] == "approx-index"
    assert row["N"] == 3
    assert row["warmup"] == 100
    assert row["replications"] == 2
    assert row["mean_aoi"] == "9.91666667"
    assert row["stderr"] == "0.125"
    assert row["wallclock_seconds"] is None
    assert row["sweep_value"] == "0.5"
    assert row["lambda_profile"] == "3x0.2"
    assert row["p_profile"] == "2x0.9;1x0.1"

    per_client = tables.get_data_frame("per_client")
    assert tuple(per_client.columns) == PER_CLIENT_COLUMNS
    assert per_client["client"].to_list() == [0, 1, 2]
    assert per_client["deliveries"].to_list() == [100, 90, 12]
    assert per_client["avg_aoi"].to_list() == ["4.5", "5.25", "20"]


def test_csv_output(tmp_path: pathlib.Path) -> None:
    tables = DataTables.for_experiments()
    tables.add_result(_config(), _result(), lower_bound=3.75)

    text = tables.to_csv("results")
    header, row, *rest = text.splitlines()

    assert header == ",".join(RESULT_COLUMNS)
    assert row.startswith("unit,approx-index,3,1000,100,3,2,9.91666667,0.125,3.75,,,")
    assert rest == []

    path = tmp_path / "results.csv"
    tables.write_csv("results", path)
    assert path.read_text(encoding="utf-8") == text


def test_iteration() -> None:
    tables = DataTables.for_experiments()

    names = [name for name, _ in tables]

    assert names == ["results", "per_client"]
    assert len(tables) == 2


def test_batch_runner_reduces_in_order() -> None:
    configs = [
        SimConfig(clients=[ClientParams(1, 1)], horizon=200, seed=1, replications=2),
        SimConfig(clients=[ClientParams(1, 1)] * 2, horizon=200, seed=1),
    ]

    batch = BatchRunner(configs, sweep_values=[1.0, 2.0]).run()

    assert [entry.sweep_value for entry in batch] == [1.0, 2.0]
    assert batch[0].result.replications == 2
    assert batch[0].result.network_avg_aoi == 2.0
    assert batch[1].result.network_avg_aoi == 2.5
    assert batch[1].lower_bound == pytest.approx(1.5)
    assert all(entry.wallclock_seconds >= 0 for entry in batch)


def test_batch_runner_validation() -> None:
    config = SimConfig(clients=[ClientParams(1, 1)], horizon=200, seed=1)

    with pytest.raises(ValueError):
        BatchRunner([config], sweep_values=[1.0, 2.0])

    with pytest.raises(ValueError):
        BatchRunner([config], jobs=0)
