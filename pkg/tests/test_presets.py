"""Experiment preset tests.

"""

from __future__ import annotations

import pytest

from freshcast.config import PolicySpec
from freshcast.model import ClientParams
from freshcast.presets import DEFAULT_SEED, FIG2, FIG3, GAP, PRESETS


def test_registered_presets() -> None:
    assert sorted(PRESETS) == ["fig2", "fig3", "gap"]


def test_growing_network() -> None:
    config = FIG2.make_config(40, PolicySpec("approx-index"))

    assert config.n_clients == 40
    assert config.horizon == 6 * 40 * 10**4
    assert config.seed == DEFAULT_SEED
    assert config.experiment == "fig2"
    assert config.clients[0] == ClientParams(0.2, 0.9)
    assert config.clients[-1] == ClientParams(0.2, 0.1)
    assert [group.count for group in config.groups] == [20, 20]


def test_growing_network_needs_even_size() -> None:
    with pytest.raises(ValueError):
        FIG2.make_config(15, PolicySpec("approx-index"))


def test_scaled_sweep_is_thinned() -> None:
    assert FIG2.points() == tuple(float(n) for n in range(10, 201, 10))
    assert FIG2.points(scale=0.1) == (10.0, 110.0)
    assert FIG2.points(scale=0.5, points=[20, 30]) == (20.0, 30.0)

    # fig3 keeps every point at any scale
    assert len(FIG3.points(scale=0.01)) == 10


def test_improving_channels() -> None:
    config = FIG3.make_config(0.7, PolicySpec("arrival-aware"), scale=0.001)

    assert config.n_clients == 40
    assert config.horizon == 3000
    assert config.warmup == 300
    assert config.clients[:20] == (ClientParams(0.2, 0.1),) * 20
    assert config.clients[20:] == (ClientParams(0.2, 0.7),) * 20


def test_horizon_has_a_floor() -> None:
    config = GAP.make_config(0.0, PolicySpec("max-age"), scale=1e-9)

    assert config.horizon == 10


def test_invalid_scale() -> None:
    with pytest.raises(ValueError):
        GAP.make_config(0.0, PolicySpec("max-age"), scale=0.0)

    with pytest.raises(ValueError):
        GAP.make_config(0.0, PolicySpec("max-age"), scale=1.5)


def test_configs_are_sweep_major() -> None:
    pairs = FIG3.configs(scale=0.001, points=[0.2, 0.4], seed=9, replications=3)

    assert [value for value, _ in pairs] == [0.2, 0.2, 0.4, 0.4]
    assert [config.policy.name for _, config in pairs] == [
        "approx-index",
        "arrival-aware",
    ] * 2
    assert all(config.seed == 9 for _, config in pairs)
    assert all(config.replications == 3 for _, config in pairs)


def test_gap_preset() -> None:
    pairs = GAP.configs(scale=0.01, policies=[PolicySpec("optimal-table")])

    ((value, config),) = pairs
    assert value == 0.0
    assert config.replications == 4
    assert config.clients == (ClientParams(0.6, 0.9), ClientParams(0.6, 0.6))
    assert config.horizon == 10**4
