"""Experiment config loaders.

This module contains helper functions that turn YAML experiment files into
simulation configurations. A file describes one network and lists one or more
policies; loading it produces one SimConfig per policy.

"""

from __future__ import annotations

import os
from typing import Any, Optional, Union

import yaml

from freshcast.config import ClientGroup, PolicySpec, SimConfig
from freshcast.errors import ConfigError
from freshcast.libraries import PolicyLibrary, default_policy_library
from freshcast.model import ClientParams

_TOP_LEVEL_KEYS = frozenset(
    {
        "experiment",
        "seed",
        "horizon",
        "warmup",
        "replications",
        "clients",
        "policy",
        "policies",
    }
)
_CLIENT_KEYS = frozenset({"count", "lambda", "p"})


def load_experiment(
    file_path: Union[os.PathLike[str], str],
    library: Optional[PolicyLibrary] = None,
) -> list[SimConfig]:
    """Load an experiment file.

    Parameters
    ----------
    file_path
        The path to the YAML file.
    library
        Policy names are checked against this library, by default the built-ins.

    Returns
    -------
    list[SimConfig]
        One configuration per listed policy, in file order.
    """
    source = os.fspath(file_path)
    try:
        with open(file_path, "r", encoding="utf8") as file:
            data = yaml.safe_load(file)
    except OSError as err:
        raise ConfigError(f"Could not read file: {err.strerror}.", source) from err
    except yaml.YAMLError as err:
        raise ConfigError(f"Invalid YAML: {err}", source) from err

    return parse_experiment(data, source, library)


def parse_experiment(
    data: Any, source: str = "", library: Optional[PolicyLibrary] = None
) -> list[SimConfig]:
    """Build configurations from an already parsed experiment mapping."""
    if not isinstance(data, dict):
        raise ConfigError("An experiment must be a mapping.", source)

    unknown = sorted(set(data) - _TOP_LEVEL_KEYS)
    if unknown:
        raise ConfigError(f"Unknown keys: {', '.join(map(str, unknown))}.", source)

    if "horizon" not in data:
        raise ConfigError("Missing required key: horizon.", source)
    if "clients" not in data:
        raise ConfigError("Missing required key: clients.", source)
    if "policy" in data and "policies" in data:
        raise ConfigError("Use either 'policy' or 'policies', not both.", source)

    clients = _parse_clients(data["clients"], source)
    policies = _parse_policies(data, source)

    library = library if library is not None else default_policy_library()
    for policy in policies:
        # Raises UnknownPolicyError
        library.get_policy_type(policy.name)

    shared: dict[str, Any] = {
        "clients": clients,
        "horizon": _integer(data["horizon"], "horizon", source),
        "experiment": str(data.get("experiment", "custom")),
        "replications": _integer(data.get("replications", 1), "replications", source),
    }
    if data.get("warmup") is not None:
        shared["warmup"] = _integer(data["warmup"], "warmup", source)
    if data.get("seed") is not None:
        shared["seed"] = _integer(data["seed"], "seed", source)

    configs: list[SimConfig] = []
    for policy in policies:
        try:
            configs.append(SimConfig(policy=policy, **shared))
        except (TypeError, ValueError) as err:
            raise ConfigError(str(err), source) from err

    return configs


def _integer(value: Any, key: str, source: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be an integer, got {value!r}.", source)
    if isinstance(value, float):
        if not value.is_integer():
            raise ConfigError(f"{key} must be an integer, got {value!r}.", source)
        value = int(value)
    return value


def _parse_clients(entries: Any, source: str) -> tuple[ClientParams, ...]:
    if not isinstance(entries, list) or not entries:
        raise ConfigError("clients must be a nonempty list.", source)

    groups: list[ClientGroup] = []
    for position, entry in enumerate(entries):
        where = f"{source}: clients[{position}]" if source else f"clients[{position}]"
        if not isinstance(entry, dict):
            raise ConfigError("Each client entry must be a mapping.", where)
        unknown = sorted(set(entry) - _CLIENT_KEYS)
        if unknown:
            raise ConfigError(f"Unknown keys: {', '.join(map(str, unknown))}.", where)
        if "lambda" not in entry or "p" not in entry:
            raise ConfigError("Client entries need both 'lambda' and 'p'.", where)
        try:
            groups.append(
                ClientGroup(
                    count=_integer(entry.get("count", 1), "count", where),
                    params=ClientParams(entry["lambda"], entry["p"]),
                )
            )
        except (TypeError, ValueError) as err:
            raise ConfigError(str(err), where) from err

    return tuple(params for group in groups for params in group.expand())


def _parse_policies(data: dict[str, Any], source: str) -> list[PolicySpec]:
    if "policies" in data:
        entries = data["policies"]
        if not isinstance(entries, list) or not entries:
            raise ConfigError("policies must be a nonempty list.", source)
    else:
        entries = [data.get("policy", "approx-index")]

    return [_parse_policy(entry, source) for entry in entries]


def _parse_policy(entry: Any, source: str) -> PolicySpec:
    if isinstance(entry, str):
        return PolicySpec(entry)
    if not isinstance(entry, dict) or "name" not in entry:
        raise ConfigError(
            "A policy must be a name or a mapping with a 'name' key.", source
        )

    options = {k: v for k, v in entry.items() if k not in ("name", "tie")}
    try:
        return PolicySpec(
            name=str(entry["name"]),
            tie=entry.get("tie", "lowest-index"),
            options=options,
        )
    except (TypeError, ValueError) as err:
        raise ConfigError(str(err), source) from err
