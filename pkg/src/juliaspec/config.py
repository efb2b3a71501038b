"""Run configuration: one JSON document describing (p̄, d̄, seed, command).

The document is validated structurally against CONFIG_SCHEMA (jsonschema)
before any computation, then the sequence descriptions are parsed with the
stricter per-kind range checks.  CLI flags may override individual fields
after loading.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import jsonschema

from .chain import ChainConfig
from .dynamics import FiberedSystem
from .errors import ConfigError
from .numeration import BaseSequence
from .sequences import SequenceSpec, spec_from_json, spec_to_json

__all__ = ["CONFIG_SCHEMA", "RunConfig", "parse_config", "load_config_file"]

_SEQ_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {
            "type": "string",
            "enum": ["constant", "periodic", "geometric", "harmonic", "prefix", "random"],
        }
    },
    "required": ["kind"],
}

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "p": _SEQ_SCHEMA,
        "d": _SEQ_SCHEMA,
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "command": {"type": "object"},
        "capacity_bits": {"type": "integer", "minimum": 64, "maximum": 512},
    },
    "required": ["p", "d"],
    "additionalProperties": False,
}


@dataclass(frozen=True)
class RunConfig:
    """Parsed configuration; the single source of truth for one run."""

    p: SequenceSpec
    d: SequenceSpec
    seed: int = 0
    command: dict = field(default_factory=dict)
    capacity_bits: int = 64

    def base(self) -> BaseSequence:
        return BaseSequence(self.d, capacity_bits=self.capacity_bits)

    def chain(self) -> ChainConfig:
        return ChainConfig(self.base(), self.p)

    def system(self) -> FiberedSystem:
        return FiberedSystem(self.base(), self.p)

    def with_seed(self, seed: int) -> "RunConfig":
        return replace(self, seed=int(seed))

    def to_json(self) -> dict:
        out = {
            "p": spec_to_json(self.p),
            "d": spec_to_json(self.d),
            "seed": self.seed,
        }
        if self.command:
            out["command"] = self.command
        if self.capacity_bits != 64:
            out["capacity_bits"] = self.capacity_bits
        return out


def parse_config(obj) -> RunConfig:
    """Validate a JSON document and build the RunConfig; ConfigError on defects."""
    try:
        jsonschema.validate(obj, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config rejected by schema: {exc.message}") from exc
    p = spec_from_json(obj["p"], "p")
    d = spec_from_json(obj["d"], "d")
    return RunConfig(
        p=p,
        d=d,
        seed=int(obj.get("seed", 0)),
        command=dict(obj.get("command", {})),
        capacity_bits=int(obj.get("capacity_bits", 64)),
    )


def load_config_file(path) -> RunConfig:
    """Read and parse a JSON config file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(obj)
