"""Experiment manifests, config schemas, and report validation.

Configs are versioned JSON documents (``schema_version: 1``) validated with
jsonschema before anything runs.  Every emitted report re-validates against
the report envelope, so round-tripping is guaranteed by construction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

from .bases import PerturbationFamily
from .domains import ProfileFunction
from .errors import ConfigError
from .stability import InghamPerturbation, MarginPerturbation

SCHEMA_VERSION = 1

KINDS = (
    "validate",
    "approximate",
    "stability",
    "gram",
    "reconstruct",
    "multirect",
    "spherical",
    "frame",
)

_PROFILE_SCHEMA = {
    "type": "object",
    "oneOf": [
        {
            "properties": {
                "kind": {"const": "closed_form"},
                "expr": {"type": "string"},
                "lower": {"type": "number"},
                "upper": {"type": "number"},
            },
            "required": ["kind", "expr"],
            "additionalProperties": False,
        },
        {
            "properties": {
                "kind": {"const": "step"},
                "values": {
                    "type": "array",
                    "items": {"type": "number", "exclusiveMinimum": 0},
                    "minItems": 1,
                },
            },
            "required": ["kind", "values"],
            "additionalProperties": False,
        },
        {
            "properties": {
                "kind": {"const": "samples"},
                "ys": {"type": "array", "items": {"type": "number"}, "minItems": 2},
                "fs": {"type": "array", "items": {"type": "number"}, "minItems": 2},
                "lower": {"type": "number"},
                "upper": {"type": "number"},
            },
            "required": ["kind", "ys", "fs"],
            "additionalProperties": False,
        },
    ],
}

_PERTURBATION_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["none", "ingham", "margin"]},
        "theta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
    },
    "required": ["kind"],
    "additionalProperties": False,
}

_POSITIVE_INT = {"type": "integer", "minimum": 1}
_NONNEG_INT = {"type": "integer", "minimum": 0}


def _envelope(properties: dict, required: list[str]) -> dict:
    props = {"schema_version": {"const": SCHEMA_VERSION}}
    props.update(properties)
    return {
        "type": "object",
        "properties": props,
        "required": ["schema_version", *required],
        "additionalProperties": False,
    }


CONFIG_SCHEMAS: dict[str, dict] = {
    "validate": _envelope(
        {"profile": _PROFILE_SCHEMA, "grid_size": {"type": "integer", "minimum": 2}},
        ["profile"],
    ),
    "approximate": _envelope(
        {
            "profile": _PROFILE_SCHEMA,
            "orders": {"type": "array", "items": _POSITIVE_INT, "minItems": 1},
            "audit_grid": {"type": "integer", "minimum": 2},
        },
        ["profile"],
    ),
    "stability": _envelope(
        {
            "profile": _PROFILE_SCHEMA,
            "perturbation": _PERTURBATION_SCHEMA,
            "n_max": _POSITIVE_INT,
            "grid": {"type": "integer", "minimum": 2},
        },
        ["profile", "perturbation"],
    ),
    "gram": _envelope(
        {
            "profile": _PROFILE_SCHEMA,
            "perturbation": _PERTURBATION_SCHEMA,
            "weighted": {"type": "boolean"},
            "truncations": {
                "type": "array",
                "items": _NONNEG_INT,
                "minItems": 1,
            },
            "k_window": _NONNEG_INT,
            "point_queries": {
                "type": "array",
                "items": {
                    "type": "array",
                    "items": {"type": "number"},
                    "minItems": 4,
                    "maxItems": 4,
                },
            },
        },
        ["profile", "truncations"],
    ),
    "reconstruct": _envelope(
        {
            "profile": _PROFILE_SCHEMA,
            "weighted": {"type": "boolean"},
            "truncations": {
                "type": "array",
                "items": _POSITIVE_INT,
                "minItems": 1,
            },
            "target": {
                "type": "object",
                "properties": {
                    "kind": {"enum": ["box", "constant", "element"]},
                    "x": {"type": "array", "items": {"type": "number"}},
                    "y": {"type": "array", "items": {"type": "number"}},
                    "value": {"type": "number"},
                    "position": _NONNEG_INT,
                },
                "required": ["kind"],
                "additionalProperties": False,
            },
        },
        ["profile", "truncations", "target"],
    ),
    "multirect": _envelope(
        {
            "steps": {
                "type": "array",
                "items": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "minItems": 1,
            },
            "window": _POSITIVE_INT,
            "max_cond": {"type": "number", "exclusiveMinimum": 1},
            "y_window": _NONNEG_INT,
        },
        ["steps", "window", "max_cond"],
    ),
    "spherical": _envelope(
        {
            "profile": _PROFILE_SCHEMA,
            "dimension": {"type": "integer", "minimum": 2},
            "truncation": _NONNEG_INT,
            "weighted": {"type": "boolean"},
        },
        ["profile", "dimension", "truncation"],
    ),
    "frame": _envelope(
        {
            "profile": {"oneOf": [_PROFILE_SCHEMA, {"type": "null"}]},
            "box": {
                "type": "array",
                "items": {
                    "type": "array",
                    "items": {"type": "number"},
                    "minItems": 2,
                    "maxItems": 2,
                },
                "minItems": 2,
                "maxItems": 2,
            },
            "truncation": _POSITIVE_INT,
            "trials": _POSITIVE_INT,
            "probe_window": _NONNEG_INT,
        },
        ["truncation"],
    ),
}

REPORT_SCHEMA = {
    "type": "object",
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "kind": {"enum": list(KINDS)},
        "seed": {"type": "integer"},
        "threads": {"type": "integer", "minimum": 1},
        "tolerance": {"type": ["number", "null"]},
        "params": {"type": "object"},
        "results": {"type": "object"},
        "verdict": {"type": "string"},
        "exit_code": {"enum": [0, 1, 2]},
        "files": {"type": "array", "items": {"type": "string"}},
    },
    "required": [
        "schema_version",
        "kind",
        "seed",
        "threads",
        "params",
        "results",
        "verdict",
        "exit_code",
        "files",
    ],
    "additionalProperties": False,
}


@dataclass(frozen=True)
class ExperimentManifest:
    """One runnable experiment: kind, config payload, output location.

    The seed is recorded in every artifact; identical manifest and seed
    reproduce identical outputs (computations are single-threaded and
    deterministic regardless of the advisory ``threads`` value).
    """

    kind: str
    config: dict
    out_dir: Path
    seed: int = 0
    threads: int = 1
    tolerance: float | None = None
    figures: bool = True
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        validate_config(self.kind, self.config)


def load_config(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file {path} not found") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ConfigError("config root must be a JSON object")
    return payload


def validate_config(kind: str, config: dict) -> None:
    schema = CONFIG_SCHEMAS.get(kind)
    if schema is None:
        raise ConfigError(f"unknown experiment kind {kind!r}")
    try:
        jsonschema.validate(config, schema)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config failed schema validation: {exc.message}") from exc


def validate_report(payload: dict) -> None:
    try:
        jsonschema.validate(payload, REPORT_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"report failed schema validation: {exc.message}") from exc


def profile_from_config(cfg: dict) -> ProfileFunction:
    return ProfileFunction.from_config(cfg)


def perturbation_from_config(
    cfg: dict | None, profile: ProfileFunction
) -> PerturbationFamily | None:
    if cfg is None or cfg.get("kind") == "none":
        return None
    kind = cfg["kind"]
    if kind == "ingham":
        return InghamPerturbation(profile)
    if kind == "margin":
        return MarginPerturbation(profile, float(cfg.get("theta", 0.9)))
    raise ConfigError(f"unknown perturbation kind {kind!r}")
