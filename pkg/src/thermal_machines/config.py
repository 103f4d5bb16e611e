"""Strict JSON run configurations and the shipped figure presets."""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from importlib import resources

import jsonschema

SCHEMA_VERSION = 1
PRESETS = ("fig5-local", "fig5-global", "fig7", "fig9", "fig10a", "fig10b", "fig10c")

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_GRID = {
    "oneOf": [
        {"type": "array", "items": _NUM, "minItems": 1},
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["start", "stop", "num"],
            "properties": {"start": _NUM, "stop": _NUM, "num": {"type": "integer", "minimum": 1}},
        },
    ]
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["schema_version", "machine", "run"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "output": {"type": "string"},
        "machine": {
            "type": "object",
            "additionalProperties": False,
            "required": ["type", "omega_c", "omega_h"],
            "properties": {
                "type": {"enum": ["three_level", "three_qubit", "three_oscillator", "engine", "clock"]},
                "omega_c": _POS,
                "omega_h": _POS,
                "g": {"type": "number", "minimum": 0},
                "d": {"type": "integer", "minimum": 2},
                "n_max": {"type": "integer", "minimum": 1},
                "decay_rate": _POS,
            },
        },
        "baths": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["label", "T", "kappa"],
                "properties": {
                    "label": {"enum": ["c", "h", "w"]},
                    "T": _POS,
                    "kappa": _POS,
                    "D": {"enum": [1, 2, 3]},
                    "omega_ref": _POS,
                },
            },
        },
        "dissipation": {
            "type": "object",
            "additionalProperties": False,
            "required": ["model"],
            "properties": {"model": {"enum": ["local", "global"]}},
        },
        "run": {
            "type": "object",
            "additionalProperties": False,
            "required": ["mode"],
            "properties": {
                "mode": {"enum": ["steady", "sweep", "transient", "engine_walk", "clock"]},
                "sweep": _GRID,
                "times": _GRID,
                "coherence": {"type": "number", "minimum": -1, "maximum": 1},
                "n_cycles": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
                "gamma_eff": _POS,
                "mc_points": {"type": "array", "items": _POS},
                "mc_paths": {"type": "integer", "minimum": 1},
                "scan": {"enum": ["a", "b", "c"]},
                "d_max": {"type": "integer", "minimum": 3},
                "n_ticks": {"type": "integer", "minimum": 2},
                "power": _POS,
                "resolution": _POS,
                "accuracy": _POS,
            },
            "allOf": [
                {"if": {"properties": {"mode": {"const": "sweep"}}}, "then": {"required": ["sweep"]}},
                {"if": {"properties": {"mode": {"const": "transient"}}}, "then": {"required": ["times"]}},
                {"if": {"properties": {"mode": {"const": "engine_walk"}}}, "then": {"required": ["sweep", "n_cycles"]}},
                {"if": {"properties": {"mode": {"const": "clock"}}}, "then": {"required": ["scan", "sweep"]}},
            ],
        },
    },
}

_FRIDGES = ("three_level", "three_qubit", "three_oscillator")
_MODES_FOR = {
    "steady": ("three_level", "three_qubit", "three_oscillator", "engine", "clock"),
    "sweep": _FRIDGES,
    "transient": ("three_qubit", "three_oscillator"),
    "engine_walk": ("engine",),
    "clock": ("clock",),
}


class ConfigError(ValueError):
    """Invalid configuration; ``pointer`` is the JSON pointer of the offending value."""

    def __init__(self, pointer: str, message: str):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer
        self.message = message


def _pointer(path) -> str:
    return "".join(f"/{p}" for p in path)


@dataclass(frozen=True)
class RunConfig:
    data: dict

    @property
    def machine(self) -> dict:
        return self.data["machine"]

    @property
    def baths(self) -> list:
        return self.data.get("baths", [])

    @property
    def model(self) -> str:
        return self.data.get("dissipation", {}).get("model", "local")

    @property
    def run(self) -> dict:
        return self.data["run"]

    @property
    def mode(self) -> str:
        return self.data["run"]["mode"]

    @property
    def seed(self) -> int:
        return int(self.data.get("seed", 0))

    @property
    def output(self):
        return self.data.get("output")

    def bath(self, label) -> dict:
        for b in self.baths:
            if b["label"] == label:
                return b
        raise KeyError(label)

    def temperatures(self) -> dict:
        return {b["label"]: b["T"] for b in self.baths}

    def with_overrides(self, seed=None, output=None) -> "RunConfig":
        data = copy.deepcopy(self.data)
        if seed is not None:
            data["seed"] = int(seed)
        if output is not None:
            data["output"] = output
        return validate(data)

    def serialize(self) -> str:
        return json.dumps(self.data, sort_keys=True, indent=2) + "\n"

    def digest(self) -> str:
        """SHA-256 of the canonical config; the output path does not change the computation."""
        body = {k: v for k, v in self.data.items() if k != "output"}
        canon = json.dumps(body, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def grid_values(spec) -> list:
    """Expand a grid given as a list or as {start, stop, num} (endpoints included)."""
    if isinstance(spec, list):
        return [float(x) for x in spec]
    n = spec["num"]
    if n == 1:
        return [float(spec["start"])]
    step = (spec["stop"] - spec["start"]) / (n - 1)
    return [spec["start"] + k * step for k in range(n - 1)] + [float(spec["stop"])]


def _check_semantics(data):
    m = data["machine"]
    mtype = m["type"]
    if not m["omega_c"] < m["omega_h"]:
        raise ConfigError("/machine/omega_c", "must be smaller than omega_h")
    mode = data["run"]["mode"]
    if (mtype == "clock" or (mtype == "engine" and mode == "steady")) and "d" not in m:
        raise ConfigError("/machine", f"'d' is required for machine type {mtype!r}")
    if mtype == "clock" and m.get("d", 3) < 3:
        raise ConfigError("/machine/d", "a clock needs d >= 3")
    labels = [b["label"] for b in data.get("baths", [])]
    for i, lab in enumerate(labels):
        if lab in labels[:i]:
            raise ConfigError(f"/baths/{i}/label", f"duplicate bath label {lab!r}")
    needed = ("c", "h", "w") if mtype in _FRIDGES else ("c", "h")
    for lab in needed:
        if lab not in labels:
            raise ConfigError("/baths", f"missing bath with label {lab!r}")
    if mtype in ("engine", "clock") and "w" in labels:
        raise ConfigError(f"/baths/{labels.index('w')}/label", "the load of an engine or clock has no bath")
    if mtype not in _MODES_FOR[mode]:
        raise ConfigError("/run/mode", f"mode {mode!r} does not apply to machine type {mtype!r}")
    for key in ("sweep", "times"):
        spec = data["run"].get(key)
        if spec is not None and not grid_values(spec):
            raise ConfigError(f"/run/{key}", "grid is empty")
    run = data["run"]
    if mode == "clock":
        scan = run["scan"]
        if scan == "a":
            vals = run["sweep"]
            if not isinstance(vals, list) or any(int(v) != v or v < 3 for v in vals):
                raise ConfigError("/run/sweep", "scan 'a' sweeps ladder sizes: a list of integers >= 3")
        required = {"a": "power", "b": "resolution", "c": "accuracy"}[scan]
        if required not in run:
            raise ConfigError("/run", f"'{required}' is required for clock scan {scan!r}")


def validate(data) -> RunConfig:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        e = errors[0]
        raise ConfigError(_pointer(e.absolute_path), e.message)
    _check_semantics(data)
    return RunConfig(copy.deepcopy(data))


def parse_config(text: str) -> RunConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return validate(data)


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def load_preset(name: str) -> RunConfig:
    if name not in PRESETS:
        raise ConfigError("", f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    text = resources.files("thermal_machines").joinpath("presets", f"{name}.json").read_text(encoding="utf-8")
    return parse_config(text)
