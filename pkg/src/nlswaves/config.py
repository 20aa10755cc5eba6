"""Experiment configuration: a small dotted key = value text format.

Grammar (one assignment per line, '#' starts a comment):

    seed = 12345
    nonlinearity.kind = polynomial
    nonlinearity.r0 = 1.0
    nonlinearity.coeffs = [-1.0, 1.5, -1.5]
    nonlinearity.params.rho0 = 0.4
    profile.c = 0.5
    grid.h = auto
    diagram.c_min = 0.05

Values are parsed as int, float, the word auto (None), a quoted or bare
string, or a bracketed comma-separated list of numbers. Serialization
emits sorted dotted keys, so parse -> serialize is the identity on
canonical files and unknown keys are rejected against the schema below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

# key -> type tag; "num" accepts int or float, "list" a list of numbers
SCHEMA = {
    "seed": "int",
    "nonlinearity.kind": "str",
    "nonlinearity.r0": "num",
    "nonlinearity.coeffs": "list",
    "nonlinearity.params.rho0": "num",
    "nonlinearity.params.alpha": "num",
    "nonlinearity.params.beta": "num",
    "nonlinearity.params.gamma": "num",
    "nonlinearity.params.nu": "num",
    "nonlinearity.params.sigma": "num",
    "nonlinearity.params.kappa": "num",
    "grid.h": "num?",
    "grid.L": "num?",
    "profile.c": "num",
    "diagram.c_min": "num",
    "diagram.c_max": "num",
    "diagram.n": "int",
    "classify.c": "num",
    "spectrum.c": "num",
    "spectrum.N": "int",
    "spectrum.write_mode": "int",
    "evolve.initial": "str",         # exact | wave+mode | wave+random
    "evolve.c": "num",
    "evolve.c_frame": "num?",
    "evolve.delta": "num",
    "evolve.T": "num",
    "evolve.dt": "num",
    "evolve.output_stride": "int",
    "evolve.h": "num?",
    "evolve.L": "num?",
    "evolve.track_distances": "int",
    "evolve.untwisted": "int",
    "evolve.snapshots": "int",
    "distances.mode": "str",         # invariance | phase_sequence
    "distances.c": "num",
    "distances.n_values": "list",
    "distances.theta": "num",
    "distances.y": "num",
}


class ConfigError(ValueError):
    def __init__(self, message, line=None, key=None):
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if key is not None:
            loc.append(f"key {key!r}")
        super().__init__((" (".join([message] + loc) + ")" * len(loc)) if loc else message)
        self.line = line
        self.key = key


@dataclass
class ExperimentConfig:
    values: dict = field(default_factory=dict)

    def get(self, key, default=None):
        return self.values.get(key, default)

    def require(self, key):
        if key not in self.values:
            raise ConfigError(f"missing required key", key=key)
        return self.values[key]

    def nonlinearity_spec(self) -> dict:
        spec = {"kind": self.require("nonlinearity.kind")}
        if "nonlinearity.r0" in self.values:
            spec["r0"] = self.values["nonlinearity.r0"]
        if "nonlinearity.coeffs" in self.values:
            spec["coeffs"] = self.values["nonlinearity.coeffs"]
        params = {k.rsplit(".", 1)[1]: v for k, v in self.values.items()
                  if k.startswith("nonlinearity.params.")}
        if params:
            spec["params"] = params
        return spec


def _parse_value(raw: str, tag: str, line_no: int, key: str):
    raw = raw.strip()
    if raw == "auto":
        if tag.endswith("?"):
            return None
        raise ConfigError("auto is not allowed for this key", line_no, key)
    base = tag.rstrip("?")
    if base == "list":
        if not (raw.startswith("[") and raw.endswith("]")):
            raise ConfigError("expected a bracketed list", line_no, key)
        body = raw[1:-1].strip()
        if not body:
            return []
        try:
            return [float(tok) for tok in body.split(",")]
        except ValueError:
            raise ConfigError("list entries must be numbers", line_no, key)
    if base == "int":
        try:
            return int(raw)
        except ValueError:
            raise ConfigError("expected an integer", line_no, key)
    if base == "num":
        try:
            val = float(raw)
        except ValueError:
            raise ConfigError("expected a number", line_no, key)
        if not math.isfinite(val):
            raise ConfigError("number must be finite", line_no, key)
        return val
    return raw.strip('"')


def parse_config(text: str) -> ExperimentConfig:
    values = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError("expected key = value", line=line_no)
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError("unknown key", line_no, key)
        if key in values:
            raise ConfigError("duplicate key", line_no, key)
        values[key] = _parse_value(raw, SCHEMA[key], line_no, key)
    return ExperimentConfig(values)


def _format_value(key: str, val) -> str:
    tag = SCHEMA[key].rstrip("?")
    if val is None:
        return "auto"
    if tag == "list":
        return "[" + ", ".join(_num(v) for v in val) + "]"
    if tag == "int":
        return str(int(val))
    if tag == "num":
        return _num(val)
    return str(val)


def _num(v) -> str:
    return f"{float(v):.17g}"


def serialize_config(cfg: ExperimentConfig) -> str:
    lines = [f"{k} = {_format_value(k, cfg.values[k])}" for k in sorted(cfg.values)]
    return "\n".join(lines) + "\n"
