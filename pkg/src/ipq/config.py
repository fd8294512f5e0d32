"""Run configuration: YAML ingestion, schema validation, defaults and figure presets.

Dynamics configs are expressed in units of the gate coupling (``units: G``), thermalization
configs in units of the bath coupling (``units: Gamma``). A config may carry ``variants``,
each a label plus overrides merged onto the base, so one preset can produce several curves.
"""

from __future__ import annotations

import copy
import math
from pathlib import Path
from typing import Any, Optional

import jsonschema
import yaml

from .errors import ConfigError

PI = math.pi

_spectrum = {
    "type": "object",
    "properties": {
        "Gamma": {"type": "number", "minimum": 0},
        "gamma": {"type": "number", "exclusiveMinimum": 0},
        "Omega": {"type": "number", "exclusiveMinimum": 0},
    },
    "required": ["Gamma", "gamma", "Omega"],
    "additionalProperties": False,
}

_beta = {"type": "number", "exclusiveMinimum": 0}

_section_props = {
    "name": {"type": "string"},
    "description": {"type": "string"},
    "kind": {"enum": ["collective", "individual", "thermalization", "qec"]},
    "units": {"enum": ["G", "Gamma"]},
    "coupling": {"enum": ["collective", "individual"]},
    "gate": {
        "type": "object",
        "properties": {"type": {"enum": ["storage", "x", "z"]}, "strength": {"type": "number", "minimum": 0}},
        "additionalProperties": False,
    },
    "bath": _spectrum,
    "baths": {"type": "array", "items": _spectrum, "minItems": 2, "maxItems": 2},
    "omega0": {"type": "number", "exclusiveMinimum": 0},
    "omega0_pair": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    "beta": _beta,
    "betas": {"type": "array", "items": _beta, "minItems": 2, "maxItems": 2},
    "rwa": {"type": "boolean"},
    "duration": {"type": "number", "exclusiveMinimum": 0},
    "leo": {
        "type": "object",
        "properties": {
            "enabled": {"type": "boolean"},
            "strength": {"type": "number", "minimum": 0},
            "width": {"type": "number", "exclusiveMinimum": 0},
            "spacing": {"type": "number", "minimum": 0},
        },
        "additionalProperties": False,
    },
    "initial": {
        "type": "object",
        "properties": {
            "alpha0": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
            "alpha1": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        },
        "required": ["alpha0", "alpha1"],
        "additionalProperties": False,
    },
    "steady": {
        "type": "object",
        "properties": {
            "tol": {"type": "number", "exclusiveMinimum": 0},
            "max_duration": {"type": "number", "exclusiveMinimum": 0},
        },
        "additionalProperties": False,
    },
    "solver": {
        "type": "object",
        "properties": {
            "method": {"enum": ["exponential", "generic"]},
            "step": {"type": ["number", "null"], "exclusiveMinimum": 0},
            "points_per_cycle": {"type": "integer", "minimum": 4},
            "quad_nodes": {"type": "integer", "minimum": 8},
            "quad_width": {"type": "number", "exclusiveMinimum": 0},
            "quad_check": {"type": "boolean"},
            "quad_tol": {"type": "number", "exclusiveMinimum": 0},
            "richardson": {"type": "boolean"},
            "refine_check": {"type": "boolean"},
            "refine_tol": {"type": "number", "exclusiveMinimum": 0},
        },
        "additionalProperties": False,
    },
    "oracle": {
        "type": "object",
        "properties": {
            "enabled": {"type": "boolean"},
            "modes": {"type": "integer", "minimum": 8},
            "coverage": {"type": "number", "exclusiveMinimum": 0},
        },
        "additionalProperties": False,
    },
    "output": {
        "type": "object",
        "properties": {
            "dir": {"type": "string"},
            "max_rows": {"type": "integer", "minimum": 2},
            "coefficients": {"type": "boolean"},
        },
        "additionalProperties": False,
    },
    "qec": {
        "type": "object",
        "properties": {
            "epsilon": {"type": ["number", "null"], "exclusiveMinimum": 0},
            "cutoff": {"type": "integer", "minimum": 2, "maximum": 12},
            "trials": {"type": "integer", "minimum": 1},
        },
        "additionalProperties": False,
    },
    "sweep": {
        "type": "object",
        "properties": {
            "axis": {"type": "string"},
            "values": {"type": "array", "items": {"type": "number"}},
            "mean_beta": _beta,
        },
        "required": ["axis", "values"],
        "additionalProperties": False,
    },
    "seed": {"type": "integer", "minimum": 0},
}

_variant = {
    "type": "object",
    "properties": {"label": {"type": "string"}, **{k: v for k, v in _section_props.items() if k not in ("kind", "units", "variants")}},
    "required": ["label"],
    "additionalProperties": False,
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {**_section_props, "variants": {"type": "array", "items": _variant}},
    "required": ["kind", "units"],
    "additionalProperties": False,
    "allOf": [
        {"if": {"properties": {"kind": {"const": "thermalization"}}}, "then": {"properties": {"units": {"const": "Gamma"}}}},
        {"if": {"properties": {"kind": {"enum": ["collective", "individual"]}}}, "then": {"properties": {"units": {"const": "G"}}}},
    ],
}

DEFAULTS: dict = {
    "gate": {"type": "storage", "strength": 1.0},
    "leo": {"enabled": False, "strength": 50.0, "width": 0.02 * PI, "spacing": 0.005 * PI},
    "initial": {"alpha0": [math.sqrt(0.5), 0.0], "alpha1": [math.sqrt(0.5), 0.0]},
    "rwa": True,
    "steady": {"tol": 1e-3, "max_duration": 200.0},
    "solver": {
        "method": "exponential",
        "step": None,
        "points_per_cycle": 50,
        "quad_nodes": 128,
        "quad_width": 30.0,
        "quad_check": True,
        "quad_tol": 1e-4,
        "richardson": False,
        "refine_check": False,
        "refine_tol": 1e-8,
    },
    "oracle": {"enabled": False, "modes": 400, "coverage": 20.0},
    "output": {"max_rows": 2000, "coefficients": False},
    "qec": {"epsilon": None, "cutoff": 4, "trials": 100},
    "seed": 0,
}


def deep_merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = deep_merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def validate(cfg: dict) -> dict:
    try:
        jsonschema.validate(cfg, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {exc.message}") from None
    kind = cfg["kind"]
    need = {
        "collective": ("bath", "omega0", "beta", "duration"),
        "individual": ("baths", "omega0_pair", "betas", "duration"),
        "thermalization": ("coupling", "bath", "omega0"),
        "qec": (),
    }[kind]
    base = {k: v for k, v in cfg.items() if k != "variants"}
    for v in cfg.get("variants") or [{}]:
        merged = deep_merge(base, v)
        missing = [k for k in need if k not in merged]
        if missing:
            where = f" (variant {v['label']})" if "label" in v else ""
            raise ConfigError(f"{kind} config missing {', '.join(missing)}{where}")
    return cfg


def normalize(cfg: dict) -> dict:
    """Validate, then fill defaults."""
    validate(cfg)
    return deep_merge(DEFAULTS, cfg)


def load(path) -> dict:
    text = Path(path).read_text()
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    return normalize(raw)


def expand_variants(cfg: dict) -> list:
    """``[(label, merged config)]``; a config without variants yields one entry."""
    variants = cfg.get("variants") or []
    base = {k: v for k, v in cfg.items() if k != "variants"}
    if not variants:
        return [(cfg.get("name", cfg["kind"]), base)]
    out = []
    for v in variants:
        over = {k: val for k, val in v.items() if k != "label"}
        out.append((v["label"], deep_merge(base, over)))
    return out


# ---------------------------------------------------------------- presets

_FIG1 = {
    "kind": "collective",
    "units": "G",
    "bath": {"Gamma": 5.0, "gamma": 0.5, "Omega": 100.0},
    "omega0": 100.0,
    "beta": 0.01,
    "duration": PI,
    "leo": {"strength": 50.0, "width": 0.02 * PI, "spacing": 0.005 * PI},
}

_FIG3 = {
    "kind": "individual",
    "units": "G",
    "baths": [{"Gamma": 5.0, "gamma": 0.5, "Omega": 100.0}] * 2,
    "omega0_pair": [100.0, 100.0],
    "betas": [0.001, 0.001],
    "rwa": False,
    "duration": PI,
    "leo": {"strength": 80.0, "width": PI / 50, "spacing": PI / 200},
}

_FIG2 = {
    "kind": "thermalization",
    "units": "Gamma",
    "bath": {"Gamma": 1.0, "gamma": 2.5, "Omega": 100.0},
    "omega0": 100.0,
    "initial": {"alpha0": [1.0, 0.0], "alpha1": [0.0, 0.0]},
    "duration": 10.0,
}

_ON = {"leo": {"enabled": True}}
_OFF = {"leo": {"enabled": False}}
_DFS = {"initial": {"alpha0": [-math.sqrt(0.5), 0.0], "alpha1": [math.sqrt(0.5), 0.0]}}

PRESETS: dict = {
    "fig1a": deep_merge(_FIG1, {
        "name": "fig1a",
        "description": "Collective storage, average excitation numbers with and without LEO",
        "variants": [{"label": "no_leo", **_OFF}, {"label": "leo", **_ON}],
    }),
    "fig1b": deep_merge(_FIG1, {
        "name": "fig1b",
        "description": "Collective storage infidelity, LEO off/on, plus the a0 DFS state at beta = 1/omega0 and 10/omega0",
        "variants": [
            {"label": "no_leo", **_OFF},
            {"label": "leo", **_ON},
            {"label": "dfs_beta1", **_DFS},
            {"label": "dfs_beta10", **_DFS, "beta": 0.1},
        ],
    }),
    "fig1c": deep_merge(_FIG1, {
        "name": "fig1c",
        "description": "Collective Z gate infidelity with and without LEO",
        "gate": {"type": "z", "strength": 1.0},
        "variants": [{"label": "no_leo", **_OFF}, {"label": "leo", **_ON}],
    }),
    "fig1d": deep_merge(_FIG1, {
        "name": "fig1d",
        "description": "Collective X gate infidelity with and without LEO",
        "gate": {"type": "x", "strength": 1.0},
        "variants": [{"label": "no_leo", **_OFF}, {"label": "leo", **_ON}],
    }),
    "fig2a": deep_merge(_FIG2, {
        "name": "fig2a",
        "description": "Excitation numbers from c0^dag|vac>, collective and individual (RWA) reservoirs, zero and finite temperature",
        "variants": [
            {"label": "collective_T0", "coupling": "collective"},
            {"label": "collective_T100", "coupling": "collective", "beta": 0.01},
            {"label": "individual_T0", "coupling": "individual"},
            {"label": "individual_T100", "coupling": "individual", "beta": 0.01},
        ],
    }),
    "fig2b": deep_merge(_FIG2, {
        "name": "fig2b",
        "description": "Steady-state excitation numbers against 1/beta (collective reservoir)",
        "coupling": "collective",
        "sweep": {"axis": "temperature", "values": [0.0, 25.0, 50.0, 75.0, 100.0, 125.0, 150.0, 175.0, 200.0]},
    }),
    "fig3a": deep_merge(_FIG3, {
        "name": "fig3a",
        "description": "Individual-reservoir gates at beta1 = beta2 = 0.1/omega0, with and without LEO",
        "variants": [
            {"label": f"{g}_{tag}", "gate": {"type": g}, **leo}
            for g in ("storage", "z", "x")
            for tag, leo in (("no_leo", _OFF), ("leo", _ON))
        ],
    }),
    "fig3b": deep_merge(_FIG3, {
        "name": "fig3b",
        "description": "Storage infidelity without LEO against the reservoir temperature difference beta1 - beta0",
        "leo": {"enabled": False},
        "sweep": {"axis": "beta_difference", "mean_beta": 0.001, "values": [-0.0008, -0.0004, 0.0, 0.0004, 0.0008]},
    }),
}


def preset(name: str) -> dict:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}")
    return normalize(copy.deepcopy(PRESETS[name]))


def resolve(config_path: Optional[str] = None, preset_name: Optional[str] = None) -> dict:
    if bool(config_path) == bool(preset_name):
        raise ConfigError("give exactly one of --config or --preset")
    return load(config_path) if config_path else preset(preset_name)


def dump(cfg: dict) -> str:
    return yaml.safe_dump(cfg, sort_keys=True)


def get_path(cfg: dict, dotted: str) -> Any:
    node = cfg
    for part in dotted.split("."):
        node = node[part]
    return node


def set_path(cfg: dict, dotted: str, value) -> dict:
    out = copy.deepcopy(cfg)
    node = out
    parts = dotted.split(".")
    for part in parts[:-1]:
        node = node.setdefault(part, {})
    node[parts[-1]] = value
    return out
