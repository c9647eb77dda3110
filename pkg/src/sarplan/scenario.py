"""Scenario files: JSON mission requests with optional profile and solver settings."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema

from .energy import EnergyProfile, builtin_names, builtin_profile
from .planner import MissionRequest
from .solver import SolveBudget

_POS = {"type": "number", "exclusiveMinimum": 0}
_NONNEG = {"type": "number", "minimum": 0}
_CELL = {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 2, "maxItems": 2}

PROFILE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "battery_capacity": _POS,
        "rx_power": _NONNEG,
        "tx_power_base": _NONNEG,
        "tx_distance_coeff": _NONNEG,
        "tx_distance_exponent": _NONNEG,
        "sensing_power": _NONNEG,
        "idle_power": _NONNEG,
        "motion_power": {
            "type": "object",
            "minProperties": 1,
            "patternProperties": {r"^[0-9]*\.?[0-9]+$": _NONNEG},
            "additionalProperties": False,
        },
        "diagonal_factor": {"type": "number", "minimum": 1},
    },
}

SCENARIO_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["area", "err", "trt_s", "tfs", "profile"],
    "properties": {
        "name": {"type": "string"},
        "description": {"type": "string"},
        "area": {
            "type": "object",
            "additionalProperties": False,
            "required": ["width_m", "height_m"],
            "properties": {"width_m": _POS, "height_m": _POS},
        },
        "err": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "trt_s": _POS,
        "tfs": {"type": "integer", "minimum": 1},
        "profile": {"oneOf": [{"type": "string", "enum": builtin_names()},
                              dict(PROFILE_SCHEMA, required=["battery_capacity", "rx_power", "tx_power_base",
                                                             "sensing_power", "idle_power", "motion_power"])]},
        "profile_overrides": PROFILE_SCHEMA,
        "epoch_s": _POS,
        "speed_mps": _POS,
        "base_station": _CELL,
        "start_cells": {"type": "array", "items": _CELL},
        "initial_battery_j": _POS,
        "terrain_factor": _NONNEG,
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "mode": {"enum": ["exact", "heuristic", "auto"]},
                "max_nodes": {"type": "integer", "minimum": 1},
                "wall_seconds": _POS,
                "workers": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer"},
                "restarts": {"type": "integer", "minimum": 0},
            },
        },
    },
}


class ScenarioError(ValueError):
    """Scenario failed validation; ``errors`` holds (json pointer, message) pairs."""

    def __init__(self, errors: list[tuple[str, str]]):
        self.errors = errors
        super().__init__("; ".join(f"{ptr or '/'}: {msg}" for ptr, msg in errors))


@dataclass
class Scenario:
    name: str
    request: MissionRequest
    budget: SolveBudget
    raw: dict


def _pointer(path) -> str:
    return "".join(f"/{p}" for p in path)


def bundled_dir():
    return resources.files("sarplan") / "scenarios"


def resolve_path(path: str | Path) -> Path:
    """Return ``path`` if it exists, else the bundled scenario of that file name."""
    p = Path(path)
    if p.exists():
        return p
    candidate = bundled_dir() / p.name
    if candidate.is_file():
        return Path(str(candidate))
    raise FileNotFoundError(f"scenario {path} not found (also looked among bundled scenarios)")


def _profile(data: dict) -> EnergyProfile:
    base = data["profile"]
    if isinstance(base, str):
        prof = builtin_profile(base).to_dict()
    else:
        prof = dict(base)
        prof.setdefault("name", "custom")
    prof.update(data.get("profile_overrides", {}))
    return EnergyProfile.from_dict(prof)


def parse(data: dict, *, overrides: dict[str, Any] | None = None) -> Scenario:
    """Validate a scenario document and build the request and solver budget.

    ``overrides`` replaces ``solver`` settings (mode, max_nodes, wall_seconds,
    workers, seed, restarts) after validation.
    """
    validator = jsonschema.Draft202012Validator(SCENARIO_SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        raise ScenarioError([(_pointer(e.absolute_path), e.message) for e in errors])
    epoch = float(data.get("epoch_s", 10.0))
    if data["trt_s"] < epoch:
        raise ScenarioError([("/trt_s", f"target response time {data['trt_s']} s is shorter than one epoch ({epoch} s)")])
    try:
        req = MissionRequest(
            area_width=float(data["area"]["width_m"]),
            area_height=float(data["area"]["height_m"]),
            err=float(data["err"]),
            trt=float(data["trt_s"]),
            tfs=int(data["tfs"]),
            profile=_profile(data),
            epoch_duration=epoch,
            speed=float(data.get("speed_mps", 1.0)),
            base_station=tuple(data.get("base_station", (0, 0))),
            start_cells=tuple(tuple(c) for c in data.get("start_cells", ())),
            initial_battery=data.get("initial_battery_j"),
            terrain_factor=float(data.get("terrain_factor", 1.0)),
        )
        grid = req.grid()
        for i in range(len(req.start_cells)):
            if not grid.contains(req.start_of(i)):
                raise ScenarioError([(f"/start_cells/{i}", "start cell lies outside the grid")])
        if req.initial_battery is not None and req.initial_battery > req.profile.battery_capacity:
            raise ScenarioError([("/initial_battery_j", "initial battery exceeds battery capacity")])
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError([("/", str(exc))]) from None
    solver = dict(data.get("solver", {}))
    solver.update({k: v for k, v in (overrides or {}).items() if v is not None})
    budget = SolveBudget(
        max_nodes=int(solver.get("max_nodes", SolveBudget.max_nodes)),
        wall_limit=float(solver.get("wall_seconds", SolveBudget.wall_limit)),
        mode=solver.get("mode", "auto"),
        workers=int(solver.get("workers", 1)),
        seed=int(solver.get("seed", 0)),
        restarts=int(solver.get("restarts", 0)),
    )
    return Scenario(data.get("name", "scenario"), req, budget, data)


def load(path: str | Path, *, overrides: dict[str, Any] | None = None) -> Scenario:
    p = resolve_path(path)
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError([("/", f"invalid JSON: {exc}")]) from None
    if not isinstance(data, dict):
        raise ScenarioError([("/", "scenario must be a JSON object")])
    return parse(data, overrides=overrides)
