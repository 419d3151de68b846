"""JSON run configuration with a strict schema (unknown keys are rejected)."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

from .classical import DopoParams
from .errors import ValidationError
from .modes import CavityGeometry

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "lgdopo run configuration",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "geometry": {
            "type": "object",
            "additionalProperties": False,
            "required": ["R1", "R2", "L"],
            "properties": {
                "R1": {"type": ["number", "string"], "description": "mirror radius; \"inf\" for planar"},
                "R2": {"type": ["number", "string"]},
                "L": _POS,
                "l_c": {"type": "number", "minimum": 0},
                "n_c": {"type": "number", "minimum": 1},
            },
        },
        "operating_point": {
            "type": "object",
            "additionalProperties": False,
            "required": ["family", "sigma"],
            "properties": {
                "family": {"type": "integer", "minimum": 0},
                "sigma": {"type": "number", "minimum": 0},
                "g": _POS,
                "gamma_ratio": _POS,
                "gamma_s": _POS,
            },
        },
        "simulation": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "model": {"enum": ["adiabatic", "full"]},
                "dt": _POS,
                "burn_in": {"type": "number", "minimum": 0},
                "record_len": _POS,
                "n_traj": {"type": "integer", "minimum": 2},
                "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
                "sample_dt": _POS,
                "divergence_radius": _POS,
                "n_threads": {"type": "integer", "minimum": 1},
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dir": {"type": "string"},
                "formats": {
                    "type": "array",
                    "items": {"enum": ["csv", "pgm", "raw"]},
                    "uniqueItems": True,
                },
            },
        },
    },
}


@dataclass(frozen=True)
class RunConfig:
    geometry: CavityGeometry | None = None
    family: int = 2
    sigma: float = 2.0
    g: float = 0.01
    gamma_ratio: float = 1.0
    gamma_s: float = 1.0
    simulation: dict = field(default_factory=dict)
    out_dir: str = "out"
    formats: tuple = ("csv", "pgm")

    @property
    def params(self) -> DopoParams:
        return DopoParams(self.family, self.sigma, self.g, self.gamma_ratio)

    def sim_config(self, **overrides):
        from .stochastic.ensemble import SimConfig

        kw = dict(self.simulation)
        kw.update(overrides)
        return SimConfig(self.params, **kw)


def _radius(v):
    if isinstance(v, str):
        if v.strip().lower() in ("inf", "infinity"):
            return float("inf")
        raise ValidationError(f"mirror radius {v!r} is neither a number nor 'inf'")
    return float(v)


def parse_config(doc: dict) -> RunConfig:
    """Validate a decoded JSON document and build a :class:`RunConfig`."""
    try:
        jsonschema.validate(doc, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ValidationError(f"config {where}: {exc.message}") from None
    geom = None
    if "geometry" in doc:
        gd = doc["geometry"]
        geom = CavityGeometry(_radius(gd["R1"]), _radius(gd["R2"]), float(gd["L"]),
                              float(gd.get("l_c", 0.0)), float(gd.get("n_c", 1.0)))
        geom.check_stable()
    op = doc.get("operating_point", {"family": 2, "sigma": 2.0})
    out = doc.get("output", {})
    cfg = RunConfig(
        geometry=geom,
        family=op["family"],
        sigma=float(op["sigma"]),
        g=float(op.get("g", 0.01)),
        gamma_ratio=float(op.get("gamma_ratio", 1.0)),
        gamma_s=float(op.get("gamma_s", 1.0)),
        simulation=dict(doc.get("simulation", {})),
        out_dir=out.get("dir", "out"),
        formats=tuple(out.get("formats", ("csv", "pgm"))),
    )
    cfg.params  # validates the operating point
    if cfg.simulation:
        cfg.sim_config()
    return cfg


def load_config(path) -> RunConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config {path} is not valid JSON: {exc}") from None
    return parse_config(doc)
