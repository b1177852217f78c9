"""JSON experiment configs: schema check, defaults, model construction."""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from typing import Any

import jsonschema

from .model import (
    DO,
    Bounded,
    EquationSpec,
    Fractional,
    Generalized,
    NoiseSpec,
    Riesz,
    SpaceWhite,
    WhiteTime,
)


class ConfigError(ValueError):
    """Malformed config; the message names the offending line or field."""


class ConfigDomainError(ConfigError):
    """Well-formed config whose parameters lie outside the model's domain."""


def schema() -> dict:
    text = resources.files(__package__).joinpath("config_schema.json").read_text("utf-8")
    return json.loads(text)


_DEFAULTS = {
    "equation": {"d": 1, "u0": 1.0, "v0": 0.0},
    "run": {
        "t": [],
        "n": [2],
        "n_rep": 10000,
        "quad_steps": 256,
        "method": "poisson",
        "x": 0.0,
        "clip": 1e-6,
        "volterra_steps": 4096,
        "lattice": {},
    },
    "output": {"trace": False, "dump_fields": False},
}


def _fill(target: dict, defaults: dict) -> None:
    for k, v in defaults.items():
        if k not in target:
            target[k] = copy.deepcopy(v)
        elif isinstance(v, dict) and isinstance(target[k], dict):
            _fill(target[k], v)


def _float_fields(cfg: dict) -> None:
    # 1 and 1.0 must hash and round-trip identically
    for key in ("u0", "v0"):
        cfg["equation"][key] = float(cfg["equation"][key])
    for key in ("H", "a1", "a2"):
        if key in cfg["noise"]:
            cfg["noise"][key] = float(cfg["noise"][key])
    for key, v in list(cfg["noise"]["spatial"].items()):
        if key != "kind" and key != "profile":
            cfg["noise"]["spatial"][key] = float(v)
    run = cfg["run"]
    run["t"] = [float(v) for v in run["t"]]
    run["x"] = float(run["x"])
    run["clip"] = float(run["clip"])
    if "L" in run["lattice"]:
        run["lattice"]["L"] = float(run["lattice"]["L"])


@dataclass(frozen=True)
class ExperimentConfig:
    data: dict

    @property
    def equation(self) -> EquationSpec:
        e = self.data["equation"]
        return EquationSpec(e["kind"], e["d"], e["u0"], e["v0"])

    @property
    def noise(self) -> NoiseSpec:
        return _build_noise(self.data["noise"])

    @property
    def run(self) -> dict:
        return self.data["run"]

    @property
    def output(self) -> dict:
        return self.data["output"]

    def to_json(self) -> str:
        return json.dumps(self.data, indent=2, sort_keys=True) + "\n"

    @property
    def hash(self) -> str:
        """Digest of everything except the output block."""
        body = {k: v for k, v in self.data.items() if k != "output"}
        canon = json.dumps(body, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]

    def __eq__(self, other):
        return isinstance(other, ExperimentConfig) and self.data == other.data

    def __hash__(self):
        return hash(self.hash)


def _build_spatial(sp: dict):
    kind = sp["kind"]
    if kind == "bounded":
        if "A0" not in sp:
            raise ConfigError("noise.spatial.A0: required for bounded covariance")
        if "alpha" in sp:
            raise ConfigError("noise.spatial.alpha: not allowed for bounded covariance")
        return Bounded(sp["A0"], sp.get("profile", "constant"), sp.get("width"))
    if kind == "riesz":
        if "alpha" not in sp:
            raise ConfigError("noise.spatial.alpha: required for Riesz covariance")
        extra = set(sp) - {"kind", "alpha"}
        if extra:
            raise ConfigError(f"noise.spatial.{sorted(extra)[0]}: not allowed for Riesz covariance")
        return Riesz(sp["alpha"])
    extra = set(sp) - {"kind"}
    if extra:
        raise ConfigError(f"noise.spatial.{sorted(extra)[0]}: not allowed for space-white noise")
    return SpaceWhite()


def _build_noise(nz: dict) -> NoiseSpec:
    fam = nz["family"]
    spatial = _build_spatial(nz["spatial"])
    if fam == "generalized":
        if "H" in nz:
            raise ConfigError("noise.H: derived from a1 and a2 for generalized noise; remove it")
        for key in ("a1", "a2"):
            if key not in nz:
                raise ConfigError(f"noise.{key}: required for generalized noise")
        return NoiseSpec(Generalized(nz["a1"], nz["a2"]), spatial)
    for key in ("a1", "a2"):
        if key in nz:
            raise ConfigError(f"noise.{key}: only allowed for generalized noise")
    if fam == "white":
        if "H" in nz and nz["H"] != 0.5:
            raise ConfigError("noise.H: white-in-time noise has H = 0.5")
        return NoiseSpec(WhiteTime(), spatial)
    if "H" not in nz:
        raise ConfigError(f"noise.H: required for {fam} noise")
    return NoiseSpec(DO(nz["H"]) if fam == "do" else Fractional(nz["H"]), spatial)


def parse_config(text: str) -> ExperimentConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return config_from_dict(raw)


def config_from_dict(raw: Any) -> ExperimentConfig:
    try:
        jsonschema.validate(raw, schema())
    except jsonschema.ValidationError as exc:
        where = ".".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {exc.message}") from None
    data = copy.deepcopy(raw)
    _fill(data, _DEFAULTS)
    _float_fields(data)
    cfg = ExperimentConfig(data)
    try:
        cfg.equation
        cfg.noise
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigDomainError(f"equation/noise: {exc}") from None
    return cfg


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    return parse_config(text)
