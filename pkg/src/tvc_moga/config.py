"""JSON run configuration: parsing, validation and echo.

Every section is optional and falls back to the library defaults.  Unknown
keys are rejected, and every error names the offending key path (plus the
line it sits on when the source text is available).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

from .fuzzy import MembershipTriple, PfieRuleSet, SifieRuleSet
from .moga import GaConfig
from .plant import PlantParams
from .simulation import ControllerConfig, SimConfig

SCHEMA_VERSION = 1
SIFIE_CHANNELS = ("integral", "proportional", "derivative")


class ConfigError(ValueError):
    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        self.message = message
        self.key = key
        self.line = line
        where = "".join([f"line {line}: " if line else "", f"{key}: " if key else ""])
        super().__init__(where + message)


def _check_keys(section: dict, allowed, path: str):
    if not isinstance(section, dict):
        raise ConfigError("expected an object", path or "<root>")
    for key in section:
        if key not in allowed:
            raise ConfigError(f"unknown key (allowed: {', '.join(sorted(allowed))})", f"{path}.{key}" if path else key)


def _build(cls, section: dict, path: str, **extra):
    names = {f.name for f in fields(cls) if f.init} - set(extra)
    _check_keys(section, names, path)
    kwargs = {k: tuple(v) if isinstance(v, list) else v for k, v in section.items()}
    try:
        return cls(**kwargs, **extra)
    except (TypeError, ValueError) as exc:
        key = _guess_key(str(exc), section, path)
        raise ConfigError(str(exc), key) from exc


def _guess_key(message: str, section: dict, path: str) -> str:
    for key in section:
        if re.search(rf"\b{re.escape(key)}\b", message):
            return f"{path}.{key}"
    return path


def _triple(section: dict, labels, path: str) -> MembershipTriple:
    _check_keys(section, {"shapes", "lo", "hi"}, path)
    try:
        return MembershipTriple(labels, tuple(tuple(s) for s in section["shapes"]), section["lo"], section["hi"])
    except KeyError as exc:
        raise ConfigError("missing required key", f"{path}.{exc.args[0]}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc), f"{path}.shapes") from exc


def _triple_to_dict(t: MembershipTriple) -> dict:
    return {"shapes": [list(s) for s in t.shapes], "lo": t.lo, "hi": t.hi}


def controller_from_dict(section: dict, path: str = "controller") -> ControllerConfig:
    _check_keys(section, {"sifie", "pfie", "input_scales", "integral_clamp", "importance", "regulation_coeff"}, path)
    section = dict(section)
    kwargs: dict[str, Any] = {}
    if "sifie" in section:
        sif = section.pop("sifie")
        _check_keys(sif, set(SIFIE_CHANNELS), f"{path}.sifie")
        kwargs["sifie"] = tuple(
            SifieRuleSet(_triple(sif[ch], ("NB", "Z", "PB"), f"{path}.sifie.{ch}")) if ch in sif else SifieRuleSet()
            for ch in SIFIE_CHANNELS
        )
    if section.get("pfie") is not None:
        kwargs["pfie"] = PfieRuleSet(_triple(section.pop("pfie"), ("DS", "DM", "DL"), f"{path}.pfie"))
    section.pop("pfie", None)
    for key in ("input_scales", "importance", "regulation_coeff"):
        if section.get(key) is not None:
            val = section.pop(key)
            if not (isinstance(val, list) and len(val) == 3 and all(isinstance(v, (int, float)) for v in val)):
                raise ConfigError("expected a list of three numbers", f"{path}.{key}")
            if key == "input_scales" and any(v <= 0 for v in val):
                raise ConfigError("input scales must be positive", f"{path}.{key}")
            kwargs[key] = tuple(float(v) for v in val)
        section.pop(key, None)
    if section.get("integral_clamp") is not None:
        clamp = section.pop("integral_clamp")
        if not (isinstance(clamp, (int, float)) and clamp > 0):
            raise ConfigError("must be a positive number", f"{path}.integral_clamp")
        kwargs["integral_clamp"] = float(clamp)
    return ControllerConfig(**kwargs)


def controller_to_dict(c: ControllerConfig) -> dict:
    return {
        "sifie": {ch: _triple_to_dict(r.memberships) for ch, r in zip(SIFIE_CHANNELS, c.sifie)},
        "pfie": _triple_to_dict(c.pfie.memberships) if c.pfie is not None else None,
        "input_scales": list(c.input_scales) if c.input_scales is not None else None,
        "integral_clamp": c.integral_clamp,
        "importance": list(c.importance),
        "regulation_coeff": list(c.regulation_coeff),
    }


def sim_from_dict(d: dict) -> SimConfig:
    """Build a SimConfig from the ``plant``, ``actuator``, ``controller`` and ``sim`` sections."""
    plant = _build(PlantParams, d.get("plant", {}), "plant")
    actuator = d.get("actuator", {})
    _check_keys(actuator, {"phi_max"}, "actuator")
    controller = controller_from_dict(d.get("controller", {}))
    sim = d.get("sim", {})
    _check_keys(sim, {"theta0", "theta_dot0", "T", "dt", "penalty"}, "sim")
    extra = {"plant": plant, "controller": controller}
    if "phi_max" in actuator:
        extra["phi_max"] = actuator["phi_max"]
    try:
        return SimConfig(**sim, **extra)
    except (TypeError, ValueError) as exc:
        key = "actuator.phi_max" if "phi_max" in str(exc) else _guess_key(str(exc), sim, "sim")
        raise ConfigError(str(exc), key) from exc


def sim_to_dict(cfg: SimConfig) -> dict:
    p = cfg.plant
    return {
        "plant": {"m": p.m, "l": p.l, "I": p.I, "a": p.a, "g": p.g},
        "actuator": {"phi_max": cfg.phi_max},
        "controller": controller_to_dict(cfg.controller),
        "sim": {"theta0": cfg.theta0, "theta_dot0": cfg.theta_dot0, "T": cfg.T, "dt": cfg.dt, "penalty": cfg.penalty},
    }


def ga_from_dict(section: dict) -> GaConfig:
    return _build(GaConfig, section, "ga")


@dataclass(frozen=True)
class SweepSettings:
    ps_values: tuple[int, ...] = (90, 200, 500)
    cf_values: tuple[float, ...] = (0.4, 0.6, 0.8)
    seeds_per_cell: int = 5
    base_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "ps_values", tuple(self.ps_values))
        object.__setattr__(self, "cf_values", tuple(self.cf_values))
        if not self.ps_values:
            raise ValueError("ps_values must be non-empty")
        if not self.cf_values:
            raise ValueError("cf_values must be non-empty")
        if self.seeds_per_cell < 1:
            raise ValueError("seeds_per_cell must be >= 1")


@dataclass(frozen=True)
class GainsRef:
    """Gains taken from a saved front: ``point`` is A, B, C or a member index."""

    front: str
    point: str | int = "C"


@dataclass(frozen=True)
class RunConfig:
    sim: SimConfig = field(default_factory=SimConfig)
    ga: GaConfig = field(default_factory=GaConfig)
    sweep: SweepSettings = field(default_factory=SweepSettings)
    gains: tuple[float, ...] | GainsRef | None = None
    output_dir: str | None = None
    plots: dict = field(default_factory=lambda: {"trajectory": True, "pareto": True, "matrix": True})
    source: str | None = None  # path the config was read from


TOP_LEVEL = {"schema_version", "plant", "actuator", "controller", "sim", "ga", "sweep", "gains", "output_dir", "plots"}


def parse_config(d: dict, base_dir: Path | None = None) -> RunConfig:
    _check_keys(d, TOP_LEVEL, "")
    version = d.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema version {version!r} (expected {SCHEMA_VERSION})", "schema_version")
    sim = sim_from_dict(d)
    ga = ga_from_dict(d.get("ga", {}))
    sweep = _build(SweepSettings, d.get("sweep", {}), "sweep")
    gains = d.get("gains")
    if isinstance(gains, list):
        if len(gains) != 6 or not all(isinstance(v, (int, float)) for v in gains):
            raise ConfigError("expected six numbers (K_i, K_p, K_d base then regulation)", "gains")
        gains = tuple(float(v) for v in gains)
    elif isinstance(gains, dict):
        _check_keys(gains, {"front", "point"}, "gains")
        if "front" not in gains:
            raise ConfigError("missing required key", "gains.front")
        front = Path(gains["front"])
        if base_dir is not None and not front.is_absolute():
            front = base_dir / front
        point = gains.get("point", "C")
        if not (point in ("A", "B", "C") or (isinstance(point, int) and point >= 0)):
            raise ConfigError("must be 'A', 'B', 'C' or a member index", "gains.point")
        gains = GainsRef(str(front), point)
    elif gains is not None:
        raise ConfigError("expected a list of six gains or a front reference", "gains")
    plots = {"trajectory": True, "pareto": True, "matrix": True}
    p = d.get("plots", {})
    _check_keys(p, set(plots), "plots")
    for k, v in p.items():
        if not isinstance(v, bool):
            raise ConfigError("expected true or false", f"plots.{k}")
        plots[k] = v
    out = d.get("output_dir")
    if out is not None and not isinstance(out, str):
        raise ConfigError("expected a path string", "output_dir")
    return RunConfig(sim=sim, ga=ga, sweep=sweep, gains=gains, output_dir=out, plots=plots)


def _line_of(text: str, key: str | None) -> int | None:
    if not key:
        return None
    leaf = key.rsplit(".", 1)[-1]
    for i, line in enumerate(text.splitlines(), 1):
        if re.search(rf'"{re.escape(leaf)}"\s*:', line):
            return i
    return None


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    text = path.read_text()
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc.msg} (column {exc.colno})", line=exc.lineno) from exc
    try:
        cfg = parse_config(d, base_dir=path.parent)
    except ConfigError as exc:
        raise ConfigError(exc.message, exc.key, _line_of(text, exc.key)) from exc
    return RunConfig(**{**{f.name: getattr(cfg, f.name) for f in fields(cfg)}, "source": str(path)})


def run_config_to_dict(cfg: RunConfig) -> dict:
    d = {"schema_version": SCHEMA_VERSION, **sim_to_dict(cfg.sim), "ga": cfg.ga.to_dict()}
    s = cfg.sweep
    d["sweep"] = {"ps_values": list(s.ps_values), "cf_values": list(s.cf_values),
                  "seeds_per_cell": s.seeds_per_cell, "base_seed": s.base_seed}
    if isinstance(cfg.gains, GainsRef):
        d["gains"] = {"front": cfg.gains.front, "point": cfg.gains.point}
    elif cfg.gains is not None:
        d["gains"] = list(cfg.gains)
    if cfg.output_dir is not None:
        d["output_dir"] = cfg.output_dir
    d["plots"] = dict(cfg.plots)
    return d
