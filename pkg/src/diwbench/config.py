"""YAML (de)serialisation of specs, plans and the workbench configuration."""

from __future__ import annotations

import dataclasses
import hashlib
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

import yaml

from .errors import InvalidSpec
from .gcode import emit
from .harness import ProtocolConfig
from .sensor import CircularElectrode, LayerStack, MaterialParams, SensorSpec, SerpentinePattern
from .toolpath import Cure, FabricationPlan, PourSilicone, PrintInk, PrintParams, StackTray

CONFIG_ENV = "DIWBENCH_CONFIG"

_PATTERN_TYPES = {"serpentine": SerpentinePattern, "electrode": CircularElectrode}


def _plain(value):
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    if isinstance(value, list):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    return value


def from_dict(cls, data: dict | None, base=None):
    """Build dataclass ``cls`` from a mapping, rejecting unknown keys."""
    data = dict(data or {})
    names = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise InvalidSpec(f"unknown {cls.__name__} field(s): {', '.join(unknown)}")
    for f in fields(cls):
        if f.name in data and isinstance(data[f.name], list):
            data[f.name] = tuple(data[f.name])
    try:
        return replace(base, **data) if base is not None else cls(**data)
    except TypeError as exc:
        raise InvalidSpec(f"bad {cls.__name__}: {exc}") from None


def dump_yaml(data: Any) -> str:
    return yaml.safe_dump(_plain(data), sort_keys=False, allow_unicode=True)


def load_yaml(path) -> Any:
    try:
        return yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise InvalidSpec(f"{path}: not valid YAML ({exc})") from None


# ---------------------------------------------------------------------------
# sensor specs
# ---------------------------------------------------------------------------

def spec_to_dict(spec: SensorSpec) -> dict:
    pattern_type = "electrode" if isinstance(spec.pattern, CircularElectrode) else "serpentine"
    return {
        "sensor_id": spec.sensor_id,
        "kind": spec.kind,
        "pattern": {"type": pattern_type, **asdict(spec.pattern)},
        "stack": asdict(spec.stack),
        "footprint_mm": list(spec.footprint_mm),
        "gauge_length_mm": spec.gauge_length_mm,
        "materials": asdict(spec.materials),
    }


def spec_from_dict(data: dict, material_defaults: dict[str, MaterialParams] | None = None) -> SensorSpec:
    if not isinstance(data, dict):
        raise InvalidSpec("a sensor spec must be a mapping")
    data = dict(data)
    kind = data.get("kind")
    if kind not in ("capacitive", "resistive"):
        raise InvalidSpec(f"kind must be 'capacitive' or 'resistive', got {kind!r}")
    pattern = dict(data.pop("pattern", None) or {})
    ptype = pattern.pop("type", "electrode" if kind == "capacitive" else "serpentine")
    if ptype not in _PATTERN_TYPES:
        raise InvalidSpec(f"unknown pattern type {ptype!r}")
    data["pattern"] = from_dict(_PATTERN_TYPES[ptype], pattern)
    if "stack" in data:
        data["stack"] = from_dict(LayerStack, data["stack"])
    base = (material_defaults or {}).get(kind) or MaterialParams.defaults(kind)
    data["materials"] = from_dict(MaterialParams, data.get("materials"), base=base)
    return from_dict(SensorSpec, data)


def load_specs(path, material_defaults: dict[str, MaterialParams] | None = None) -> list[SensorSpec]:
    """One spec per file, or several under a ``sensors:`` list."""
    data = load_yaml(path)
    if isinstance(data, dict) and "sensors" in data:
        items = data["sensors"]
        if not isinstance(items, list) or not items:
            raise InvalidSpec("'sensors' must be a non-empty list")
    else:
        items = [data]
    return [spec_from_dict(item, material_defaults) for item in items]


def dump_specs(specs: list[SensorSpec]) -> str:
    if len(specs) == 1:
        return dump_yaml(spec_to_dict(specs[0]))
    return dump_yaml({"sensors": [spec_to_dict(s) for s in specs]})


# ---------------------------------------------------------------------------
# fabrication plans
# ---------------------------------------------------------------------------

def plan_to_dict(plan: FabricationPlan, gcode_files: dict[int, str] | None = None) -> dict:
    steps = []
    for step in plan.steps:
        if isinstance(step, StackTray):
            steps.append({"step": "stack_tray", "index": step.index})
        elif isinstance(step, PourSilicone):
            steps.append({"step": "pour_silicone", "thickness_mm": step.thickness_mm})
        elif isinstance(step, Cure):
            steps.append({"step": "cure", "temp_C": step.temp_C, "minutes": step.minutes})
        elif isinstance(step, PrintInk):
            text = emit(step.program)
            entry = {
                "step": "print_ink",
                "layer_index": step.layer_index,
                "z_mm": step.z_mm,
                "gcode_sha256": hashlib.sha256(text.encode()).hexdigest(),
            }
            if gcode_files and step.layer_index in gcode_files:
                entry["gcode"] = gcode_files[step.layer_index]
            steps.append(entry)
    return {
        "sensor_id": plan.sensor_id,
        "kind": plan.kind,
        "spec_hash": plan.spec_hash,
        "poured_thickness_mm": plan.poured_thickness_mm,
        "print_count": len(plan.prints),
        "steps": steps,
    }


# ---------------------------------------------------------------------------
# workbench configuration
# ---------------------------------------------------------------------------

@dataclass
class WorkbenchConfig:
    specs_dir: Path | None = None
    output_dir: Path | None = None
    print_params: PrintParams = field(default_factory=PrintParams)
    protocol: ProtocolConfig = field(default_factory=ProtocolConfig)
    materials: dict[str, MaterialParams] = field(
        default_factory=lambda: {k: MaterialParams.defaults(k) for k in ("capacitive", "resistive")}
    )

    def resolve_spec(self, name) -> Path:
        path = Path(name)
        if not path.exists() and self.specs_dir is not None and (self.specs_dir / path).exists():
            return self.specs_dir / path
        return path


def load_config(path=None) -> WorkbenchConfig:
    """Read a workbench config; ``path`` falls back to ``$DIWBENCH_CONFIG``."""
    path = path or os.environ.get(CONFIG_ENV)
    cfg = WorkbenchConfig()
    if not path:
        return cfg
    path = Path(path)
    if not path.is_file():
        raise InvalidSpec(f"config file {path} not found")
    data = load_yaml(path) or {}
    if not isinstance(data, dict):
        raise InvalidSpec("config must be a mapping")
    unknown = sorted(set(data) - {"paths", "print", "protocol", "materials"})
    if unknown:
        raise InvalidSpec(f"unknown config section(s): {', '.join(unknown)}")
    root = path.parent
    paths = data.get("paths") or {}
    if paths.get("specs_dir") is not None:
        cfg.specs_dir = (root / paths["specs_dir"]).resolve()
        if not cfg.specs_dir.is_dir():
            raise InvalidSpec(f"specs_dir {cfg.specs_dir} does not exist")
    if paths.get("output_dir") is not None:
        cfg.output_dir = (root / paths["output_dir"]).resolve()
        if not cfg.output_dir.parent.is_dir():
            raise InvalidSpec(f"parent of output_dir {cfg.output_dir} does not exist")
    cfg.print_params = from_dict(PrintParams, data.get("print"))
    cfg.protocol = from_dict(ProtocolConfig, data.get("protocol"))
    for kind, overrides in (data.get("materials") or {}).items():
        if kind not in cfg.materials:
            raise InvalidSpec(f"unknown sensor kind {kind!r} in materials")
        cfg.materials[kind] = from_dict(MaterialParams, overrides, base=cfg.materials[kind])
    return cfg


def config_to_dict(cfg: WorkbenchConfig) -> dict:
    return {
        "paths": {
            "specs_dir": str(cfg.specs_dir) if cfg.specs_dir else None,
            "output_dir": str(cfg.output_dir) if cfg.output_dir else None,
        },
        "print": dataclasses.asdict(cfg.print_params),
        "protocol": dataclasses.asdict(cfg.protocol),
        "materials": {k: dataclasses.asdict(v) for k, v in cfg.materials.items()},
    }
