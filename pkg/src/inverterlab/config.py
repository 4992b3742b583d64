"""Scenario files: nested YAML (or JSON) mapping onto :class:`SimConfig`.

Every accepted key is listed in :data:`SCHEMA` with its default. Unknown
keys are rejected so that a typo never silently falls back to a default.
"""

from __future__ import annotations

import math
import os
from typing import Any, Dict, Mapping, Optional

import yaml

from .exceptions import ConfigError
from .fuzzy import FuzzyConfig, default_rule_table, load_rule_table
from .nlctrl import ControllerGains
from .plant import LoadModel, PlantParams
from .pwm import PwmConfig
from .reference import ReferenceSpec
from .sim import SimConfig

_d_gains = ControllerGains()
_d_fuzzy = FuzzyConfig()
_d_plant = PlantParams()
_d_sim = SimConfig.__dataclass_fields__

SCHEMA: Dict[str, tuple] = {
    "plant.inductance_L": (float, _d_plant.inductance_L),
    "plant.capacitance_C": (float, _d_plant.capacitance_C),
    "plant.dc_bus_E": (float, _d_plant.dc_bus_E),
    "load.resistance": (float, 50.0),
    "load.segments": (list, None),
    "reference.rms_volts": (float, 230.0),
    "reference.frequency_hz": (float, 50.0),
    "controller.type": (str, "sliding"),
    "controller.k1": (float, _d_gains.k1),
    "controller.k2": (float, _d_gains.k2),
    "controller.k": (float, _d_gains.k),
    "controller.beta": (float, _d_gains.beta),
    "controller.phi": (float, _d_gains.phi),
    "controller.dis_dt": (str, "analytic"),
    "controller.dis_dt_tau": (float, _d_sim["dis_dt_tau"].default),
    "fuzzy.ke": (float, _d_fuzzy.ke),
    "fuzzy.kde": (float, _d_fuzzy.kde),
    "fuzzy.ku": (float, _d_fuzzy.ku),
    "fuzzy.resolution": (int, _d_fuzzy.resolution),
    "fuzzy.feedforward": (bool, _d_fuzzy.feedforward),
    "fuzzy.rules": (str, None),
    "pwm.carrier_hz": (float, 10.0e3),
    "sim.model": (str, "averaged"),
    "sim.duration": (float, _d_sim["duration"].default),
    "sim.plant_step_h": (float, _d_sim["plant_step_h"].default),
    "sim.control_period_Ts": (float, _d_sim["control_period_Ts"].default),
    "sim.initial_x1": (float, 0.0),
    "sim.initial_x2": (float, 0.0),
}

NUMERIC_KEYS = tuple(k for k, (typ, _) in SCHEMA.items() if typ in (float, int))


def flatten(doc: Mapping[str, Any], prefix: str = "") -> Dict[str, Any]:
    flat = {}
    for key, value in doc.items():
        path = f"{prefix}{key}"
        if isinstance(value, Mapping):
            flat.update(flatten(value, path + "."))
        else:
            flat[path] = value
    return flat


def _coerce(key: str, value: Any):
    typ = SCHEMA[key][0]
    if typ is float:
        if isinstance(value, bool) or not isinstance(value, (int, float, str)):
            raise ConfigError(key, f"expected a number, got {value!r}")
        try:
            out = float(value)
        except ValueError:
            raise ConfigError(key, f"expected a number, got {value!r}") from None
        if not math.isfinite(out):
            raise ConfigError(key, "must be finite")
        return out
    if typ is int:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
            raise ConfigError(key, f"expected an integer, got {value!r}")
        return int(value)
    if typ is bool:
        if not isinstance(value, bool):
            raise ConfigError(key, f"expected true or false, got {value!r}")
        return value
    if typ is str:
        if not isinstance(value, str):
            raise ConfigError(key, f"expected a string, got {value!r}")
        return value
    if not isinstance(value, list):
        raise ConfigError(key, f"expected a list, got {value!r}")
    return value


def normalize(doc: Optional[Mapping[str, Any]]) -> Dict[str, Any]:
    """Flatten, reject unknown keys and coerce types. Defaults are not filled in."""
    flat = flatten(doc or {})
    for key in flat:
        if key not in SCHEMA:
            raise ConfigError(key, "unknown scenario key")
    return {k: _coerce(k, v) for k, v in flat.items()}


def _load_schedule(flat: Mapping[str, Any]) -> LoadModel:
    if "load.segments" in flat:
        if "load.resistance" in flat:
            raise ConfigError("load.segments", "give either load.resistance or load.segments, not both")
        pairs = flat["load.segments"]
        try:
            segs = tuple((float(p[0]), float(p[1])) for p in pairs)
        except (TypeError, ValueError, IndexError):
            raise ConfigError("load.segments", "expected a list of [start_time, resistance] pairs") from None
        if any(len(p) != 2 for p in pairs):
            raise ConfigError("load.segments", "expected a list of [start_time, resistance] pairs")
        return LoadModel(segs)
    return LoadModel.constant(flat.get("load.resistance", SCHEMA["load.resistance"][1]))


def build_config(doc: Optional[Mapping[str, Any]] = None, base_dir: str = ".") -> SimConfig:
    """Build a validated :class:`SimConfig` from a (possibly partial) nested document."""
    flat = normalize(doc)

    def get(key):
        return flat.get(key, SCHEMA[key][1])

    rules_path = get("fuzzy.rules")
    if rules_path is None:
        rules = default_rule_table()
    else:
        path = rules_path if os.path.isabs(rules_path) else os.path.join(base_dir, rules_path)
        try:
            rules = load_rule_table(path)
        except OSError as exc:
            raise ConfigError("fuzzy.rules", f"cannot read rule file: {exc}") from None

    return SimConfig(
        duration=get("sim.duration"),
        plant_step_h=get("sim.plant_step_h"),
        control_period_Ts=get("sim.control_period_Ts"),
        model=get("sim.model"),
        controller=get("controller.type"),
        gains=ControllerGains(
            k1=get("controller.k1"),
            k2=get("controller.k2"),
            k=get("controller.k"),
            beta=get("controller.beta"),
            phi=get("controller.phi"),
        ),
        fuzzy=FuzzyConfig(
            ke=get("fuzzy.ke"),
            kde=get("fuzzy.kde"),
            ku=get("fuzzy.ku"),
            resolution=get("fuzzy.resolution"),
            feedforward=get("fuzzy.feedforward"),
        ),
        rules=rules,
        dis_dt=get("controller.dis_dt"),
        dis_dt_tau=get("controller.dis_dt_tau"),
        params=PlantParams(
            inductance_L=get("plant.inductance_L"),
            capacitance_C=get("plant.capacitance_C"),
            dc_bus_E=get("plant.dc_bus_E"),
        ),
        load=_load_schedule(flat),
        reference=ReferenceSpec(rms_V=get("reference.rms_volts"), frequency_f=get("reference.frequency_hz")),
        pwm=PwmConfig(get("pwm.carrier_hz")),
        initial_x1=get("sim.initial_x1"),
        initial_x2=get("sim.initial_x2"),
    )


def read_scenario(path: Optional[str]) -> Dict[str, Any]:
    """Read a scenario document; ``None`` gives an empty document (all defaults)."""
    if path is None:
        return {}
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError("scenario", f"cannot read {path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise ConfigError("scenario", f"malformed scenario file: {exc}") from None
    if doc is None:
        return {}
    if not isinstance(doc, Mapping):
        raise ConfigError("scenario", "top level must be a mapping")
    return dict(doc)


def set_key(doc: Mapping[str, Any], key: str, value: Any) -> Dict[str, Any]:
    """Return a copy of a nested document with dotted ``key`` set to ``value``."""
    if key not in SCHEMA:
        raise ConfigError(key, "unknown scenario key")
    out = _deepcopy(doc)
    node = out
    parts = key.split(".")
    for part in parts[:-1]:
        node = node.setdefault(part, {})
    node[parts[-1]] = value
    return out


def _deepcopy(doc):
    if isinstance(doc, Mapping):
        return {k: _deepcopy(v) for k, v in doc.items()}
    if isinstance(doc, list):
        return [_deepcopy(v) for v in doc]
    return doc


def load_scenario(path: Optional[str]) -> SimConfig:
    base = os.path.dirname(os.path.abspath(path)) if path else "."
    return build_config(read_scenario(path), base)
