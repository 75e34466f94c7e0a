"""Scenario files: YAML in, SimConfig out, and back again."""
from __future__ import annotations

import dataclasses
import hashlib
from importlib import resources
from pathlib import Path

import yaml

from .engine import Policy, SimConfig, VehicleSpec
from .gate import GateParams
from .geometry import IntersectionParams
from .opinion import OpinionParams
from .optimizer import OptimizerParams

BLOCKS = {
    "intersection": IntersectionParams,
    "opinion": OpinionParams,
    "gate": GateParams,
    "optimizer": OptimizerParams,
}
VEHICLE_KEYS = ("in_lane", "out_lane", "initial_distance", "initial_speed")
TOP_KEYS = ("name", "policy", "dt", "max_time", "vehicles", *BLOCKS)

BUNDLED = ("scenario1", "scenario2", "scenario3", "all_right")


class ScenarioError(ValueError):
    """Parse or validation failure, carrying the source line when known."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        where = source or "<scenario>"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {message}")


def _line(node: yaml.Node) -> int:
    return node.start_mark.line + 1


def _scalar(node: yaml.Node, field: str, kind: type, source: str | None):
    if not isinstance(node, yaml.ScalarNode):
        raise ScenarioError(f"field '{field}' must be a scalar", _line(node), source)
    value = yaml.safe_load(node.value) if node.tag != "tag:yaml.org,2002:str" else node.value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ScenarioError(f"field '{field}' must be a number, got {node.value!r}", _line(node), source)
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ScenarioError(f"field '{field}' must be an integer, got {node.value!r}", _line(node), source)
        return value
    if not isinstance(value, str):
        raise ScenarioError(f"field '{field}' must be a string, got {node.value!r}", _line(node), source)
    return value


def _mapping(node: yaml.Node, where: str, allowed, source: str | None) -> dict[str, yaml.Node]:
    if not isinstance(node, yaml.MappingNode):
        raise ScenarioError(f"{where} must be a mapping", _line(node), source)
    out: dict[str, yaml.Node] = {}
    for k, v in node.value:
        key = k.value
        if key not in allowed:
            raise ScenarioError(
                f"unknown key '{key}' in {where} (allowed: {', '.join(allowed)})", _line(k), source)
        if key in out:
            raise ScenarioError(f"duplicate key '{key}' in {where}", _line(k), source)
        out[key] = v
    return out


def _field_kinds(cls) -> dict[str, type]:
    hints = {"float": float, "int": int}
    return {f.name: hints[str(f.type)] for f in dataclasses.fields(cls)}


def _block(cls, node: yaml.Node, name: str, source: str | None, base: dict | None = None):
    kinds = _field_kinds(cls)
    raw = _mapping(node, f"block '{name}'", tuple(kinds), source)
    values = dict(base or {})
    values.update({k: _scalar(v, f"{name}.{k}", kinds[k], source) for k, v in raw.items()})
    try:
        return cls(**values)
    except ValueError as e:
        raise ScenarioError(f"invalid '{name}' parameters: {e}", _line(node), source) from None


def parse_scenario(text: str, source: str | None = None) -> SimConfig:
    try:
        root = yaml.compose(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        raise ScenarioError(f"YAML syntax error: {getattr(e, 'problem', e)}",
                            mark.line + 1 if mark else None, source) from None
    if root is None:
        raise ScenarioError("empty scenario", None, source)
    top = _mapping(root, "scenario", TOP_KEYS, source)
    if "vehicles" not in top:
        raise ScenarioError("missing required key 'vehicles'", _line(root), source)

    kw: dict = {}
    if "name" in top:
        kw["name"] = _scalar(top["name"], "name", str, source)
    if "policy" in top:
        value = _scalar(top["policy"], "policy", str, source)
        try:
            kw["policy"] = Policy(value)
        except ValueError:
            choices = ", ".join(p.value for p in Policy)
            raise ScenarioError(f"policy must be one of {choices}, got {value!r}",
                                _line(top["policy"]), source) from None
    for key in ("dt", "max_time"):
        if key in top:
            kw[key] = _scalar(top[key], key, float, source)

    vnode = top["vehicles"]
    if not isinstance(vnode, yaml.SequenceNode):
        raise ScenarioError("'vehicles' must be a list", _line(vnode), source)
    vehicles = []
    for k, item in enumerate(vnode.value, start=1):
        raw = _mapping(item, f"vehicle {k}", VEHICLE_KEYS, source)
        missing = [f for f in VEHICLE_KEYS if f not in raw]
        if missing:
            raise ScenarioError(f"vehicle {k} is missing {', '.join(missing)}", _line(item), source)
        vehicles.append(VehicleSpec(
            _scalar(raw["in_lane"], "in_lane", int, source),
            _scalar(raw["out_lane"], "out_lane", int, source),
            _scalar(raw["initial_distance"], "initial_distance", float, source),
            _scalar(raw["initial_speed"], "initial_speed", float, source),
        ))
    kw["vehicles"] = tuple(vehicles)

    for name, cls in BLOCKS.items():
        if name == "gate":
            continue
        if name in top:
            kw[name] = _block(cls, top[name], name, source)
    ip = kw.get("intersection", IntersectionParams())
    # the box length follows the intersection unless given explicitly
    gate_base = dataclasses.asdict(GateParams.for_intersection(ip))
    kw["gate"] = (_block(GateParams, top["gate"], "gate", source, gate_base)
                  if "gate" in top else GateParams(**gate_base))

    try:
        return SimConfig(**kw)
    except ValueError as e:
        raise ScenarioError(f"invalid scenario: {e}", _line(root), source) from None


def load_scenario(path: str | Path) -> SimConfig:
    path = Path(path)
    return parse_scenario(path.read_text(), str(path))


def bundled_path(name: str) -> Path:
    if name not in BUNDLED:
        raise KeyError(f"no bundled scenario '{name}' (have: {', '.join(BUNDLED)})")
    return Path(str(resources.files("sigcross") / "scenarios" / f"{name}.yaml"))


def to_document(config: SimConfig) -> dict:
    doc = {
        "name": config.name,
        "policy": config.policy.value,
        "dt": config.dt,
        "max_time": config.max_time,
        "vehicles": [dataclasses.asdict(v) for v in config.vehicles],
    }
    for name in BLOCKS:
        doc[name] = dataclasses.asdict(getattr(config, name))
    return doc


def dump_scenario(config: SimConfig) -> str:
    return yaml.safe_dump(to_document(config), sort_keys=False, default_flow_style=None)


def config_fingerprint(config: SimConfig, ignore_policy: bool = False) -> str:
    if ignore_policy:
        config = dataclasses.replace(config, policy=Policy.PROPOSED)
    return hashlib.sha256(dump_scenario(config).encode()).hexdigest()
