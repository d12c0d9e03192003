"""Config documents: YAML in, schema-checked, exact rationals out."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Optional

import jsonschema
import yaml

from .errors import ConfigError
from .git_core import GITData

RATIONAL = {"oneOf": [{"type": "integer"},
                      {"type": "string", "pattern": r"^\s*-?\d+\s*(/\s*\d+\s*)?$"}]}
VECTOR = {"type": "array", "items": RATIONAL, "minItems": 1}
MATRIX = {"type": "array", "items": VECTOR, "minItems": 1}

SCHEMA = {
    "type": "object",
    "required": ["git"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "command": {"type": "string"},
        "order": RATIONAL,
        "git": {
            "type": "object",
            "required": ["r", "D", "omega_plus"],
            "additionalProperties": False,
            "properties": {
                "r": {"type": "integer", "minimum": 1},
                "m": {"type": "integer", "minimum": 1},
                "D": MATRIX,
                "omega_plus": VECTOR,
                "omega_minus": VECTOR,
                "p_plus": MATRIX,
                "p_minus": MATRIX,
            },
        },
        "degrees": MATRIX,
        "twist": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"E": {"type": "array", "items": VECTOR}},
        },
        "fit": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "ray_angle": RATIONAL,
                "radii": VECTOR,
                "y_lo": VECTOR,
                "z": {"type": "array", "items": {"type": "array", "items": RATIONAL,
                                                  "minItems": 2, "maxItems": 2}, "minItems": 1},
                "window": {"type": "integer", "minimum": 0},
                "tolerance": RATIONAL,
                "ridge": RATIONAL,
            },
        },
        "watson": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"u": VECTOR},
        },
    },
}


def parse_rational(x) -> Fraction:
    if isinstance(x, bool):
        raise ConfigError(f"not a rational: {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str) and re.fullmatch(r"\s*-?\d+\s*(/\s*\d+\s*)?", x):
        return Fraction(x.replace(" ", ""))
    raise ConfigError(f"not a rational: {x!r}")


def _vec(v) -> tuple:
    return tuple(parse_rational(x) for x in v)


@dataclass
class FitSettings:
    ray_angle: float = 0.05
    radii: tuple = tuple(range(12, 22))
    y_lo: tuple = (Fraction(1, 200), Fraction(1, 100), Fraction(1, 50))
    z: tuple = (1 + 0j, 2j, -1 + 1j)
    window: int = 3
    tolerance: float = 1e-3
    ridge: float = 0.0


@dataclass
class ConfigDocument:
    raw: dict
    data: GITData
    name: str = ""
    order: Fraction = Fraction(6)
    p_plus: Optional[tuple] = None
    p_minus: Optional[tuple] = None
    degrees: Optional[list] = None
    twist: tuple = ()
    fit: FitSettings = field(default_factory=FitSettings)
    watson_u: tuple = (10.0, 20.0, 40.0)


class _LineLoader(yaml.SafeLoader):
    pass


def _construct_mapping(loader, node, deep=False):
    mapping = yaml.SafeLoader.construct_mapping(loader, node, deep=deep)
    lines = {}
    for key_node, value_node in node.value:
        lines[key_node.value] = value_node.start_mark.line + 1
    mapping["__lines__"] = lines
    return mapping


def _construct_sequence(loader, node, deep=False):
    seq = yaml.SafeLoader.construct_sequence(loader, node, deep=True)
    return _LinedList(seq, [n.start_mark.line + 1 for n in node.value])


class _LinedList(list):
    def __init__(self, items, lines):
        super().__init__(items)
        self.lines = lines


_LineLoader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping)
_LineLoader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_SEQUENCE_TAG, _construct_sequence)


def _strip(obj):
    if isinstance(obj, dict):
        return {k: _strip(v) for k, v in obj.items() if k != "__lines__"}
    if isinstance(obj, list):
        return [_strip(v) for v in obj]
    return obj


def _line_of(doc, path) -> Optional[int]:
    node, line = doc, None
    for part in path:
        if isinstance(node, dict) and part in node:
            line = node.get("__lines__", {}).get(part, line)
            node = node[part]
        elif isinstance(node, _LinedList) and isinstance(part, int) and part < len(node):
            line = node.lines[part]
            node = node[part]
        else:
            break
    return line


def _field_name(path) -> str:
    out = ""
    for part in path:
        out += f"[{part}]" if isinstance(part, int) else (f".{part}" if out else str(part))
    return out or "<root>"


def loads(text: str, source: str = "<config>") -> ConfigDocument:
    try:
        doc = yaml.load(text, Loader=_LineLoader)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{source}: YAML error: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{source}: top level must be a mapping")
    plain = _strip(doc)
    errors = sorted(jsonschema.Draft7Validator(SCHEMA).iter_errors(plain), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = list(err.absolute_path)
        line = _line_of(doc, path)
        where = f"line {line}, " if line else ""
        raise ConfigError(f"{source}: {where}field {_field_name(path)}: {err.message}")
    return _build(plain, doc, source)


def _build(plain: dict, doc: dict, source: str) -> ConfigDocument:
    g = plain["git"]
    r = g["r"]
    for i, row in enumerate(g["D"]):
        if len(row) != r:
            line = _line_of(doc, ["git", "D", i])
            raise ConfigError(f"{source}: line {line}, field git.D[{i}]: row has length {len(row)}, expected r = {r}")
    if "m" in g and g["m"] != len(g["D"]):
        raise ConfigError(f"{source}: field git.m: m = {g['m']} but D has {len(g['D'])} rows")
    try:
        data = GITData(r, tuple(_vec(row) for row in g["D"]), _vec(g["omega_plus"]),
                       _vec(g["omega_minus"]) if "omega_minus" in g else None)
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"{source}: git: {exc}") from exc
    cfg = ConfigDocument(raw=plain, data=data, name=plain.get("name", ""))
    if "order" in plain:
        cfg.order = parse_rational(plain["order"])
    if "p_plus" in g:
        cfg.p_plus = tuple(_vec(v) for v in g["p_plus"])
    if "p_minus" in g:
        cfg.p_minus = tuple(_vec(v) for v in g["p_minus"])
    if "degrees" in plain:
        cfg.degrees = [_vec(v) for v in plain["degrees"]]
    if "twist" in plain:
        cfg.twist = tuple(_vec(v) for v in plain["twist"].get("E", []))
    if "fit" in plain:
        f = plain["fit"]
        fs = FitSettings()
        if "ray_angle" in f:
            fs.ray_angle = float(parse_rational(f["ray_angle"]))
        if "radii" in f:
            fs.radii = tuple(float(parse_rational(x)) for x in f["radii"])
        if "y_lo" in f:
            fs.y_lo = tuple(parse_rational(x) for x in f["y_lo"])
        if "z" in f:
            fs.z = tuple(complex(float(parse_rational(a)), float(parse_rational(b))) for a, b in f["z"])
        if "window" in f:
            fs.window = f["window"]
        if "tolerance" in f:
            fs.tolerance = float(parse_rational(f["tolerance"]))
        if "ridge" in f:
            fs.ridge = float(parse_rational(f["ridge"]))
        cfg.fit = fs
    if "watson" in plain:
        cfg.watson_u = tuple(float(parse_rational(x)) for x in plain["watson"].get("u", []))
    return cfg


def load(path) -> ConfigDocument:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return loads(text, str(path))


def fixture_path(name: str) -> Path:
    return Path(str(resources.files("wallcross") / "fixtures" / f"{name}.yaml"))


def load_fixture(name: str) -> ConfigDocument:
    return load(fixture_path(name))
