"""Scenario and muscle definition files.

Both are YAML documents with a top-level ``schema: 1`` key. Unknown keys,
wrong types and out-of-range values raise :class:`ConfigError` carrying the
file name and 1-based line of the offending node. See ``docs/formats.md``
for the full key reference.
"""
from dataclasses import dataclass, field, replace
from math import isfinite, radians
from pathlib import Path
from typing import Optional, Tuple

import yaml

from .control import MuscleDefinition, PdGains
from .errors import ConfigError, MuscleSimError
from .fatigue import PRESETS
from .hill import MuscleMechanics
from .profiles import LoadProfile
from .routing import AnchorBinding, BonePose, MusclePath, anchor_positions, path_length

SCHEMA_VERSION = 1
KINDS = ("curves", "activation_bounds", "fatigue_profile", "rig_hold", "rig_schedule")
INIT_MODES = ("fresh", "sampled")


# --------------------------------------------------------------------------
# Node helpers

class _Node:
    """A YAML node plus where it came from, for error reporting."""

    def __init__(self, node, source, where):
        self.node = node
        self.source = source
        self.where = where

    @property
    def line(self):
        return self.node.start_mark.line + 1

    def fail(self, msg):
        raise ConfigError(f"{self.where}: {msg}" if self.where else msg,
                          line=self.line, source=self.source)

    def _child(self, node, key):
        where = f"{self.where}.{key}" if self.where else str(key)
        return _Node(node, self.source, where)

    def value(self):
        if not isinstance(self.node, yaml.ScalarNode):
            self.fail("expected a scalar")
        return yaml.SafeLoader("").construct_object(self.node)

    def mapping(self, allowed):
        """Key -> child node; unknown or duplicate keys are rejected."""
        if not isinstance(self.node, yaml.MappingNode):
            self.fail("expected a mapping")
        out = {}
        for k, v in self.node.value:
            key = k.value if isinstance(k, yaml.ScalarNode) else None
            if key not in allowed:
                _Node(k, self.source, self.where).fail(f"unknown key {key!r}")
            if key in out:
                _Node(k, self.source, self.where).fail(f"duplicate key {key!r}")
            out[key] = self._child(v, key)
        return _Mapping(self, out)

    def items(self):
        if not isinstance(self.node, yaml.SequenceNode):
            self.fail("expected a list")
        return [self._child(v, f"[{i}]") for i, v in enumerate(self.node.value)]

    def number(self, positive=False, nonneg=False, lo=None, hi=None):
        v = self.value()
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not isfinite(v):
            self.fail(f"expected a finite number, got {v!r}")
        v = float(v)
        if positive and not v > 0:
            self.fail(f"must be > 0, got {v}")
        if nonneg and v < 0:
            self.fail(f"must be >= 0, got {v}")
        if lo is not None and v < lo or hi is not None and v > hi:
            self.fail(f"must lie in [{lo}, {hi}], got {v}")
        return v

    def integer(self, minimum=None):
        v = self.value()
        if isinstance(v, bool) or not isinstance(v, int):
            self.fail(f"expected an integer, got {v!r}")
        if minimum is not None and v < minimum:
            self.fail(f"must be >= {minimum}, got {v}")
        return v

    def string(self, choices=None):
        v = self.value()
        if not isinstance(v, str):
            self.fail(f"expected a string, got {v!r}")
        if choices is not None and v not in choices:
            self.fail(f"must be one of {list(choices)}, got {v!r}")
        return v

    def vector(self, n):
        items = self.items()
        if len(items) != n:
            self.fail(f"expected {n} numbers, got {len(items)}")
        return tuple(i.number() for i in items)


class _Mapping:
    def __init__(self, owner, children):
        self.owner = owner
        self.children = children

    def __contains__(self, key):
        return key in self.children

    def get(self, key):
        return self.children.get(key)

    def require(self, key):
        if key not in self.children:
            self.owner.fail(f"missing required key {key!r}")
        return self.children[key]


def _parse_document(text, source, allowed):
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        raise ConfigError(f"YAML parse error: {exc.problem}",
                          line=mark.line + 1 if mark else None, source=source) from None
    if root is None:
        raise ConfigError("empty document", line=1, source=source)
    doc = _Node(root, source, "")
    m = doc.mapping(allowed)
    schema = m.require("schema")
    if schema.integer() != SCHEMA_VERSION:
        schema.fail(f"unsupported schema version {schema.value()!r}, expected {SCHEMA_VERSION}")
    return m


def _read(path):
    path = Path(path)
    try:
        return path.read_text(), str(path)
    except OSError as exc:
        raise ConfigError(f"cannot read file: {exc.strerror}", source=str(path)) from None


# --------------------------------------------------------------------------
# Muscle definition files

def _anchor(node: _Node):
    if isinstance(node.node, yaml.MappingNode) and any(
            k.value == "blend" for k, _ in node.node.value):
        m = node.mapping({"blend"})
        bindings = []
        for item in m.require("blend").items():
            b = item.mapping({"bone", "weight", "offset"})
            bindings.append((b.require("bone").integer(0), b.require("weight").number(nonneg=True),
                             b.require("offset").vector(3)))
    else:
        m = node.mapping({"bone", "offset"})
        bindings = [(m.require("bone").integer(0), 1.0, m.require("offset").vector(3))]
    try:
        return AnchorBinding(tuple(bindings))
    except MuscleSimError as exc:
        node.fail(str(exc))


def _muscle(node: _Node):
    m = node.mapping({"name", "f_m0", "l_ori", "l_Tnorm", "l_MTnorm", "gains",
                      "l_tpose", "anchors"})
    name = m.require("name").string()
    anchors = m.require("anchors")
    items = anchors.items()
    if len(items) < 2:
        anchors.fail("a muscle path needs at least two anchors")
    path = MusclePath(tuple(_anchor(a) for a in items))
    l_ori_node = m.require("l_ori")
    if isinstance(l_ori_node.node, yaml.ScalarNode) and l_ori_node.node.value == "auto":
        n_bones = max(path.bones) + 1
        l_ori = path_length(anchor_positions(path, [BonePose.identity()] * n_bones))
    else:
        l_ori = l_ori_node.number(positive=True)
    kw = {}
    for key in ("l_Tnorm", "l_MTnorm"):
        if key in m:
            kw[key] = m.get(key).number()
    try:
        mech = MuscleMechanics(m.require("f_m0").number(positive=True), l_ori, **kw)
    except MuscleSimError as exc:
        node.fail(str(exc))
    gains = None
    if "gains" in m:
        g = m.get("gains").mapping({"k_p", "k_d"})
        gains = PdGains(g.require("k_p").number(positive=True),
                        g.require("k_d").number(nonneg=True))
    l_tpose = m.get("l_tpose").number(positive=True) if "l_tpose" in m else None
    return MuscleDefinition(name, mech, path, gains, l_tpose)


def parse_muscles(text, source="<string>"):
    """Muscle definitions from a YAML document, in file order."""
    m = _parse_document(text, source, {"schema", "muscles"})
    node = m.require("muscles")
    muscles = tuple(_muscle(item) for item in node.items())
    names = [mu.name for mu in muscles]
    if len(set(names)) != len(names):
        node.fail(f"muscle names must be unique, got {names}")
    return muscles


def load_muscles(path):
    return parse_muscles(*_read(path))


# --------------------------------------------------------------------------
# Scenarios

@dataclass(frozen=True)
class FatigueSpec:
    preset: str = "S"
    overrides: Tuple[Tuple[str, float], ...] = ()
    scale: float = 1.0
    init: str = "fresh"

    def params(self):
        return replace(PRESETS[self.preset], **dict(self.overrides)).scaled(self.scale)


@dataclass(frozen=True)
class RigSpec:
    """Rig options.

    ``windows`` is a sequence of ``(mode, seconds)`` with mode ``hold`` or
    ``rest`` (used by ``rig_hold``); ``schedule`` holds ``(time, commands)``
    rows interpreted as actions or loads per ``command`` (``rig_schedule``).
    """

    hold_angle: float = 0.0
    initial_angle: Optional[float] = None
    windows: Tuple[Tuple[str, float], ...] = (("hold", 60.0), ("rest", 60.0), ("hold", 60.0))
    control_rate: float = 20.0
    stiffness: float = 20.0
    muscles: Optional[Tuple[MuscleDefinition, ...]] = None
    command: str = "actions"
    schedule: Tuple[Tuple[float, Tuple[float, ...]], ...] = ()

    @property
    def start_angle(self):
        return self.hold_angle if self.initial_angle is None else self.initial_angle


@dataclass(frozen=True)
class SweepSpec:
    fatigue_scale: Tuple[float, ...] = (5.0, 10.0, 25.0)
    rate_window: float = 5.0
    workers: Optional[int] = None


@dataclass(frozen=True)
class Scenario:
    kind: str
    rate: float = 120.0
    duration: Optional[float] = None
    seed: int = 0
    load: Optional[LoadProfile] = None
    fatigue: FatigueSpec = field(default_factory=FatigueSpec)
    rig: Optional[RigSpec] = None
    grid: Optional[int] = None
    sweep: Optional[SweepSpec] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise MuscleSimError(f"kind must be one of {list(KINDS)}, got {self.kind!r}")
        if not (isfinite(self.rate) and self.rate > 0):
            raise MuscleSimError(f"rate must be > 0, got {self.rate}")
        if self.duration is not None and not (isfinite(self.duration) and self.duration > 0):
            raise MuscleSimError(f"duration must be > 0, got {self.duration}")

    @property
    def dt(self):
        return 1.0 / self.rate

    def with_overrides(self, seed=None, rate=None, fatigue_scale=None):
        """Copy with command-line overrides applied; ``None`` keeps the file value."""
        s = self
        if seed is not None:
            s = replace(s, seed=int(seed))
        if rate is not None:
            s = replace(s, rate=float(rate))
        if fatigue_scale is not None:
            if not (isfinite(fatigue_scale) and fatigue_scale > 0):
                raise MuscleSimError(f"fatigue scale must be > 0, got {fatigue_scale}")
            s = replace(s, fatigue=replace(s.fatigue, scale=float(fatigue_scale)))
        return s


_SECTIONS = {
    "curves": {"grid"},
    "activation_bounds": {"grid"},
    "fatigue_profile": {"duration", "load", "fatigue", "sweep"},
    "rig_hold": {"duration", "fatigue", "rig", "sweep"},
    "rig_schedule": {"duration", "fatigue", "rig", "sweep"},
}
_COMMON = {"schema", "kind", "rate", "seed"}
_FATIGUE_KEYS = ("f_coeff", "r_coeff", "rest_mult", "l_d", "l_r")


def _load_profile(node: _Node):
    m = node.mapping({"type", "amplitude", "baseline", "period", "duty", "points"})
    kind = m.require("type").string(("constant", "square", "schedule"))
    kw = {"kind": kind}
    allowed = {"constant": {"amplitude"},
               "square": {"amplitude", "baseline", "period", "duty"},
               "schedule": {"points"}}[kind]
    for key, child in m.children.items():
        if key == "type":
            continue
        if key not in allowed:
            child.fail(f"not used by a {kind} profile")
        if key == "points":
            pts = []
            for item in child.items():
                t, v = item.vector(2)
                pts.append((t, v))
            kw["points"] = tuple(pts)
        else:
            kw[key] = child.number(
                **({"lo": 0.0, "hi": 1.0} if key in ("amplitude", "baseline", "duty")
                   else {"positive": True}))
    if kind == "schedule" and "points" not in kw:
        node.fail("a schedule profile needs 'points'")
    try:
        return LoadProfile(**kw)
    except MuscleSimError as exc:
        node.fail(str(exc))


def _fatigue_spec(node: _Node):
    m = node.mapping({"preset", "scale", "init", *_FATIGUE_KEYS})
    preset = m.get("preset").string(tuple(PRESETS)) if "preset" in m else "S"
    overrides = tuple((k, m.get(k).number(positive=True)) for k in _FATIGUE_KEYS if k in m)
    scale = m.get("scale").number(positive=True) if "scale" in m else 1.0
    init = m.get("init").string(INIT_MODES) if "init" in m else "fresh"
    return FatigueSpec(preset, overrides, scale, init)


def _rig_spec(node: _Node, kind, base_dir):
    keys = {"initial_angle", "control_rate", "stiffness", "muscles"}
    keys |= {"hold_angle", "windows"} if kind == "rig_hold" else {"command", "schedule"}
    m = node.mapping(keys)
    kw = {}
    for key in ("hold_angle", "initial_angle"):
        if key in m:
            kw[key] = radians(m.get(key).number(lo=-90.0, hi=90.0))
    for key in ("control_rate", "stiffness"):
        if key in m:
            kw[key] = m.get(key).number(positive=key == "control_rate", nonneg=True)
    if "muscles" in m:
        ref = m.get("muscles")
        path = Path(ref.string())
        if not path.is_absolute():
            path = Path(base_dir) / path
        muscles = load_muscles(path)
        if len(muscles) != 2:
            ref.fail(f"the rig needs exactly two muscles (flexor, extensor), got {len(muscles)}")
        kw["muscles"] = muscles
    if kind == "rig_hold":
        if "windows" in m:
            wins = []
            wnode = m.get("windows")
            for item in wnode.items():
                w = item.mapping({"hold", "rest"})
                if len(w.children) != 1:
                    item.fail("each window is a single 'hold: seconds' or 'rest: seconds'")
                (mode, dur), = w.children.items()
                wins.append((mode, dur.number(positive=True)))
            if not wins:
                wnode.fail("at least one window is required")
            kw["windows"] = tuple(wins)
    else:
        if "command" in m:
            kw["command"] = m.get("command").string(("actions", "loads"))
        snode = m.require("schedule")
        lim = (-1.0, 1.0) if kw.get("command", "actions") == "actions" else (0.0, 1.0)
        rows, last = [], None
        for item in snode.items():
            parts = item.items()
            if len(parts) != 3:
                item.fail("schedule rows are [time, flexor, extensor]")
            t = parts[0].number(nonneg=True)
            if last is not None and t < last:
                parts[0].fail("schedule times must be non-decreasing")
            last = t
            cmds = tuple(p.number(lo=lim[0], hi=lim[1]) for p in parts[1:])
            rows.append((t, cmds))
        if not rows:
            snode.fail("the schedule needs at least one row")
        kw["schedule"] = tuple(rows)
    return RigSpec(**kw)


def _sweep_spec(node: _Node):
    m = node.mapping({"fatigue_scale", "rate_window", "workers"})
    kw = {}
    if "fatigue_scale" in m:
        items = m.get("fatigue_scale").items()
        if not items:
            m.get("fatigue_scale").fail("needs at least one value")
        kw["fatigue_scale"] = tuple(i.number(positive=True) for i in items)
    if "rate_window" in m:
        kw["rate_window"] = m.get("rate_window").number(positive=True)
    if "workers" in m:
        kw["workers"] = m.get("workers").integer(1)
    return SweepSpec(**kw)


def parse_scenario(text, source="<string>", base_dir="."):
    """Validated :class:`Scenario` from YAML text."""
    allowed = _COMMON | set().union(*_SECTIONS.values())
    m = _parse_document(text, source, allowed)
    kind_node = m.require("kind")
    kind = kind_node.string(KINDS)
    for key, child in m.children.items():
        if key not in _COMMON and key not in _SECTIONS[kind]:
            child.fail(f"key {key!r} is not used by kind {kind!r}")
    kw = {"kind": kind}
    if "rate" in m:
        kw["rate"] = m.get("rate").number(positive=True)
    if "seed" in m:
        kw["seed"] = m.get("seed").integer(0)
    if "duration" in m:
        kw["duration"] = m.get("duration").number(positive=True)
    if "grid" in m:
        kw["grid"] = m.get("grid").integer(2)
    if "fatigue" in m:
        kw["fatigue"] = _fatigue_spec(m.get("fatigue"))
    if "sweep" in m:
        kw["sweep"] = _sweep_spec(m.get("sweep"))
    if kind == "fatigue_profile":
        kw["load"] = _load_profile(m.require("load"))
        m.require("duration")
    if kind.startswith("rig_"):
        rig_node = m.require("rig") if kind == "rig_schedule" else m.get("rig")
        kw["rig"] = _rig_spec(rig_node, kind, base_dir) if rig_node else RigSpec()
        if kind == "rig_schedule":
            m.require("duration")
        elif "duration" in m:
            total = sum(d for _, d in kw["rig"].windows)
            if abs(kw["duration"] - total) > 1e-9:
                m.get("duration").fail(
                    f"duration {kw['duration']} does not match the window total {total}")
    try:
        return Scenario(**kw)
    except MuscleSimError as exc:
        raise ConfigError(str(exc), source=source) from None


def load_scenario(path):
    text, source = _read(path)
    return parse_scenario(text, source, base_dir=Path(path).parent)
