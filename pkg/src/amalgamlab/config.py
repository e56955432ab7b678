"""TOML run configuration with line-numbered validation.

A minimal file is just ``mode = "free"``; everything else falls back to the
documented defaults, and :func:`print_config` writes every field back out so
a run can be reconstructed from its own output directory.
"""

from __future__ import annotations

import re
import sys
from dataclasses import asdict, dataclass, field

import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .amalgam import AmalgamGroup, HypothesisError, check_edge_word
from .experiments import ExperimentSpec, validate_y
from .torus import (
    DEFAULT_BACKWARD,
    DEFAULT_FORWARD,
    SURFACE_BACKWARD,
    SURFACE_FORWARD,
    Automorphism,
    AutomorphismError,
    TorusGroup,
)
from .words import (
    Alphabet,
    AlphabetError,
    CapExceeded,
    FreeGroup,
    Presentation,
    SurfaceGroup,
    UnsupportedPresentation,
    surface_presentation,
)


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, reason: str = "invalid"):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {message}" if line else message)


EXPERIMENT_DEFAULTS: dict[str, dict] = {
    "distortion": {"N": 30},
    "delta": {"group": "amalgam", "radii": [1, 2], "samples": 2000, "exhaustive": False},
    "quasiconvexity": {"subgroup": "C", "radius": 4},
    "claim1": {"n_min": -20, "n_max": 20},
    "claim2": {"q": ["", "t1", "aaa"], "n_max": 8, "exact_n_max": 3},
    "escape": {"z": "a", "h_radius": 3, "n_max": 3},
    "vn": {"g": ["", "a", "aaa", "t"], "radius_max": 5},
}

_CHOICES = {
    ("delta", "group"): ("base", "torus", "amalgam"),
    ("quasiconvexity", "subgroup"): ("x", "F", "C", "H"),
}


@dataclass
class Caps:
    ball_radius: int = 4
    distance_cap: int = 6
    coset_window: int = 16
    surface_cap: int = 4


@dataclass
class RunConfig:
    mode: str = "free"
    generators: list = field(default_factory=lambda: ["a", "b", "c"])
    relators: list = field(default_factory=list)
    forward: dict = field(default_factory=lambda: dict(DEFAULT_FORWARD))
    backward: dict = field(default_factory=lambda: dict(DEFAULT_BACKWARD))
    x: str = "a"
    x1: str = "a"
    y: str = "ab"
    caps: Caps = field(default_factory=Caps)
    seed: int = 0
    out: str = "out"
    experiments: list = field(default_factory=list)


_TOP = {"mode", "seed", "out", "base", "aut", "edge", "caps", "experiments"}
_SECTIONS = {
    "base": {"generators", "relators"},
    "aut": {"forward", "backward"},
    "edge": {"x", "x1", "y"},
    "caps": set(Caps.__dataclass_fields__),
}


def _locate(text: str, path: tuple, index: int | None = None) -> int | None:
    """Best-effort line number of the key or table at ``path``.

    Understands ``[a.b]`` headers, ``[[a]]`` arrays (``index`` picks the
    entry) and dotted keys such as ``aut.forward.a = "b"``.
    """
    current: tuple = ()
    counts: dict = {}
    fallback = None
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        m = re.match(r"^(\[\[?)\s*([\w.\- \"']+?)\s*\]\]?$", line)
        if m:
            current = tuple(p.strip().strip("\"'") for p in m.group(2).split("."))
            if m.group(1) == "[[":
                counts[current] = counts.get(current, -1) + 1
            if index is None and current == path[:len(current)] and fallback is None:
                fallback = no
            elif index is not None and current == path[:1] and counts.get(current) == index:
                fallback = fallback or no
            continue
        key, eq, _ = line.partition("=")
        if not eq:
            continue
        full = current + tuple(p.strip().strip("\"'") for p in key.split("."))
        if index is not None and (current != path[:1] or counts.get(current) != index):
            continue
        if full[:len(path)] == path or (index is not None and full == path):
            return no
    return fallback


def _type_name(value) -> str:
    return type(value).__name__


def _expect(value, kind, what, line):
    ok = isinstance(value, kind) and not (kind is int and isinstance(value, bool))
    if not ok:
        name = kind.__name__ if isinstance(kind, type) else "/".join(k.__name__ for k in kind)
        raise ConfigError(f"{what} must be {name}, got {_type_name(value)}", line)
    return value


def _str_list(value, what, line) -> list:
    _expect(value, list, what, line)
    for v in value:
        _expect(v, str, f"entries of {what}", line)
    return list(value)


def parse_config(text: str, check_hypotheses: bool = True) -> RunConfig:
    """Parse and fully validate a run configuration.

    Syntax errors carry the parser's position; semantic errors carry the line
    of the offending key.  Unknown keys anywhere are errors.
    """
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(f"syntax error: {exc}", int(m.group(1)) if m else None,
                          "syntax") from None

    def at(*path, index=None):
        return _locate(text, path, index)

    for k in raw:
        if k not in _TOP:
            raise ConfigError(f"unknown key {k!r}", at(k), "unknown-key")
    for sec, allowed in _SECTIONS.items():
        body = raw.get(sec, {})
        _expect(body, dict, f"[{sec}]", at(sec))
        for k in body:
            if k not in allowed:
                raise ConfigError(f"unknown key {sec}.{k}", at(sec, k), "unknown-key")

    cfg = RunConfig()
    cfg.mode = _expect(raw.get("mode", "free"), str, "mode", at("mode"))
    if cfg.mode not in ("free", "surface"):
        raise ConfigError(f"mode must be 'free' or 'surface', not {cfg.mode!r}",
                          at("mode"))
    cfg.seed = _expect(raw.get("seed", 0), int, "seed", at("seed"))
    cfg.out = _expect(raw.get("out", "out"), str, "out", at("out"))

    base = raw.get("base", {})
    if cfg.mode == "surface":
        cfg.generators = list(surface_presentation(2).alphabet.names)
        cfg.relators = ["abABcdCD"]
        cfg.forward, cfg.backward = dict(SURFACE_FORWARD), dict(SURFACE_BACKWARD)
        cfg.x = cfg.x1 = "b"
        cfg.y = "d"
    if "generators" in base:
        cfg.generators = _str_list(base["generators"], "base.generators", at("base", "generators"))
    if "relators" in base:
        cfg.relators = _str_list(base["relators"], "base.relators", at("base", "relators"))
    if cfg.mode == "free" and cfg.relators:
        raise ConfigError("free mode takes no relators", at("base", "relators"))

    aut = raw.get("aut", {})
    for side in ("forward", "backward"):
        if side in aut:
            table = _expect(aut[side], dict, f"aut.{side}", at("aut", side))
            for k, v in table.items():
                _expect(v, str, f"aut.{side}.{k}", at("aut", side, k))
            setattr(cfg, side, dict(table))
        elif "generators" in base:
            raise ConfigError(f"missing aut.{side} table for custom generators",
                              at("base", "generators"), "missing-table")
    if "aut" in raw and set(aut) != {"forward", "backward"}:
        missing = {"forward", "backward"} - set(aut)
        raise ConfigError(f"missing automorphism table(s): {', '.join(sorted(missing))}",
                          at("aut"), "missing-table")

    edge = raw.get("edge", {})
    for k in ("x", "x1", "y"):
        if k in edge:
            setattr(cfg, k, _expect(edge[k], str, f"edge.{k}", at("edge", k)))

    caps = raw.get("caps", {})
    for k, v in caps.items():
        _expect(v, int, f"caps.{k}", at("caps", k))
        if v <= 0:
            raise ConfigError(f"caps.{k} must be positive", at("caps", k))
        setattr(cfg.caps, k, v)

    exps = raw.get("experiments", [])
    _expect(exps, list, "experiments", at("experiments"))
    labels = set()
    for i, e in enumerate(exps):
        line = at("experiments", index=i)
        _expect(e, dict, "experiments entry", line)
        name = e.get("name")
        if name not in EXPERIMENT_DEFAULTS:
            raise ConfigError(f"unknown experiment {name!r}; expected one of "
                              f"{', '.join(EXPERIMENT_DEFAULTS)}", at("experiments", "name", index=i),
                              "unknown-experiment")
        params = dict(EXPERIMENT_DEFAULTS[name])
        seed = cfg.seed
        label = name
        for k, v in e.items():
            kl = at("experiments", k, index=i) or line
            if k == "name":
                continue
            if k == "seed":
                seed = _expect(v, int, "seed", kl)
            elif k == "label":
                label = _expect(v, str, "label", kl)
            elif k not in params:
                raise ConfigError(f"unknown parameter {k!r} for experiment {name}", kl,
                                  "unknown-key")
            else:
                default = params[k]
                if isinstance(default, list):
                    _expect(v, list, f"{name}.{k}", kl)
                else:
                    _expect(v, type(default), f"{name}.{k}", kl)
                choices = _CHOICES.get((name, k))
                if choices and v not in choices:
                    raise ConfigError(f"{name}.{k} must be one of {choices}", kl)
                params[k] = v
        if label in labels:
            raise ConfigError(f"duplicate output label {label!r}", line, "duplicate-label")
        labels.add(label)
        cfg.experiments.append(ExperimentSpec(name, params, seed, label))

    build(cfg, check_hypotheses=check_hypotheses, text=text)
    return cfg


@dataclass
class Contexts:
    base: object
    torus: TorusGroup
    amalgam: AmalgamGroup
    x: tuple
    y: tuple


def build(cfg: RunConfig, check_hypotheses: bool = True, text: str = "") -> Contexts:
    """Construct the groups a config describes, raising :class:`ConfigError` on failure."""
    def at(*path):
        return _locate(text, path) if text else None

    try:
        alphabet = Alphabet(cfg.generators)
    except AlphabetError as exc:
        raise ConfigError(str(exc), at("base", "generators")) from None
    if any(n.endswith("1") for n in cfg.generators) or "t" in cfg.generators:
        raise ConfigError("generator names may not end in '1' or be 't'",
                          at("base", "generators"))
    if cfg.mode == "free":
        base = FreeGroup(alphabet)
    else:
        try:
            rels = tuple(alphabet.parse(r) for r in cfg.relators)
            base = SurfaceGroup(Presentation(alphabet, rels), cap=cfg.caps.surface_cap)
        except (AlphabetError, UnsupportedPresentation, ValueError) as exc:
            raise ConfigError(f"bad presentation: {exc}", at("base", "relators")) from None
    for side in ("forward", "backward"):
        table = getattr(cfg, side)
        extra = sorted(set(table) - set(cfg.generators))
        missing = [g for g in cfg.generators if g not in table]
        if extra or missing:
            what = f"missing generators {missing}" if missing else f"unknown generators {extra}"
            raise ConfigError(f"aut.{side}: {what}",
                              at("aut", side) or at("aut"), "missing-table")
    try:
        phi = Automorphism.from_text(base, cfg.forward, cfg.backward)
        phi.validate()
    except (AutomorphismError, AlphabetError) as exc:
        raise ConfigError(f"automorphism: {exc}", at("aut", "forward")) from None
    torus = TorusGroup(base, phi)
    words = {}
    for k in ("x", "x1", "y"):
        try:
            words[k] = base.element(alphabet.parse(getattr(cfg, k)))
        except (AlphabetError, CapExceeded) as exc:
            raise ConfigError(f"edge.{k}: {exc}", at("edge", k)) from None
    if check_hypotheses:
        for k in ("x", "x1"):
            try:
                check_edge_word(base, words[k])
            except HypothesisError as exc:
                raise ConfigError(f"edge.{k}: {exc}", at("edge", k), exc.reason) from None
        yc = validate_y(base, words["x"], alphabet.parse(cfg.y))
        if not yc:
            raise ConfigError(f"edge.y rejected ({yc.reason}) {yc.detail}".strip(),
                              at("edge", "y"), yc.reason)
    try:
        group = AmalgamGroup(torus, torus, words["x"], words["x1"],
                             coset_window=cfg.caps.coset_window)
    except (HypothesisError, AlphabetError) as exc:
        raise ConfigError(str(exc), at("edge", "x"), getattr(exc, "reason", "invalid")) from None
    return Contexts(base, torus, group, words["x"], tuple(alphabet.parse(cfg.y)))


def config_dict(cfg: RunConfig) -> dict:
    """Plain-data echo of a config; :func:`print_config` serializes exactly this."""
    out = {
        "mode": cfg.mode,
        "seed": cfg.seed,
        "out": cfg.out,
        "base": {"generators": list(cfg.generators), "relators": list(cfg.relators)},
        "aut": {"forward": dict(cfg.forward), "backward": dict(cfg.backward)},
        "edge": {"x": cfg.x, "x1": cfg.x1, "y": cfg.y},
        "caps": asdict(cfg.caps),
    }
    if cfg.experiments:
        out["experiments"] = [
            {"name": e.name, "label": e.output, "seed": e.seed, **e.params}
            for e in cfg.experiments
        ]
    return out


def print_config(cfg: RunConfig) -> str:
    return tomli_w.dumps(config_dict(cfg))


def load_config(path: str, check_hypotheses: bool = True) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), check_hypotheses)
