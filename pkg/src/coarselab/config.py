"""Experiment configuration files.

Grammar (INI, ``key = value``, ``;`` or ``#`` comments)::

    [experiment]
    kind = iso-profile          ; see EXPERIMENT_KEYS for the kinds
    space = grid                ; refers to a [space:grid] section
    seed = 0
    budget_vertices = 5000000
    ...kind-specific keys...

    [space:grid]
    kind = ZPower               ; any SpaceSpec kind
    d = 2
    radius = 23

Space keys are the SpaceSpec fields.  ``Q`` is four integers ``a b c d``
(row major); ``factors`` is a comma list of space names; ``inner`` is one
space name.  Lists elsewhere are comma separated.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field

from .errors import InputError
from .generators import SPACE_KINDS, SpaceSpec
from .graph import DEFAULT_MAX_VERTICES
from .separation import EXACT_CUT_BUDGET, SUBSET_BUDGET

KINDS = ("generate", "growth", "iso-profile", "sep-profile", "regmap-verify", "embed", "pipeline")


def _bool(s: str) -> bool:
    low = s.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {s!r}")


def _ints(s: str) -> tuple[int, ...]:
    return tuple(int(x) for x in s.replace(",", " ").split())


def _str(s: str) -> str:
    return s.strip()


# key -> (parser, default); default None with required=True means mandatory
COMMON_KEYS = {
    "seed": (int, 0),
    "budget_vertices": (int, DEFAULT_MAX_VERTICES),
    "budget_subsets": (int, SUBSET_BUDGET),
    "budget_exact": (int, EXACT_CUT_BUDGET),
}
EXPERIMENT_KEYS = {
    "generate": {"space": (_str, None)},
    "growth": {"space": (_str, None), "max_radius": (int, None)},
    "iso-profile": {
        "space": (_str, None),
        "method": (_str, "exact"),
        "max_size": (int, None),
        "root": (_str, "center"),
        "translation_invariant": (_bool, False),
        "interior": (_bool, True),
    },
    "sep-profile": {
        "space": (_str, None),
        "strategy": (_str, "family_balls"),
        "sizes": (_ints, ()),
        "root": (_str, "center"),
        "boxes": (_str, ""),
    },
    "regmap-verify": {
        "domain": (_str, None),
        "codomain": (_str, None),
        "map": (_str, None),
        "sample": (int, 64),
    },
    "embed": {"n": (int, None), "d": (int, None), "radius": (int, None), "sample": (int, 64)},
    "pipeline": {
        "space": (_str, None),
        "n": (int, None),
        "d": (int, None),
        "growth_radius": (int, 24),
        "profile_radius": (int, 8),
        "tolerance": (float, 0.15),
    },
}
SPACE_KEYS = {
    "kind": (_str, None),
    "d": (int, 1),
    "rank": (int, 2),
    "n": (int, 2),
    "Q": (_ints, (2, 1, 1, 1)),
    "radius": (int, 4),
    "levels": (int, 4),
    "width": (int, 4),
    "wrap": (_bool, False),
    "depth": (int, 0),
    "factors": (_str, ""),
    "inner": (_str, ""),
}


@dataclass
class ExperimentConfig:
    kind: str
    params: dict
    spaces: dict = field(default_factory=dict)  # name -> SpaceSpec
    seed: int = 0
    budget_vertices: int = DEFAULT_MAX_VERTICES
    budget_subsets: int = SUBSET_BUDGET
    budget_exact: int = EXACT_CUT_BUDGET
    base_dir: str = "."
    raw: dict = field(default_factory=dict)  # section -> {key: text}, for the manifest

    def space(self, key: str = "space") -> SpaceSpec:
        return self.spaces[self.params[key]]

    def resolve_path(self, p: str) -> str:
        return p if os.path.isabs(p) else os.path.join(self.base_dir, p)


class _Located:
    """Line/column lookup of ``key`` inside ``[section]`` of the raw text."""

    def __init__(self, text: str, path: str):
        self.path = path
        self.lines = text.splitlines()

    def section_line(self, section: str) -> int:
        for i, line in enumerate(self.lines, start=1):
            if line.strip() == f"[{section}]":
                return i
        return 1

    def where(self, section: str, key: str | None = None) -> str:
        start = self.section_line(section)
        if key is not None:
            for i in range(start, len(self.lines)):
                line = self.lines[i]
                if line.strip().startswith("["):
                    break
                name, sep, _ = line.partition("=")
                if sep and name.strip() == key:
                    col = len(name) + 2
                    while col <= len(line) and line[col - 1] == " ":
                        col += 1
                    return f"{self.path}:{i + 1}:{col}"
        return f"{self.path}:{start}:1"


def _read_section(loc: _Located, parser, section: str, schema: dict, extra_ok=()) -> dict:
    out = {}
    body = parser[section]
    for key in body:
        if key not in schema and key not in extra_ok:
            raise InputError(f"{loc.where(section, key)}: unknown key {key!r} in [{section}]")
    for key, (conv, default) in schema.items():
        if key in body:
            try:
                out[key] = conv(body[key])
            except ValueError as exc:
                raise InputError(f"{loc.where(section, key)}: bad value for {key!r}: {exc}") from None
        elif default is None:
            raise InputError(f"{loc.where(section)}: missing required field {key!r} in [{section}]")
        else:
            out[key] = default
    return out


def _spec_from(name: str, fields: dict, sections: dict, loc: _Located, stack=()) -> SpaceSpec:
    if name in stack:
        raise InputError(f"{loc.where('space:' + name)}: space {name!r} refers to itself")
    kw = dict(fields)
    q = kw.pop("Q")
    if len(q) != 4:
        raise InputError(f"{loc.where('space:' + name, 'Q')}: Q needs four integers")
    kw["Q"] = ((q[0], q[1]), (q[2], q[3]))
    factors = [f.strip() for f in kw.pop("factors").split(",") if f.strip()]
    inner = kw.pop("inner").strip()

    def sub(ref, key):
        if ref not in sections:
            raise InputError(f"{loc.where('space:' + name, key)}: undefined space {ref!r}")
        return _spec_from(ref, sections[ref], sections, loc, stack + (name,))

    kw["factors"] = tuple(sub(f, "factors") for f in factors)
    kw["inner"] = sub(inner, "inner") if inner else None
    if kw["kind"] not in SPACE_KINDS:
        raise InputError(f"{loc.where('space:' + name, 'kind')}: unknown space kind {kw['kind']!r}")
    try:
        return SpaceSpec(**kw)
    except InputError as exc:
        raise InputError(f"{loc.where('space:' + name)}: {exc}") from None


def parse_config_text(text: str, path: str = "<config>") -> ExperimentConfig:
    loc = _Located(text, path)
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    parser.optionxform = str
    try:
        parser.read_string(text, source=path)
    except configparser.MissingSectionHeaderError as exc:
        raise InputError(f"{path}:{exc.lineno}:1: expected a [section] header first") from None
    except configparser.DuplicateOptionError as exc:
        raise InputError(f"{path}:{exc.lineno}:1: duplicate key {exc.option!r} in [{exc.section}]") from None
    except configparser.DuplicateSectionError as exc:
        raise InputError(f"{path}:{exc.lineno}:1: duplicate section [{exc.section}]") from None
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise InputError(f"{path}:{lineno}:1: cannot parse {line.strip()!r} (expected key = value)") from None
    if not parser.has_section("experiment"):
        raise InputError(f"{path}:1:1: missing [experiment] section")
    raw_exp = parser["experiment"]
    if "kind" not in raw_exp:
        raise InputError(f"{loc.where('experiment')}: missing required field 'kind' in [experiment]")
    kind = raw_exp["kind"].strip()
    if kind not in KINDS:
        raise InputError(f"{loc.where('experiment', 'kind')}: unknown experiment kind {kind!r}; expected one of {', '.join(KINDS)}")
    schema = dict(EXPERIMENT_KEYS[kind])
    common = _read_section(loc, parser, "experiment", COMMON_KEYS, extra_ok=("kind",) + tuple(schema))
    params = _read_section(loc, parser, "experiment", schema, extra_ok=("kind",) + tuple(COMMON_KEYS))
    space_fields = {}
    for sec in parser.sections():
        if sec == "experiment":
            continue
        if not sec.startswith("space:") or not sec[6:].strip():
            raise InputError(f"{loc.where(sec)}: unknown section [{sec}]; expected [experiment] or [space:NAME]")
        space_fields[sec[6:].strip()] = _read_section(loc, parser, sec, SPACE_KEYS)
    spaces = {}
    for key in ("space", "domain", "codomain"):
        if key in params:
            ref = params[key]
            if ref not in space_fields:
                raise InputError(f"{loc.where('experiment', key)}: undefined space {ref!r} (no [space:{ref}] section)")
            spaces[ref] = _spec_from(ref, space_fields[ref], space_fields, loc)
    for key in ("budget_vertices", "budget_subsets", "budget_exact"):
        if common[key] <= 0:
            raise InputError(f"{loc.where('experiment', key)}: {key} must be positive")
    raw = {sec: dict(parser[sec]) for sec in parser.sections()}
    return ExperimentConfig(kind, params, spaces, base_dir=os.path.dirname(os.path.abspath(path)) if path != "<config>" else ".", raw=raw, **common)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config_text(text, os.fspath(path))


def config_text(raw: dict) -> str:
    """Canonical INI text for ``raw`` (sections and keys sorted, experiment first)."""
    out = []
    for sec in sorted(raw, key=lambda s: (s != "experiment", s)):
        out.append(f"[{sec}]")
        out += [f"{k} = {raw[sec][k]}" for k in sorted(raw[sec])]
        out.append("")
    return "\n".join(out)
