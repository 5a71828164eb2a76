"""Declarative scenario files: parse, validate, serialize.

A scenario is plain text split into sections.  A section header is a
bracketed line naming a kind and, for declarations, a name:

    [generator h]
    matrix = 1 0 0 1
    x = trig(0.05, 2, 0)
    y = trig(0.1, 1, 0)

    [word ww]
    letters = h h

    [measure circ]
    kind = circle
    x0 = 0.25

    [rotation_set hull]
    word = h
    n = 1000
    seeds = 64

Blank lines and text after '#' are ignored.  Numbers are decimal with no
locale dependence.  Declaration kinds (generator, word, measure) require
a name; analysis kinds (classify, rotation_set, invariant_measure,
fixed_points, rotev, klein) take an optional one, used to name report
files; [tolerances] appears at most once and is never named.

Displacement terms are const(v) for a constant offset and
trig(amp, kx, ky[, phase]) for amp*sin(2*pi*(kx*x + ky*y) + phase).
A word value is either the name of a [word] section or an inline string
of generator names, apostrophe for inverse: "dehn tr'".

Every validation failure raises ConfigError carrying the line number.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .averaging import GroupSpec
from .errors import ConfigError, RotorError
from .maps import (Generator, MapGroup, Word, linear_part, trig_term)
from .mcg import MCGClass
from .measures import EmpiricalMeasure, krylov_bogolyubov

__all__ = [
    "AnalysisRequest",
    "Scenario",
    "generator_section_text",
    "parse_scenario",
    "parse_scenario_text",
]

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_TERM_RE = re.compile(r"^(const|trig)\(([^()]*)\)$")

_DECLARATIONS = ("generator", "word", "measure")
_ANALYSES = ("classify", "rotation_set", "invariant_measure",
             "fixed_points", "rotev", "klein")

# tolerance knobs analyses fall back to when a section has no local value
_TOLERANCE_KEYS = {"invariance": 1e-6, "fixed": 1e-9, "sigma": 1e-9}


def _err(line: int, msg: str) -> ConfigError:
    return ConfigError("line %d: %s" % (line, msg))


@dataclass(frozen=True)
class AnalysisRequest:
    kind: str
    name: Optional[str]
    params: dict
    line: int

    @property
    def slug(self) -> str:
        """Base name for this request's report files."""
        return self.kind if self.name is None else "%s_%s" % (self.kind,
                                                              self.name)


@dataclass
class Scenario:
    group: MapGroup
    words: Dict[str, Word]
    measures: Dict[str, EmpiricalMeasure]
    analyses: List[AnalysisRequest]
    tolerances: Dict[str, float] = field(
        default_factory=lambda: dict(_TOLERANCE_KEYS))

    def resolve_word(self, text: str, line: int = 0) -> Word:
        """A declared word by name, else an inline word over the group."""
        text = text.strip()
        if text in self.words:
            return self.words[text]
        try:
            return self.group.word(text)
        except RotorError as exc:
            raise _err(line, "cannot resolve word %r: %s" % (text, exc))

    def resolve_measure(self, name: str, line: int = 0) -> EmpiricalMeasure:
        if name not in self.measures:
            raise _err(line, "unknown measure %r" % name)
        return self.measures[name]


# --- raw sectioning


class _RawSection:
    __slots__ = ("kind", "name", "line", "pairs")

    def __init__(self, kind, name, line):
        self.kind = kind
        self.name = name
        self.line = line
        self.pairs: List[Tuple[int, str, str]] = []


def _split_sections(text: str) -> List[_RawSection]:
    sections: List[_RawSection] = []
    current: Optional[_RawSection] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise _err(lineno, "unterminated section header %r" % raw.strip())
            tokens = line[1:-1].split()
            if len(tokens) not in (1, 2):
                raise _err(lineno, "section header needs a kind and at most "
                                   "one name, got %r" % line)
            kind = tokens[0]
            name = tokens[1] if len(tokens) == 2 else None
            if kind not in _DECLARATIONS + _ANALYSES + ("tolerances",):
                raise _err(lineno, "unknown section kind %r" % kind)
            if kind in _DECLARATIONS and name is None:
                raise _err(lineno, "[%s] needs a name" % kind)
            if kind == "tolerances" and name is not None:
                raise _err(lineno, "[tolerances] takes no name")
            if name is not None and not _NAME_RE.match(name):
                raise _err(lineno, "bad name %r (letters, digits, "
                                   "underscore; not starting with a digit)"
                           % name)
            current = _RawSection(kind, name, lineno)
            sections.append(current)
            continue
        if "=" not in line:
            raise _err(lineno, "expected key = value, got %r" % line)
        if current is None:
            raise _err(lineno, "key before any section header")
        key, value = line.split("=", 1)
        current.pairs.append((lineno, key.strip(), value.strip()))
    return sections


# --- typed key extraction


class _Keys:
    """One section's key=value pairs with typed, line-aware accessors."""

    def __init__(self, section: _RawSection):
        self.section = section
        self.seen = set()
        self.single: Dict[str, Tuple[int, str]] = {}
        self.multi: Dict[str, List[Tuple[int, str]]] = {}
        for lineno, key, value in section.pairs:
            self.multi.setdefault(key, []).append((lineno, value))
            if key in self.single:
                self.single[key] = (lineno, None)  # flag duplicates lazily
            else:
                self.single[key] = (lineno, value)

    def _fetch(self, key):
        self.seen.add(key)
        if key not in self.single:
            return None
        lineno, value = self.single[key]
        if value is None:
            raise _err(lineno, "duplicate key %r in [%s]" % (key,
                                                             self.section.kind))
        return lineno, value

    def string(self, key, default=None, required=False):
        got = self._fetch(key)
        if got is None:
            if required:
                raise _err(self.section.line,
                           "[%s%s] needs %s ="
                           % (self.section.kind,
                              " " + self.section.name if self.section.name else "",
                              key))
            return default
        return got[1]

    def floatval(self, key, default=None, required=False):
        got = self._fetch(key)
        if got is None:
            if required:
                raise _err(self.section.line, "[%s] needs %s ="
                           % (self.section.kind, key))
            return default
        lineno, value = got
        try:
            return float(value)
        except ValueError:
            raise _err(lineno, "%s: expected a number, got %r" % (key, value))

    def intval(self, key, default=None, required=False):
        got = self._fetch(key)
        if got is None:
            if required:
                raise _err(self.section.line, "[%s] needs %s ="
                           % (self.section.kind, key))
            return default
        lineno, value = got
        try:
            return int(value)
        except ValueError:
            raise _err(lineno, "%s: expected an integer, got %r" % (key, value))

    def boolval(self, key, default=False):
        got = self._fetch(key)
        if got is None:
            return default
        lineno, value = got
        if value not in ("true", "false"):
            raise _err(lineno, "%s: expected true or false, got %r"
                       % (key, value))
        return value == "true"

    def pair(self, key, caster, default=None):
        got = self._fetch(key)
        if got is None:
            return default
        lineno, value = got
        parts = value.split()
        if len(parts) != 2:
            raise _err(lineno, "%s: expected two values, got %r" % (key, value))
        try:
            return (caster(parts[0]), caster(parts[1]))
        except ValueError:
            raise _err(lineno, "%s: expected numbers, got %r" % (key, value))

    def names(self, key, required=False):
        got = self._fetch(key)
        if got is None:
            if required:
                raise _err(self.section.line, "[%s] needs %s ="
                           % (self.section.kind, key))
            return None
        lineno, value = got
        parts = value.split()
        if not parts:
            raise _err(lineno, "%s: expected at least one name" % key)
        return lineno, parts

    def repeated(self, key):
        self.seen.add(key)
        return self.multi.get(key, [])

    def reject_unknown(self):
        for lineno, key, _ in self.section.pairs:
            if key not in self.seen:
                raise _err(lineno, "unknown key %r in [%s]"
                           % (key, self.section.kind))


# --- declaration builders


def _parse_term(lineno: int, text: str):
    m = _TERM_RE.match(text)
    if not m:
        raise _err(lineno, "bad term %r; want const(v) or "
                           "trig(amp, kx, ky[, phase])" % text)
    fn, body = m.groups()
    parts = [p.strip() for p in body.split(",")] if body.strip() else []
    try:
        args = [float(p) for p in parts]
    except ValueError:
        raise _err(lineno, "bad number in term %r" % text)
    if fn == "const":
        if len(args) != 1:
            raise _err(lineno, "const takes one value, got %d" % len(args))
        return (args[0], 0, 0, math.pi / 2)
    if len(args) not in (3, 4):
        raise _err(lineno, "trig takes amp, kx, ky and an optional phase")
    try:
        return trig_term(*args)
    except RotorError as exc:
        raise _err(lineno, str(exc))


def _build_generator(section: _RawSection) -> Generator:
    keys = _Keys(section)
    mat = keys.string("matrix")
    if mat is None:
        linear = MCGClass.identity()
    else:
        lineno = keys.single["matrix"][0]
        parts = mat.split()
        if len(parts) != 4:
            raise _err(lineno, "matrix: expected 4 integers a b c d")
        try:
            entries = [int(p) for p in parts]
        except ValueError:
            raise _err(lineno, "matrix: expected integers, got %r" % mat)
        try:
            linear = MCGClass(*entries)
        except RotorError as exc:
            raise _err(lineno, "generator %r: %s" % (section.name, exc))
    disp_x = [_parse_term(lineno, v) for lineno, v in keys.repeated("x")]
    disp_y = [_parse_term(lineno, v) for lineno, v in keys.repeated("y")]
    keys.reject_unknown()
    try:
        gen = Generator(section.name, linear, disp_x=disp_x, disp_y=disp_y)
    except RotorError as exc:
        raise _err(section.line, "generator %r: %s" % (section.name, exc))
    if not gen.certified:
        raise _err(section.line,
                   "generator %r: displacement is not certified invertible "
                   "(contraction margin %.3f <= 0)"
                   % (section.name, gen.contraction_margin))
    return gen


def _build_measure(scn: Scenario, section: _RawSection) -> EmpiricalMeasure:
    keys = _Keys(section)
    kind = keys.string("kind", required=True)
    if kind == "circle":
        x0 = keys.floatval("x0", required=True)
        atoms = keys.intval("atoms", 16)
        keys.reject_unknown()
        return EmpiricalMeasure([(x0, j / atoms) for j in range(atoms)])
    if kind == "hcircle":
        y0 = keys.floatval("y0", required=True)
        atoms = keys.intval("atoms", 16)
        keys.reject_unknown()
        return EmpiricalMeasure([(j / atoms, y0) for j in range(atoms)])
    if kind == "grid":
        k = keys.intval("k", required=True)
        keys.reject_unknown()
        if k < 1:
            raise _err(section.line, "grid needs k >= 1")
        return EmpiricalMeasure.uniform_grid(k)
    if kind == "dirac":
        at = keys.pair("at", float)
        if at is None:
            raise _err(section.line, "[measure] of kind dirac needs at = x y")
        keys.reject_unknown()
        return EmpiricalMeasure.dirac(at)
    if kind == "orbit":
        wtext = keys.string("word", required=True)
        wline = keys.single["word"][0]
        seed = keys.pair("seed", float, (0.0, 0.0))
        n = keys.intval("n", 2048)
        keys.reject_unknown()
        if n < 1:
            raise _err(section.line, "orbit needs n >= 1")
        w = scn.resolve_word(wtext, wline)
        return krylov_bogolyubov(w, seed, n, n)
    raise _err(keys.single["kind"][0],
               "unknown measure kind %r; want circle, hcircle, grid, "
               "dirac or orbit" % kind)


# --- analysis builders


def _deck(keys: _Keys):
    return keys.pair("deck", int, (0, 0))


def _build_analysis(scn: Scenario, section: _RawSection) -> AnalysisRequest:
    keys = _Keys(section)
    kind = section.kind
    params: dict = {}

    if kind == "classify":
        lineno, names = keys.names("generators", required=True)
        gens = []
        for nm in names:
            try:
                w = scn.group.by_name(nm)
            except KeyError:
                raise _err(lineno, "unknown generator %r" % nm)
            gens.append((nm, scn.group.generators[w.letters[0][0]].linear))
        params["generators"] = gens

    elif kind == "rotation_set":
        wtext = keys.string("word", required=True)
        wline = keys.single["word"][0]
        params["word"] = scn.resolve_word(wtext, wline)
        params["word_text"] = wtext
        params["n"] = keys.intval("n", 1000)
        params["seeds"] = keys.intval("seeds", 64)
        params["deck"] = _deck(keys)
        if params["n"] < 1 or params["seeds"] < 1:
            raise _err(section.line, "rotation_set needs n >= 1, seeds >= 1")

    elif kind == "invariant_measure":
        mname = keys.string("seed", required=True)
        mline = keys.single["seed"][0]
        params["seed_name"] = mname
        params["seed"] = scn.resolve_measure(mname, mline)
        ptext = keys.string("phi", required=True)
        pline = keys.single["phi"][0]
        params["phi"] = scn.resolve_word(ptext, pline)
        params["phi_text"] = ptext
        g0 = keys.names("g0")
        params["g0"] = []
        if g0 is not None:
            lineno, names = g0
            params["g0"] = [scn.resolve_word(nm, lineno) for nm in names]
        ext = keys.names("extension")
        params["extension"] = []
        if ext is not None:
            lineno, names = ext
            params["extension"] = [scn.resolve_word(nm, lineno)
                                   for nm in names]
        # group data misdeclarations are scenario validation failures,
        # caught here with a line number rather than mid-run
        try:
            params["spec"] = GroupSpec(
                generators_G0=tuple(params["g0"]),
                extension_gens=tuple((w, linear_part(w))
                                     for w in params["extension"]))
        except ConfigError as exc:
            raise _err(section.line, str(exc))
        params["L"] = keys.intval("L", 256)
        params["tol"] = keys.floatval("tol", 1e-9)
        params["force"] = keys.boolval("force")

    elif kind == "fixed_points":
        wtext = keys.string("word")
        wlist = keys.names("words")
        if (wtext is None) == (wlist is None):
            raise _err(section.line,
                       "[fixed_points] needs exactly one of word =, words =")
        if wtext is not None:
            wline = keys.single["word"][0]
            params["words"] = [scn.resolve_word(wtext, wline)]
            params["word_texts"] = [wtext]
        else:
            lineno, names = wlist
            params["words"] = [scn.resolve_word(nm, lineno) for nm in names]
            params["word_texts"] = list(names)
        params["grid"] = keys.intval("grid", 64)
        mname = keys.string("measure")
        params["measure_name"] = mname
        params["measure"] = None
        if mname is not None:
            mline = keys.single["measure"][0]
            if len(params["words"]) != 1:
                raise _err(mline, "a Franks certificate needs a single word")
            params["measure"] = scn.resolve_measure(mname, mline)
        # a Franks run bounds the measure's invariance defect, a plain scan
        # bounds the pointwise residual; the defaults differ accordingly
        fallback = (scn.tolerances["invariance"] if mname is not None
                    else scn.tolerances["fixed"])
        params["tol"] = keys.floatval("tol", fallback)

    elif kind == "rotev":
        gtext = keys.string("g", required=True)
        params["g"] = scn.resolve_word(gtext, keys.single["g"][0])
        params["g_text"] = gtext
        htext = keys.string("h", required=True)
        params["h"] = scn.resolve_word(htext, keys.single["h"][0])
        params["h_text"] = htext
        mname = keys.string("measure", required=True)
        params["measure_name"] = mname
        params["measure"] = scn.resolve_measure(mname, keys.single["measure"][0])
        params["pmax"] = keys.intval("pmax", 5)
        if params["pmax"] < 1:
            raise _err(section.line, "rotev needs pmax >= 1")

    elif kind == "klein":
        wtext = keys.string("word", required=True)
        wline = keys.single["word"][0]
        params["word"] = scn.resolve_word(wtext, wline)
        params["word_text"] = wtext
        params["deck"] = _deck(keys)
        params["sigma_tol"] = keys.floatval("sigma_tol",
                                            scn.tolerances["sigma"])
        mname = keys.string("measure")
        params["measure_name"] = mname
        params["measure"] = None
        if mname is not None:
            mline = keys.single["measure"][0]
            params["measure"] = scn.resolve_measure(mname, mline)
        params["symmetrize"] = keys.boolval("symmetrize",
                                            params["measure"] is not None)

    keys.reject_unknown()
    return AnalysisRequest(kind, section.name, params, section.line)


# --- top level


def parse_scenario_text(text: str, path: str = "<scenario>") -> Scenario:
    sections = _split_sections(text)

    gens: List[Generator] = []
    seen_names: Dict[str, int] = {}
    for s in sections:
        if s.kind != "generator":
            continue
        if s.name in seen_names:
            raise _err(s.line, "generator %r already declared on line %d"
                       % (s.name, seen_names[s.name]))
        seen_names[s.name] = s.line
        gens.append(_build_generator(s))
    if not gens:
        raise ConfigError("%s: no [generator] sections" % path)
    group = MapGroup(gens)

    scn = Scenario(group=group, words={}, measures={}, analyses=[])

    # tolerances before anything that reads defaults from them
    seen_tol = None
    for s in sections:
        if s.kind != "tolerances":
            continue
        if seen_tol is not None:
            raise _err(s.line, "[tolerances] already declared on line %d"
                       % seen_tol)
        seen_tol = s.line
        keys = _Keys(s)
        for key in list(_TOLERANCE_KEYS):
            v = keys.floatval(key, None)
            if v is not None:
                if not v > 0.0:
                    raise _err(keys.single[key][0],
                               "%s must be positive" % key)
                scn.tolerances[key] = v
        keys.reject_unknown()

    for s in sections:
        if s.kind != "word":
            continue
        if s.name in seen_names:
            raise _err(s.line, "name %r already declared on line %d"
                       % (s.name, seen_names[s.name]))
        seen_names[s.name] = s.line
        keys = _Keys(s)
        letters = keys.string("letters", required=True)
        lineno = keys.single["letters"][0]
        keys.reject_unknown()
        try:
            scn.words[s.name] = group.word(letters)
        except RotorError as exc:
            raise _err(lineno, str(exc))

    for s in sections:
        if s.kind != "measure":
            continue
        if s.name in scn.measures:
            raise _err(s.line, "measure %r already declared" % s.name)
        scn.measures[s.name] = _build_measure(scn, s)

    slugs: Dict[str, int] = {}
    for s in sections:
        if s.kind not in _ANALYSES:
            continue
        req = _build_analysis(scn, s)
        if req.slug in slugs:
            raise _err(s.line, "analysis [%s%s] already declared on line %d; "
                               "give one of them a name"
                       % (s.kind, " " + s.name if s.name else "",
                          slugs[req.slug]))
        slugs[req.slug] = s.line
        scn.analyses.append(req)

    if not scn.analyses:
        raise ConfigError("%s: no analysis sections" % path)
    return scn


def parse_scenario(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return parse_scenario_text(text, str(path))


# --- serialization (the examples subcommand writes catalog maps back out)


def _term_text(term) -> str:
    amp, kx, ky, phase = term
    if kx == 0 and ky == 0 and phase == math.pi / 2:
        return "const(%r)" % amp
    if phase == 0.0:
        return "trig(%r, %d, %d)" % (amp, int(kx), int(ky))
    return "trig(%r, %d, %d, %r)" % (amp, int(kx), int(ky), phase)


def generator_section_text(gen: Generator) -> str:
    """The [generator] section reproducing gen exactly on reparse."""
    lines = ["[generator %s]" % gen.name]
    if not gen.linear.is_identity():
        a, b, c, d = (gen.linear.a, gen.linear.b, gen.linear.c, gen.linear.d)
        lines.append("matrix = %d %d %d %d" % (a, b, c, d))
    for t in gen.disp_x:
        lines.append("x = %s" % _term_text(t))
    for t in gen.disp_y:
        lines.append("y = %s" % _term_text(t))
    return "\n".join(lines) + "\n"
