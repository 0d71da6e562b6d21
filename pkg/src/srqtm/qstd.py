"""State transition diagrams, the ``.sqtm`` machine text format and DOT output.

Machine file layout (UTF-8, lines starting with ``#`` are comments)::

    machine: hadamard-2
    alphabet: #,0,1
    states: q0,q1,q2,q3,qf
    start: q0
    final: qf
    rule: q2,1 -> 1,q3,L : -1/sqrt(2)

Amplitudes are either decimals (``0.5``, ``0.5-0.25i``, ``1e-3i``) or one of the
symbolic tokens ``1/sqrt(2)``, ``cos(pi/2^k)``, ``sin(pi/2^k)``,
``exp(i*pi/2^k)``, ``exp(-i*pi/2^k)``, each optionally negated.
"""
from __future__ import annotations

import cmath
import math
import re
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Optional

from .core import (Direction, Machine, MachineError, TransitionRule,
                   check_rotational, direction_map)

__all__ = [
    "MachineSyntaxError", "NotUnidirectional", "NotRotational",
    "parse_amplitude", "format_amplitude", "parse_machine", "emit_machine",
    "QstdNode", "QstdEdge", "QstdDoc", "from_machine", "to_machine", "to_graph_text",
]


class MachineSyntaxError(ValueError):
    def __init__(self, message, lineno=None):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}" if lineno else message)


class NotUnidirectional(ValueError):
    pass


class NotRotational(ValueError):
    pass


# -- amplitudes ---------------------------------------------------------------

_SYMBOLIC = re.compile(
    r"^(?P<neg>-)?(?:"
    r"(?P<rsqrt>1/sqrt\(2\))"
    r"|(?P<trig>cos|sin)\(pi/2\^(?P<tk>\d+)\)"
    r"|exp\((?P<eneg>-)?i\*pi/2\^(?P<ek>\d+)\)"
    r")$")


def parse_amplitude(text: str) -> complex:
    """Parse one amplitude token to a complex value at full double precision."""
    s = text.strip().replace(" ", "")
    if not s:
        raise ValueError("empty amplitude")
    m = _SYMBOLIC.match(s)
    if m:
        if m["rsqrt"]:
            value = complex(1 / math.sqrt(2))
        elif m["trig"]:
            angle = math.pi / 2 ** int(m["tk"])
            value = complex(math.cos(angle) if m["trig"] == "cos" else math.sin(angle))
        else:
            angle = math.pi / 2 ** int(m["ek"])
            value = cmath.exp((-1j if m["eneg"] else 1j) * angle)
        return -value if m["neg"] else value
    try:
        if not s.endswith("i"):
            return complex(float(s), 0.0)
        body = s[:-1]
        cut = max((i for i, ch in enumerate(body)
                   if ch in "+-" and i > 0 and body[i - 1] not in "eE"), default=0)
        re_txt, im_txt = body[:cut], body[cut:]
        im = {"": 1.0, "+": 1.0, "-": -1.0}.get(im_txt)
        return complex(float(re_txt) if re_txt else 0.0,
                       im if im is not None else float(im_txt))
    except ValueError:
        raise ValueError(f"malformed amplitude {text!r}") from None


def format_amplitude(value: complex, token: Optional[str] = None) -> str:
    if token is not None:
        return token
    value = complex(value)
    re_txt = format(value.real, ".17g")
    if value.imag == 0:
        return re_txt
    im_txt = format(value.imag, "+.17g")
    if value.real == 0:
        return im_txt.lstrip("+") + "i"
    return f"{re_txt}{im_txt}i"


def symbolic_rule(source, read, write, target, direction, token) -> TransitionRule:
    """Rule whose amplitude comes from a symbolic or decimal token."""
    return TransitionRule(source, read, write, target, direction,
                          parse_amplitude(token), token)


# -- .sqtm files --------------------------------------------------------------

_HEADER_KEYS = ("machine", "alphabet", "states", "start", "final")


def parse_machine(text: str) -> Machine:
    header = {}
    rules = []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, rest = line.partition(":")
        key = key.strip().lower()
        if not sep:
            raise MachineSyntaxError(f"expected 'key: value', got {line!r}", lineno)
        rest = rest.strip()
        if key in _HEADER_KEYS:
            if key in header:
                raise MachineSyntaxError(f"repeated header {key!r}", lineno)
            header[key] = (rest, lineno)
        elif key == "rule":
            rule = _parse_rule(rest, lineno, header)
            if rule.key in seen:
                raise MachineSyntaxError(f"duplicate rule {rule.key}", lineno)
            seen.add(rule.key)
            rules.append(rule)
        else:
            raise MachineSyntaxError(f"unknown key {key!r}", lineno)
    missing = [k for k in _HEADER_KEYS if k not in header]
    if missing:
        raise MachineSyntaxError(f"missing header line(s): {', '.join(missing)}")
    alphabet = _split(header["alphabet"][0])
    states = _split(header["states"][0])
    try:
        return Machine(header["machine"][0], alphabet, states,
                       header["start"][0], header["final"][0], rules)
    except MachineError as exc:
        raise MachineSyntaxError(str(exc)) from exc


def _split(text):
    return [t.strip() for t in text.split(",") if t.strip()]


def _parse_rule(text, lineno, header):
    lhs, sep, amp_txt = text.rpartition(":")
    if not sep:
        raise MachineSyntaxError("rule needs ': <amplitude>'", lineno)
    parts = lhs.split("->")
    if len(parts) != 2:
        raise MachineSyntaxError("rule needs exactly one '->'", lineno)
    src = _split(parts[0])
    dst = _split(parts[1])
    if len(src) != 2 or len(dst) != 3:
        raise MachineSyntaxError("rule must read '<p>,<s> -> <t>,<q>,<L|R>'", lineno)
    if "alphabet" in header:
        known = set(_split(header["alphabet"][0]))
        for sym in (src[1], dst[0]):
            if sym not in known:
                raise MachineSyntaxError(f"unknown symbol {sym!r}", lineno)
    if "states" in header:
        known = set(_split(header["states"][0]))
        for q in (src[0], dst[1]):
            if q not in known:
                raise MachineSyntaxError(f"unknown state {q!r}", lineno)
    try:
        direction = Direction.parse(dst[2])
        amp = parse_amplitude(amp_txt)
        token = amp_txt.strip() if _SYMBOLIC.match(amp_txt.strip().replace(" ", "")) else None
        return TransitionRule(src[0], src[1], dst[0], dst[1], direction, amp, token)
    except (ValueError, MachineError) as exc:
        raise MachineSyntaxError(str(exc), lineno) from exc


def emit_machine(m: Machine) -> str:
    lines = [
        f"machine: {m.name}",
        f"alphabet: {','.join(m.alphabet)}",
        f"states: {','.join(m.states)}",
        f"start: {m.start}",
        f"final: {m.final}",
    ]
    for r in m.rules:
        lines.append(f"rule: {r.source},{r.read} -> {r.write},{r.target},"
                     f"{r.direction.value} : {format_amplitude(r.amp, r.token)}")
    return "\n".join(lines) + "\n"


# -- diagrams -----------------------------------------------------------------

@dataclass(frozen=True)
class QstdNode:
    state: str
    direction: Optional[Direction]

    @property
    def label(self) -> str:
        return self.state + (self.direction.glyph if self.direction else "")


@dataclass(frozen=True)
class QstdEdge:
    source: str
    target: str
    read: str
    write: str
    amp: complex
    token: Optional[str] = None
    merged: bool = False

    @property
    def label(self) -> str:
        base = f"{self.read}/{self.write}"
        if self.amp == 1:
            return base
        return f"{base}: {format_amplitude(self.amp, self.token)}"


@dataclass(frozen=True)
class QstdDoc:
    name: str
    alphabet: tuple
    start: str
    final: str
    nodes: tuple
    edges: tuple
    meta: dict = field(default_factory=dict, compare=False)

    def node(self, state) -> QstdNode:
        return next(n for n in self.nodes if n.state == state)

    def parallel_groups(self) -> "OrderedDict[tuple, list]":
        groups = OrderedDict()
        for e in self.edges:
            groups.setdefault((e.source, e.target), []).append(e)
        return groups


def from_machine(m: Machine) -> QstdDoc:
    d = direction_map(m)
    if not d.ok:
        a, b = d.violation
        raise NotUnidirectional(f"{a} and {b} enter {a.target} from opposite sides")
    r = check_rotational(m, d)
    if not r.ok:
        (p, sigma), a, b = r.violation
        raise NotRotational(f"({p},{sigma}) leads to both {a.target} and {b.target}")
    nodes = tuple(QstdNode(q, d.directions.get(q)) for q in m.states)
    groups = {}
    for rule in m.rules:
        groups.setdefault((rule.source, rule.target), []).append(rule)
    edges = tuple(QstdEdge(rule.source, rule.target, rule.read, rule.write, rule.amp,
                           rule.token, merged=len(groups[rule.source, rule.target]) > 1)
                  for rule in m.rules)
    return QstdDoc(m.name, m.alphabet, m.start, m.final, nodes, edges)


def to_machine(doc: QstdDoc) -> Machine:
    """Rebuild the transition table from a diagram (the inverse of :func:`from_machine`)."""
    rules = [TransitionRule(e.source, e.read, e.write, e.target,
                            doc.node(e.target).direction, e.amp, e.token)
             for e in doc.edges]
    return Machine(doc.name, doc.alphabet, [n.state for n in doc.nodes],
                   doc.start, doc.final, rules)


def _q(text):
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_graph_text(doc: QstdDoc, merge_parallel: bool = False, rankdir: str = "LR") -> str:
    """Render ``doc`` as a DOT digraph.

    With ``merge_parallel`` the edges sharing source and target are drawn as a
    single edge carrying one label line per rule.
    """
    out = [f"digraph {_q(doc.name)} {{", f"  rankdir={rankdir};"]
    for n in doc.nodes:
        shape = "doublecircle" if n.state == doc.final else "circle"
        out.append(f"  {_q(n.state)} [label={_q(n.label)}, shape={shape}];")
    if merge_parallel:
        for (src, dst), edges in doc.parallel_groups().items():
            label = "\\n".join(_q(e.label)[1:-1] for e in edges)
            out.append(f'  {_q(src)} -> {_q(dst)} [label="{label}"];')
    else:
        for e in doc.edges:
            out.append(f"  {_q(e.source)} -> {_q(e.target)} [label={_q(e.label)}];")
    out.append("}")
    return "\n".join(out) + "\n"
