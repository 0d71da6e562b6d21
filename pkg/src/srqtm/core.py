"""Machine model (alphabet, states, transition table) and static class checkers.

A machine is unidirectional when every state is entered from one fixed head
direction, rotational when additionally the next state depends only on the
current state and the read symbol, and locally unitary when the rows of its
transition matrix over (write, next state) are orthonormal.
"""
from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Optional

import numpy as np

BLANK = "#"
TOL = 1e-9

_RESERVED = (",", "/")


class MachineError(ValueError):
    """Raised when a machine violates a structural invariant."""


class Direction(enum.Enum):
    LEFT = "L"
    RIGHT = "R"

    @property
    def step(self) -> int:
        return -1 if self is Direction.LEFT else 1

    @property
    def glyph(self) -> str:
        return "←" if self is Direction.LEFT else "→"

    @classmethod
    def parse(cls, token: str) -> "Direction":
        token = token.strip().upper()
        if token in ("L", "LEFT", "←"):
            return cls.LEFT
        if token in ("R", "RIGHT", "→"):
            return cls.RIGHT
        raise ValueError(f"unknown direction {token!r}")

    def __repr__(self):
        return f"Direction.{self.name}"


L = Direction.LEFT
R = Direction.RIGHT


def check_symbol(token: str) -> str:
    if not isinstance(token, str) or not token:
        raise MachineError(f"invalid symbol {token!r}")
    if any(ch.isspace() for ch in token) or any(r in token for r in _RESERVED):
        raise MachineError(f"symbol {token!r} contains reserved characters")
    return token


def check_state_id(name: str) -> str:
    if not isinstance(name, str) or not name:
        raise MachineError(f"invalid state id {name!r}")
    if any(ch.isspace() for ch in name) or "," in name:
        raise MachineError(f"state id {name!r} contains reserved characters")
    return name


@dataclass(frozen=True)
class TransitionRule:
    """delta(source, read, write, target, direction) = amp.

    ``token`` keeps the symbolic spelling of the amplitude (e.g. ``1/sqrt(2)``)
    when the rule was written symbolically; it does not take part in equality.
    """

    source: str
    read: str
    write: str
    target: str
    direction: Direction
    amp: complex = 1.0
    token: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "amp", complex(self.amp))
        if not np.isfinite(self.amp.real) or not np.isfinite(self.amp.imag):
            raise MachineError(f"non-finite amplitude in {self}")
        if self.amp == 0:
            raise MachineError(f"zero-amplitude rule {self.key}")
        if abs(self.amp) ** 2 > 1 + TOL:
            raise MachineError(f"amplitude {self.amp} exceeds unit modulus")

    @property
    def key(self) -> tuple:
        return (self.source, self.read, self.write, self.target)

    def __str__(self):
        return (f"delta({self.source},{self.read},{self.write},{self.target},"
                f"{self.direction.value})={self.token or self.amp}")


@dataclass(frozen=True)
class Machine:
    """An immutable transition table over a one-way infinite tape."""

    name: str
    alphabet: tuple
    states: tuple
    start: str
    final: str
    rules: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "rules", tuple(self.rules))
        for s in self.alphabet:
            check_symbol(s)
        if BLANK not in self.alphabet:
            raise MachineError("alphabet must contain the blank symbol '#'")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise MachineError("duplicate alphabet symbols")
        for q in self.states:
            check_state_id(q)
        if len(set(self.states)) != len(self.states):
            raise MachineError("duplicate state ids")
        known = set(self.states)
        if self.start not in known or self.final not in known:
            raise MachineError("start and final must be members of states")
        if self.start == self.final:
            raise MachineError("start state must differ from final state")
        symbols = set(self.alphabet)
        seen = set()
        for rule in self.rules:
            if rule.source not in known or rule.target not in known:
                raise MachineError(f"rule {rule} references an unknown state")
            if rule.read not in symbols or rule.write not in symbols:
                raise MachineError(f"rule {rule} uses a symbol outside the alphabet")
            if rule.source == self.final:
                raise MachineError(f"final state {self.final} has an outgoing rule")
            if rule.key in seen:
                raise MachineError(f"duplicate rule {rule.key}")
            seen.add(rule.key)
        for (p, sigma), row in self.table.items():
            weight = sum(abs(r.amp) ** 2 for r in row)
            if abs(weight - 1) > TOL:
                raise MachineError(
                    f"squared amplitudes of ({p},{sigma}) sum to {weight}, not 1")

    @cached_property
    def table(self) -> Mapping[tuple, tuple]:
        """(state, read) -> rules, in declaration order."""
        out = defaultdict(list)
        for rule in self.rules:
            out[rule.source, rule.read].append(rule)
        return {k: tuple(v) for k, v in out.items()}

    def rows(self, state: str, read: str) -> tuple:
        return self.table.get((state, read), ())

    def renamed(self, mapping: Mapping[str, str], name: Optional[str] = None) -> "Machine":
        """Return a copy with states renamed through ``mapping`` (missing keys kept)."""
        get = lambda q: mapping.get(q, q)
        rules = [TransitionRule(get(r.source), r.read, r.write, get(r.target),
                                r.direction, r.amp, r.token) for r in self.rules]
        return Machine(name or self.name, self.alphabet, [get(q) for q in self.states],
                       get(self.start), get(self.final), rules)


# -- checkers -----------------------------------------------------------------

@dataclass(frozen=True)
class DirectionCheck:
    ok: bool
    directions: Optional[dict]
    violation: Optional[tuple] = None  # two rules entering one state from opposite sides


@dataclass(frozen=True)
class RotationalCheck:
    ok: Optional[bool]  # None: not applicable (machine is not unidirectional)
    next_state: Optional[dict] = None
    violation: Optional[tuple] = None  # ((p, sigma), rule_a, rule_b)


@dataclass(frozen=True)
class UnitarityCheck:
    ok: Optional[bool]
    deviation: float = 0.0
    rows: Optional[tuple] = None  # worst offending (p, sigma) row pair
    rules: tuple = ()


@dataclass(frozen=True)
class ClassReport:
    unidirectional: DirectionCheck
    rotational: RotationalCheck
    locally_unitary: UnitarityCheck

    @property
    def ok(self) -> bool:
        return bool(self.unidirectional.ok and self.rotational.ok
                    and self.locally_unitary.ok)

    def summary(self) -> dict:
        u, r, lu = self.unidirectional, self.rotational, self.locally_unitary
        out = {
            "unidirectional": u.ok,
            "rotational": r.ok,
            "locally_unitary": lu.ok,
            "unitarity_deviation": lu.deviation,
        }
        if u.ok:
            out["directions"] = {q: d.value for q, d in u.directions.items()}
        else:
            out["direction_violation"] = [str(x) for x in u.violation]
        if r.ok is False:
            (p, sigma), a, b = r.violation
            out["rotational_violation"] = {"state": p, "read": sigma,
                                           "rules": [str(a), str(b)]}
        if lu.ok is False:
            out["unitarity_violation"] = {"rows": [list(x) for x in lu.rows],
                                          "rules": [str(x) for x in lu.rules]}
        return out


def direction_map(m: Machine) -> DirectionCheck:
    directions = {}
    witness = {}
    for rule in m.rules:
        seen = directions.get(rule.target)
        if seen is None:
            directions[rule.target] = rule.direction
            witness[rule.target] = rule
        elif seen is not rule.direction:
            return DirectionCheck(False, None, (witness[rule.target], rule))
    return DirectionCheck(True, directions)


def check_rotational(m: Machine, directions: Optional[DirectionCheck] = None) -> RotationalCheck:
    directions = directions or direction_map(m)
    if not directions.ok:
        return RotationalCheck(None)
    nxt = {}
    for key, row in m.table.items():
        first = row[0]
        for rule in row[1:]:
            if rule.target != first.target:
                return RotationalCheck(False, None, (key, first, rule))
        nxt[key] = first.target
    return RotationalCheck(True, nxt)


def transition_matrix(m: Machine):
    """Rows indexed by (p, sigma), columns by (tau, q)."""
    rows = list(m.table)
    cols = sorted({(r.write, r.target) for r in m.rules})
    col_index = {c: i for i, c in enumerate(cols)}
    a = np.zeros((len(rows), len(cols)), dtype=complex)
    for i, key in enumerate(rows):
        for rule in m.table[key]:
            a[i, col_index[rule.write, rule.target]] += rule.amp
    return a, rows, cols


def check_local_unitarity(m: Machine, directions: Optional[DirectionCheck] = None,
                          tol: float = TOL) -> UnitarityCheck:
    directions = directions or direction_map(m)
    if not directions.ok:
        return UnitarityCheck(None)
    a, rows, _ = transition_matrix(m)
    if not rows:
        return UnitarityCheck(True)
    dev = np.abs(a @ a.conj().T - np.eye(len(rows)))
    i, j = np.unravel_index(np.argmax(dev), dev.shape)
    worst = float(dev[i, j])
    if worst <= tol:
        return UnitarityCheck(True, worst)
    pair = (rows[i], rows[j])
    cited = m.table[rows[i]] + (m.table[rows[j]] if i != j else ())
    return UnitarityCheck(False, worst, pair, cited)


def classify(m: Machine) -> ClassReport:
    d = direction_map(m)
    return ClassReport(d, check_rotational(m, d), check_local_unitarity(m, d))


def rebuild_from_rotational(m: Machine) -> dict:
    """Rebuild delta as delta(p, sigma, tau, q(p, sigma), d(q)) from the factored maps."""
    d = direction_map(m)
    r = check_rotational(m, d)
    if not r.ok:
        raise MachineError("machine is not rotational")
    return {(rule.source, rule.read, rule.write, r.next_state[rule.source, rule.read],
             d.directions[r.next_state[rule.source, rule.read]]): rule.amp
            for rule in m.rules}


def make_rules(entries: Iterable[tuple]) -> list:
    """Build rules from (p, sigma, tau, q, d, amp[, token]) tuples."""
    out = []
    for e in entries:
        p, sigma, tau, q, d, amp, *rest = e
        if isinstance(d, str):
            d = Direction.parse(d)
        out.append(TransitionRule(p, sigma, tau, q, d, amp, rest[0] if rest else None))
    return out
