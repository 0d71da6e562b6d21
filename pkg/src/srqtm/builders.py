"""Gate machines and sequential composition.

Every gate machine is a walk over the tape: the head leaves cell 0, records
which controls read ``1`` in its internal state, applies the gate payload on
the target cell and returns to cell 0, erasing what it recorded. Controls are
tracked as the position of the first control that read ``0`` (``None`` while
all controls so far read ``1``), which can be erased on the way back.

When every control lies left of the target the walk is one round trip
(``2 * t`` steps). When some control lies right of the target the head
reads those controls on a leftward pass, applies the gate, erases them on a
second rightward pass and then walks home (``4 * R - 2 * t`` steps, ``R``
the rightmost control).

States are numbered ``q0, q1, ...`` in breadth-first discovery order (read
symbols in alphabet order), so the Hadamard, CNOT and Toffoli machines come
out with the same state names as the hand-built tables.
"""
from __future__ import annotations

import cmath
import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import BLANK, Direction, Machine, TransitionRule, classify
from .qstd import parse_amplitude

ALPHABET = (BLANK, "0", "1")
DATA = ("0", "1")
PRUNE = 1e-12


class BuilderError(ValueError):
    pass


class EmptyProgram(BuilderError):
    pass


class AlphabetMismatch(BuilderError):
    pass


@dataclass(frozen=True)
class PrimitiveGate:
    """Single-cell payload: ``h``, ``x``, ``ry``/``rz`` by ``sign * pi / 2**k``, or ``phase``."""

    kind: str
    sign: int = 1
    k: int = 0
    theta: float = 0.0

    def __post_init__(self):
        if self.kind not in ("h", "x", "ry", "rz", "phase"):
            raise BuilderError(f"unknown gate kind {self.kind!r}")
        if self.kind in ("ry", "rz"):
            if self.sign not in (1, -1) or self.k < 0:
                raise BuilderError("rotation needs sign +1/-1 and k >= 0")
        if self.kind == "phase":
            object.__setattr__(self, "theta", float(self.theta) % (2 * math.pi))

    @property
    def angle(self) -> float:
        if self.kind in ("ry", "rz"):
            return self.sign * math.pi / 2 ** self.k
        return self.theta

    def __str__(self):
        if self.kind in ("ry", "rz"):
            return f"{self.kind}({'+' if self.sign > 0 else '-'}pi/2^{self.k})"
        if self.kind == "phase":
            return f"phase({self.theta!r})"
        return self.kind

    def matrix(self) -> np.ndarray:
        return gate_matrix(self)

    def entries(self) -> list:
        """(read, write, amplitude token) triples, amplitude = U[write, read]."""
        half = self.k + 1
        if self.kind == "h":
            r = "1/sqrt(2)"
            return [("0", "0", r), ("0", "1", r), ("1", "0", r), ("1", "1", "-" + r)]
        if self.kind == "x":
            return [("0", "1", "1"), ("1", "0", "1")]
        if self.kind == "ry":
            c, s = f"cos(pi/2^{half})", f"sin(pi/2^{half})"
            pos, neg = (s, "-" + s) if self.sign > 0 else ("-" + s, s)
            return [("0", "0", c), ("0", "1", pos), ("1", "0", neg), ("1", "1", c)]
        if self.kind == "rz":
            lo = f"exp({'-' if self.sign > 0 else ''}i*pi/2^{half})"
            hi = f"exp({'' if self.sign > 0 else '-'}i*pi/2^{half})"
            return [("0", "0", lo), ("1", "1", hi)]
        return [("0", "0", "1"), ("1", "1", _phase_token(self.theta))]


def _phase_token(theta: float) -> str:
    if theta == 0:
        return "1"
    for j in range(64):
        if theta == math.pi / 2 ** j:
            return f"exp(i*pi/2^{j})"
    from .qstd import format_amplitude
    return format_amplitude(cmath.exp(1j * theta))


def H() -> PrimitiveGate:
    return PrimitiveGate("h")


def X() -> PrimitiveGate:
    return PrimitiveGate("x")


def Ry(sign: int, k: int) -> PrimitiveGate:
    return PrimitiveGate("ry", sign, k)


def Rz(sign: int, k: int) -> PrimitiveGate:
    return PrimitiveGate("rz", sign, k)


def Phase(theta: float) -> PrimitiveGate:
    return PrimitiveGate("phase", theta=theta)


def gate_matrix(g: PrimitiveGate) -> np.ndarray:
    """2x2 matrix; Ry(a) = [[cos a/2, -sin a/2], [sin a/2, cos a/2]], Rz(a) = diag(e^-ia/2, e^ia/2)."""
    if g.kind == "h":
        return np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
    if g.kind == "x":
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if g.kind == "ry":
        a = g.angle / 2
        return np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]], dtype=complex)
    if g.kind == "rz":
        a = g.angle / 2
        return np.diag([cmath.exp(-1j * a), cmath.exp(1j * a)])
    return np.diag([1, cmath.exp(1j * g.theta)])


# -- the walk -----------------------------------------------------------------

_START, _FINAL = ("start",), ("final",)


def walk_steps(controls: Sequence[int], target: int) -> int:
    """Step count of the walk machine for these cells."""
    right = [c for c in controls if c > target]
    if not right:
        return 2 * target
    return 4 * max(right) - 2 * target


def _check_cells(cells):
    for c in cells:
        if not isinstance(c, (int, np.integer)) or c < 1:
            raise BuilderError(f"cell index {c!r} must be an integer >= 1")
    if len(set(cells)) != len(cells):
        raise BuilderError(f"cells {list(cells)} are not pairwise distinct")


def _walk(controls: Sequence[int], target: int, gate: PrimitiveGate, name: str) -> Machine:
    controls = [int(c) for c in controls]
    target = int(target)
    _check_cells(controls + [target])
    if not isinstance(gate, PrimitiveGate):
        raise BuilderError(f"invalid gate {gate!r}")
    ctrl = set(controls)
    right = max((c for c in controls if c > target), default=None)
    payload = gate.entries()

    def left_to(cell, *status):
        return _FINAL if cell == 0 else ("p4", cell) + status

    def moves(key):
        """Yield (read, write, next key, direction, token) for one state."""
        L, R = Direction.LEFT, Direction.RIGHT
        if key == _START:
            yield BLANK, BLANK, ("p1", 1, None), R, "1"
            return
        phase, cell = key[0], key[1]
        if phase == "p1":
            f1 = key[2]
            if right is None and cell == target:
                for sigma, tau, tok in (payload if f1 is None else _identity()):
                    yield sigma, tau, left_to(cell - 1, f1), L, tok
            elif right is not None and cell == right:
                for sigma, f2 in (("0", right), ("1", None)):
                    yield sigma, sigma, ("p2", cell - 1, f1, f2), L, "1"
            elif cell in ctrl and cell < target and f1 is None:
                yield "0", "0", ("p1", cell + 1, cell), R, "1"
                yield "1", "1", ("p1", cell + 1, None), R, "1"
            else:
                for sigma in DATA:
                    yield sigma, sigma, ("p1", cell + 1, f1), R, "1"
        elif phase == "p2":
            f1, f2 = key[2], key[3]
            if cell == target:
                alive = f1 is None and f2 is None
                for sigma, tau, tok in (payload if alive else _identity()):
                    yield sigma, tau, ("p3", cell + 1, f1, f2), R, tok
            elif cell in ctrl and f2 is None:
                yield "0", "0", ("p2", cell - 1, f1, cell), L, "1"
                yield "1", "1", ("p2", cell - 1, f1, None), L, "1"
            else:
                for sigma in DATA:
                    yield sigma, sigma, ("p2", cell - 1, f1, f2), L, "1"
        elif phase == "p3":
            f1, f2 = key[2], key[3]
            nxt = (lambda g: ("p4", cell - 1, f1) if cell == right
                   else ("p3", cell + 1, f1, g))
            if cell in ctrl and (f2 is None or f2 == cell):
                sigma = "1" if f2 is None else "0"
                yield sigma, sigma, nxt(None), Direction.LEFT if cell == right else R, "1"
            else:
                for sigma in DATA:
                    yield sigma, sigma, nxt(f2), R, "1"
        elif phase == "p4":
            f1 = key[2]
            if cell in ctrl and cell < target and (f1 is None or f1 == cell):
                sigma = "1" if f1 is None else "0"
                yield sigma, sigma, left_to(cell - 1, None), L, "1"
            else:
                for sigma in DATA:
                    yield sigma, sigma, left_to(cell - 1, f1), L, "1"

    names = {_START: "q0"}
    order = deque([_START])
    rules = []
    while order:
        key = order.popleft()
        for sigma, tau, nxt, d, tok in moves(key):
            if nxt not in names:
                names[nxt] = "qf" if nxt == _FINAL else f"q{len(names) - (_FINAL in names)}"
                if nxt != _FINAL:
                    order.append(nxt)
            amp = parse_amplitude(tok)
            if abs(amp) < PRUNE:
                continue
            rules.append(TransitionRule(names[key], sigma, tau, names[nxt], d, amp, tok))
    states = [q for k, q in names.items() if k != _FINAL] + ["qf"]
    return Machine(name, ALPHABET, states, "q0", "qf", rules)


def _identity():
    return [(s, s, "1") for s in DATA]


# -- public constructors ------------------------------------------------------

def rotation_machine(i: int, gate: PrimitiveGate) -> Machine:
    """Apply ``gate`` to cell ``i``; ``2 * i + 1`` states, ``2 * i`` steps."""
    return _walk([], i, gate, f"{gate}@{i}")


def identity_machine() -> Machine:
    """Two-step walk to cell 1 and back; the neutral element of :func:`dovetail`."""
    return _walk([], 1, Phase(0.0), "identity")


def cnot_machine(c: int, t: int) -> Machine:
    if c == t:
        raise BuilderError("control and target must differ")
    return _walk([c], t, X(), f"cnot({c},{t})")


def toffoli_machine(c1: int, c2: int, t: int) -> Machine:
    return _walk([c1, c2], t, X(), f"toffoli({c1},{c2},{t})")


def controlled_machine(controls: Sequence[int], t: int, gate: PrimitiveGate) -> Machine:
    """Apply ``gate`` to cell ``t`` when every control cell reads ``1``."""
    controls = list(controls)
    if not controls:
        raise BuilderError("controlled_machine needs at least one control")
    label = ",".join(str(c) for c in controls)
    return _walk(controls, t, gate, f"mc{gate}({label};{t})")


def dovetail(m1: Machine, m2: Machine, cells: Optional[int] = None) -> Machine:
    """Run ``m1`` then ``m2``: the final state of ``m1`` becomes the start of ``m2``."""
    return dovetail_all([m1, m2], cells=cells)


def dovetail_all(machines: Iterable[Machine], cells: Optional[int] = None,
                 name: Optional[str] = None, check: bool = True) -> Machine:
    machines = list(machines)
    if not machines:
        raise EmptyProgram("nothing to dovetail")
    alphabet = set(machines[0].alphabet)
    for m in machines:
        if set(m.alphabet) != alphabet:
            raise AlphabetMismatch(f"{m.name} has alphabet {m.alphabet}")
        if check:
            report = classify(m)
            if not report.ok:
                raise BuilderError(f"{m.name} is not unidirectional, rotational "
                                   f"and locally unitary")
            if cells is not None:
                from .sim import SimulationError, check_sr
                try:
                    sr_ok = check_sr(m, cells).ok
                except SimulationError as exc:
                    raise BuilderError(f"{m.name} cannot run on {cells} cells: {exc}") from exc
                if not sr_ok:
                    raise BuilderError(f"{m.name} fails the runtime SR check")
    states, rules = [], []
    start = glue = None
    for idx, m in enumerate(machines):
        mapping = {q: f"g{idx}.{q}" for q in m.states}
        if glue is not None:
            # the previous final state doubles as this machine's start
            mapping[m.start] = glue
        renamed = m.renamed(mapping)
        states.extend(q for q in renamed.states if q != glue)
        rules.extend(renamed.rules)
        start = start or renamed.start
        glue = renamed.final
    label = name or " ; ".join(m.name for m in machines)
    return Machine(label, machines[0].alphabet, states, start, glue, rules)
