"""Circuit representation and compilation of circuits to machines.

Wires are numbered from 1 and wire ``w`` lives on tape cell ``w``. In every
matrix, wire 1 is the most significant bit of the basis index.

``.qcirc`` text format, one gate per line, ``#`` starts a comment::

    qubits 3
    h 2
    ry + 3 1          # Ry(+pi/2^3) on wire 1
    rz* 0.7 3         # free angle, lowered before compilation
    cnot 1 2
    mcx 1 2 ; 3
    mcry - 2 1 3 ; 2
"""
from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .builders import (BuilderError, PrimitiveGate, Phase, Ry, Rz, H, X, cnot_machine,
                       controlled_machine, dovetail_all, gate_matrix, identity_machine,
                       rotation_machine, walk_steps)
from .core import Machine

MAX_DENSE = 10


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class Precision:
    m: int

    def __post_init__(self):
        if int(self.m) < 1:
            raise CircuitError("precision needs m >= 1")

    @property
    def bound(self) -> float:
        return math.pi / 2 ** self.m


@dataclass(frozen=True)
class Gate:
    """``kind`` is ``prim``, ``ryfree``, ``rzfree``, ``cnot`` or ``mcu``.

    ``wires`` lists the controls first and the target last.
    """

    kind: str
    wires: tuple
    prim: Optional[PrimitiveGate] = None
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "wires", tuple(int(w) for w in self.wires))
        if len(set(self.wires)) != len(self.wires):
            raise CircuitError(f"gate wires {self.wires} are not distinct")
        if any(w < 1 for w in self.wires):
            raise CircuitError("wires are numbered from 1")
        if self.kind in ("ryfree", "rzfree"):
            object.__setattr__(self, "theta", float(self.theta) % (2 * math.pi))

    @property
    def target(self) -> int:
        return self.wires[-1]

    @property
    def controls(self) -> tuple:
        return self.wires[:-1]

    def matrix(self) -> np.ndarray:
        """2x2 payload applied to the target."""
        if self.kind == "ryfree":
            return gate_matrix_angle("ry", self.theta)
        if self.kind == "rzfree":
            return gate_matrix_angle("rz", self.theta)
        if self.kind == "cnot":
            return gate_matrix(X())
        return gate_matrix(self.prim)


def gate_matrix_angle(axis: str, theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    if axis == "ry":
        return np.array([[c, -s], [s, c]], dtype=complex)
    return np.diag([complex(c, -s), complex(c, s)])


def prim(g: PrimitiveGate, wire: int) -> Gate:
    return Gate("prim", (wire,), g)


def ry_free(theta: float, wire: int) -> Gate:
    return Gate("ryfree", (wire,), theta=theta)


def rz_free(theta: float, wire: int) -> Gate:
    return Gate("rzfree", (wire,), theta=theta)


def cnot(c: int, t: int) -> Gate:
    return Gate("cnot", (c, t))


def mcu(controls: Sequence[int], t: int, g: PrimitiveGate) -> Gate:
    if not controls:
        raise CircuitError("mcu needs at least one control")
    return Gate("mcu", tuple(controls) + (t,), g)


@dataclass(frozen=True)
class Circuit:
    n: int
    gates: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.n < 1:
            raise CircuitError("a circuit needs at least one wire")
        for g in self.gates:
            if max(g.wires) > self.n:
                raise CircuitError(f"gate on wires {g.wires} exceeds {self.n} wires")

    def __len__(self):
        return len(self.gates)


# -- angles -------------------------------------------------------------------

def _naf(value: int) -> list:
    """Non-adjacent form: (position, digit) pairs with digit in {-1, 1}."""
    out, pos = [], 0
    while value:
        if value & 1:
            digit = 2 - (value % 4)
            value -= digit
            out.append((pos, digit))
        value //= 2
        pos += 1
    return out


def approx_angle(theta: float, p: Precision) -> list:
    """Signed dyadic terms ``(sign, k)`` whose sum of ``sign * pi / 2**k`` is
    within ``pi / 2**m`` of ``theta`` modulo ``2 pi``; at most ``m`` terms, ``k <= m``."""
    m = int(p.m)
    x = math.remainder(float(theta), 2 * math.pi) / math.pi  # in [-1, 1]
    q = round(x * 2 ** m)
    return [(digit, m - pos) for pos, digit in reversed(_naf(q))]


def terms_angle(terms: Iterable[tuple]) -> float:
    return sum(s * math.pi / 2 ** k for s, k in terms)


def exact_terms(numerator: int, exponent: int, period_pi: int = 4) -> list:
    """Terms for the angle ``pi * numerator / 2**exponent`` (k >= 0).

    The angle is first reduced modulo ``period_pi * pi``; a residual whole
    multiple of ``2 pi`` is spelt as two ``pi`` terms.
    """
    mod = period_pi * 2 ** exponent
    half = mod // 2
    v = numerator % mod
    if v > half:
        v -= mod
    out = []
    for pos, digit in reversed(_naf(v)):
        k = exponent - pos
        if k >= 0:
            out.append((digit, k))
        else:
            out.extend([(digit, 0)] * 2 ** (-k))
    return out


# -- lowering -----------------------------------------------------------------

def lower(c: Circuit, p: Precision) -> Circuit:
    out = []
    for g in c.gates:
        if g.kind in ("ryfree", "rzfree"):
            make = Ry if g.kind == "ryfree" else Rz
            out.extend(prim(make(s, k), g.target) for s, k in approx_angle(g.theta, p))
        else:
            out.append(g)
    return Circuit(c.n, out)


def lowering_bound(c: Circuit, p: Precision) -> float:
    return sum(g.kind in ("ryfree", "rzfree") for g in c.gates) * p.bound


# -- compilation --------------------------------------------------------------

def gate_machine(g: Gate) -> Machine:
    if g.kind == "prim":
        return rotation_machine(g.target, g.prim)
    if g.kind == "cnot":
        return cnot_machine(*g.wires)
    if g.kind == "mcu":
        return controlled_machine(g.controls, g.target, g.prim)
    raise CircuitError(f"gate kind {g.kind!r} must be lowered first")


def gate_steps(g: Gate) -> int:
    return walk_steps(g.controls, g.target)


def compile_circuit(c: Circuit, p: Precision = Precision(12), name: Optional[str] = None) -> Machine:
    """Lower, build one machine per gate and dovetail them in circuit order.

    A gate-free circuit compiles to the two-step identity walk.
    """
    low = lower(c, p)
    if not low.gates:
        return identity_machine()
    machines = [gate_machine(g) for g in low.gates]
    return dovetail_all(machines, name=name or f"circuit[{len(low.gates)}]", check=False)


compile = compile_circuit


def compiled_steps(c: Circuit, p: Precision = Precision(12)) -> int:
    low = lower(c, p)
    return sum(gate_steps(g) for g in low.gates) if low.gates else 2


# -- dense reference ----------------------------------------------------------

def apply_gate(state: np.ndarray, g: Gate, n: int) -> np.ndarray:
    """Apply ``g`` to a tensor of shape (2,)*n + rest (axis w-1 is wire w)."""
    u = g.matrix()
    idx = [slice(None)] * state.ndim
    for w in g.controls:
        idx[w - 1] = 1
    sub = state[tuple(idx)]
    # the target axis shifts left by the number of fixed control axes before it
    axis = (g.target - 1) - sum(1 for w in g.controls if w < g.target)
    moved = np.moveaxis(sub, axis, 0)
    shape = moved.shape
    applied = (u @ moved.reshape(2, -1)).reshape(shape)
    out = state.copy()
    out[tuple(idx)] = np.moveaxis(applied, 0, axis)
    return out


def circuit_unitary(c: Circuit) -> np.ndarray:
    if c.n > MAX_DENSE:
        raise CircuitError(f"dense unitary limited to {MAX_DENSE} wires")
    dim = 2 ** c.n
    u = np.eye(dim, dtype=complex).reshape((2,) * c.n + (dim,))
    for g in c.gates:
        u = apply_gate(u, g, c.n)
    return u.reshape(dim, dim)


# -- .qcirc -------------------------------------------------------------------

_SIMPLE = {"h": H, "x": X}
_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}


def parse_angle(text: str) -> float:
    """Float literal or arithmetic over numbers and ``pi`` (e.g. ``3*pi/8``)."""
    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        raise ValueError(f"unsupported angle expression {text!r}")
    try:
        return ev(ast.parse(text.strip(), mode="eval"))
    except SyntaxError:
        raise ValueError(f"malformed angle {text!r}") from None


def _sign(tok):
    if tok not in ("+", "-"):
        raise ValueError(f"expected sign '+' or '-', got {tok!r}")
    return 1 if tok == "+" else -1


def _payload(kind: str, args: list):
    """Parse a single-wire payload; returns (gate, remaining args)."""
    if kind in _SIMPLE:
        return _SIMPLE[kind](), args
    if kind in ("ry", "rz"):
        make = Ry if kind == "ry" else Rz
        return make(_sign(args[0]), int(args[1])), args[2:]
    if kind == "phase":
        return Phase(parse_angle(args[0])), args[1:]
    raise ValueError(f"unknown gate {kind!r}")


def parse_gate(line: str) -> Gate:
    """Parse one gate line of the ``.qcirc`` format."""
    head, *args = line.split()
    head = head.lower()
    if head == "cnot":
        return cnot(int(args[0]), int(args[1]))
    if head in ("ry*", "rz*"):
        make = ry_free if head == "ry*" else rz_free
        return make(parse_angle(args[0]), int(args[1]))
    if head == "toffoli":
        return mcu([int(args[0]), int(args[1])], int(args[2]), X())
    if head.startswith("mc"):
        if ";" not in args:
            raise ValueError("multi-controlled gate needs '<controls> ; <target>'")
        cut = args.index(";")
        g, rest = _payload(head[2:], args[:cut])
        if len(args[cut + 1:]) != 1:
            raise ValueError("exactly one target after ';'")
        return mcu([int(w) for w in rest], int(args[cut + 1]), g)
    g, rest = _payload(head, args)
    if len(rest) != 1:
        raise ValueError(f"expected one wire in {line!r}")
    return prim(g, int(rest[0]))


def parse_circuit(text: str) -> Circuit:
    n = None
    gates = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            if line.lower().startswith("qubits"):
                n = int(line.split()[1])
                continue
            gates.append(parse_gate(line))
        except (ValueError, IndexError, BuilderError, CircuitError) as exc:
            raise CircuitError(f"line {lineno}: {exc}") from None
    if n is None:
        raise CircuitError("missing 'qubits <n>' header")
    return Circuit(n, gates)


def _payload_text(g: PrimitiveGate) -> str:
    if g.kind in ("ry", "rz"):
        return f"{g.kind} {'+' if g.sign > 0 else '-'} {g.k}"
    if g.kind == "phase":
        return f"phase {g.theta!r}"
    return g.kind


def format_gate(g: Gate) -> str:
    if g.kind == "cnot":
        return f"cnot {g.wires[0]} {g.wires[1]}"
    if g.kind in ("ryfree", "rzfree"):
        return f"{g.kind[:2]}* {g.theta!r} {g.target}"
    if g.kind == "mcu":
        controls = " ".join(str(w) for w in g.controls)
        return f"mc{_payload_text(g.prim)} {controls} ; {g.target}"
    return f"{_payload_text(g.prim)} {g.target}"


def emit_circuit(c: Circuit) -> str:
    return "\n".join([f"qubits {c.n}"] + [format_gate(g) for g in c.gates]) + "\n"
