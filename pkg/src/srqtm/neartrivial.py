"""Near-trivial transformations: a single diagonal phase or a single real
rotation between two basis vectors.

Conventions
-----------
* ``Rotation(j, k, theta)`` maps ``e_j -> cos(theta) e_j + sin(theta) e_k`` and
  ``e_k -> -sin(theta) e_j + cos(theta) e_k``.
* A factor list ``[f0, f1, ...]`` is in application order: the product is
  ``matrix(f[-1]) @ ... @ matrix(f[0])``.
* The universal machine reads data on cells ``1..n``, the kind/dimension code
  ``e`` (``1 + 2n`` bits: kind, then ``j`` and ``k`` most significant bit
  first) next, and the angle code ``r`` (``m`` bits, ``theta = 2 pi 0.r1 r2...``)
  last.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .builders import Phase, Ry, X
from .compiler import Circuit, Precision, compile_circuit, exact_terms, mcu, prim
from .core import Machine

TWO_PI = 2 * math.pi


class NotUnitary(ValueError):
    pass


class EncodingError(ValueError):
    pass


@dataclass(frozen=True)
class NearTrivial:
    dim: int
    kind: str  # "phase" or "rotation"
    j: int
    k: int = 0
    theta: float = 0.0

    def __post_init__(self):
        if self.dim < 2 or self.dim & (self.dim - 1):
            raise ValueError(f"dimension {self.dim} is not a power of two")
        if self.kind not in ("phase", "rotation"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if not 0 <= self.j < self.dim or not 0 <= self.k < self.dim:
            raise ValueError("index out of range")
        if self.kind == "rotation" and self.j == self.k:
            raise ValueError("rotation needs two distinct dimensions")
        if not 0 <= self.theta <= TWO_PI:
            raise ValueError("theta must lie in [0, 2 pi]")

    @property
    def n(self) -> int:
        return self.dim.bit_length() - 1

    def matrix(self) -> np.ndarray:
        return matrix(self)

    def inverse(self) -> "NearTrivial":
        return NearTrivial(self.dim, self.kind, self.j, self.k, _wrap(-self.theta))

    def __str__(self):
        if self.kind == "phase":
            return f"phase {self.dim} {self.j} {self.theta!r}"
        return f"rot {self.dim} {self.j} {self.k} {self.theta!r}"


def phase(dim, j, theta) -> NearTrivial:
    return NearTrivial(dim, "phase", j, 0, _wrap(theta))


def rotation(dim, j, k, theta) -> NearTrivial:
    return NearTrivial(dim, "rotation", j, k, _wrap(theta))


def _wrap(theta: float) -> float:
    t = math.fmod(theta, TWO_PI)
    return t + TWO_PI if t < 0 else t


def matrix(nt: NearTrivial) -> np.ndarray:
    m = np.eye(nt.dim, dtype=complex)
    if nt.kind == "phase":
        m[nt.j, nt.j] = np.exp(1j * nt.theta)
    else:
        c, s = math.cos(nt.theta), math.sin(nt.theta)
        m[nt.j, nt.j] = c
        m[nt.k, nt.j] = s
        m[nt.j, nt.k] = -s
        m[nt.k, nt.k] = c
    return m


def product(factors: Sequence[NearTrivial], dim: int) -> np.ndarray:
    out = np.eye(dim, dtype=complex)
    for f in factors:
        out = matrix(f) @ out
    return out


# -- decomposition ------------------------------------------------------------

def decompose_unitary(u, tol: float = 1e-9) -> list:
    """Factor a unitary into near-trivial transformations (application order).

    Columns are cleared left to right with real rotations, each preceded by
    a phase on the eliminated row when the two entries are not already in
    phase; the leftover diagonal is removed with phases.
    """
    u = np.array(u, dtype=complex)
    dim = u.shape[0]
    if u.shape != (dim, dim):
        raise NotUnitary("matrix must be square")
    if np.abs(u.conj().T @ u - np.eye(dim)).max() > tol:
        raise NotUnitary("matrix is not unitary within tolerance")
    if dim < 2 or dim & (dim - 1):
        raise NotUnitary(f"dimension {dim} is not a power of two")
    work = u.copy()
    applied = []  # ops G with G @ ... @ U reducing U towards identity

    def apply(nt):
        nonlocal work
        work = matrix(nt) @ work
        applied.append(nt)

    tiny = 1e-15
    for c in range(dim - 1):
        for r in range(c + 1, dim):
            a, b = work[c, c], work[r, c]
            if abs(b) <= tiny:
                continue
            if abs(a.imag) <= tiny and abs(b.imag) <= tiny:
                gamma = 0.0
            else:
                gamma = np.angle(a) if abs(a) > tiny else np.angle(b)
            rb = b * np.exp(-1j * gamma)
            if abs(rb.imag) > tiny:
                apply(phase(dim, r, gamma - np.angle(b)))
                rb = abs(b)
            ra = (a * np.exp(-1j * gamma)).real
            # rotate (ra, rb) onto the pivot: inverse of rotation by atan2(rb, ra)
            apply(rotation(dim, c, r, -math.atan2(rb.real, ra)))
    for j in range(dim):
        angle = np.angle(work[j, j])
        if abs(angle) > tiny:
            apply(phase(dim, j, -angle))
    # work is now the identity: U = inv(G_1) ... inv(G_K), applied last-to-first
    return [nt.inverse() for nt in reversed(applied)]


# -- encoding -----------------------------------------------------------------

@dataclass(frozen=True)
class NtEncoding:
    e: str
    r: str

    @property
    def bits(self) -> str:
        return self.e + self.r


def quantize(theta: float, m: int) -> int:
    """Nearest m-bit fraction of 2 pi (ties round down), as an integer mod 2^m."""
    x = _wrap(theta) / TWO_PI * 2 ** m
    q = math.floor(x)
    if x - q > 0.5:
        q += 1
    return q % 2 ** m


def encode(nt: NearTrivial, n: int, m: int) -> NtEncoding:
    if nt.dim != 2 ** n:
        raise EncodingError(f"dimension {nt.dim} does not match n={n}")
    kind = "1" if nt.kind == "rotation" else "0"
    k = nt.k if nt.kind == "rotation" else 0
    e = kind + format(nt.j, f"0{n}b") + format(k, f"0{n}b")
    return NtEncoding(e, format(quantize(nt.theta, m), f"0{m}b"))


def decode(enc: NtEncoding, n: int, m: int) -> NearTrivial:
    if len(enc.e) != 2 * n + 1 or len(enc.r) != m:
        raise EncodingError(f"encoding widths {len(enc.e)}/{len(enc.r)} do not match "
                            f"n={n}, m={m}")
    if set(enc.e + enc.r) - {"0", "1"}:
        raise EncodingError("encodings are bit strings")
    j, k = int(enc.e[1:1 + n], 2), int(enc.e[1 + n:], 2)
    theta = TWO_PI * int(enc.r, 2) / 2 ** m
    if enc.e[0] == "0":
        if k:
            raise EncodingError("phase encodings carry an all-zero k field")
        return NearTrivial(2 ** n, "phase", j, 0, theta)
    if j == k:
        raise EncodingError("rotation encodings need j != k")
    return NearTrivial(2 ** n, "rotation", j, k, theta)


def valid_encodings(n: int, m: int):
    for e_bits in itertools.product("01", repeat=2 * n + 1):
        for r_bits in itertools.product("01", repeat=m):
            enc = NtEncoding("".join(e_bits), "".join(r_bits))
            try:
                decode(enc, n, m)
            except EncodingError:
                continue
            yield enc


# -- synthesis ----------------------------------------------------------------

def _bit(index: int, wire: int, n: int) -> int:
    return (index >> (n - wire)) & 1


def gray_path(j: int, k: int, n: int) -> list:
    """Indices from ``j`` to ``k`` flipping one differing bit at a time (wire order)."""
    path = [j]
    cur = j
    for w in range(1, n + 1):
        if _bit(cur, w, n) != _bit(k, w, n):
            cur ^= 1 << (n - w)
            path.append(cur)
    return path


def _pinned(gates, pattern: dict, body):
    """Wrap ``body`` gates so controls pinned to 0 see 1: X on those wires."""
    flips = [prim(X(), w) for w, v in sorted(pattern.items()) if v == 0]
    return flips + list(body) + flips


def _controlled(controls: dict, target: int, payload) -> list:
    """Gates applying ``payload`` (a PrimitiveGate) to ``target`` when every
    wire in ``controls`` holds its pinned value."""
    if not controls:
        return [prim(payload, target)]
    return _pinned(None, controls, [mcu(sorted(controls), target, payload)])


def _transposition(a: int, b: int, n: int, extra: Optional[dict] = None) -> list:
    """Swap basis states ``a`` and ``b`` (differing in one bit)."""
    diff = a ^ b
    wire = n - diff.bit_length() + 1
    pattern = {w: _bit(a, w, n) for w in range(1, n + 1) if w != wire}
    pattern.update(extra or {})
    return _controlled(pattern, wire, X())


def _rotation_terms(q: int, m: int) -> list:
    """Ry terms for the block rotation by theta = 2 pi q / 2^m (Ry angle 2 theta)."""
    return exact_terms(4 * q, m)


def _synthesize_quantized(nt: NearTrivial, q: int, m: int, n: int,
                          extra: Optional[dict] = None) -> list:
    """Gates for ``nt`` with angle 2 pi q / 2^m, additionally controlled by ``extra``."""
    extra = dict(extra or {})
    if q == 0:
        return []
    if nt.kind == "phase":
        theta = TWO_PI * q / 2 ** m
        pattern = {w: _bit(nt.j, w, n) for w in range(1, n)}
        target_bit = _bit(nt.j, n, n)
        pattern.update(extra)
        body = _controlled(pattern, n, Phase(theta))
        if target_bit == 0:
            body = [prim(X(), n)] + body + [prim(X(), n)]
        return body
    path = gray_path(nt.j, nt.k, n)
    swaps = []
    for a, b in zip(path[:-2], path[1:-1]):
        swaps.extend(_transposition(a, b, n, extra))
    a, k = path[-2], path[-1]
    diff = a ^ k
    wire = n - diff.bit_length() + 1
    pattern = {w: _bit(a, w, n) for w in range(1, n + 1) if w != wire}
    pattern.update(extra)
    sign = 1 if _bit(a, wire, n) == 0 else -1
    core = []
    for s, kk in _rotation_terms(q, m):
        core.extend(_controlled(pattern, wire, Ry(sign * s, kk)))
    return swaps + _cancel_flips(core) + swaps[::-1]


def _cancel_flips(gates: list) -> list:
    """Drop adjacent identical X pairs (left by consecutive pinned blocks)."""
    out = []
    for g in gates:
        if (out and g.kind == "prim" and g.prim.kind == "x"
                and out[-1].kind == "prim" and out[-1].prim.kind == "x"
                and out[-1].wires == g.wires):
            out.pop()
        else:
            out.append(g)
    return out


def synthesize(nt: NearTrivial, p: Precision) -> Circuit:
    """Circuit over ``n`` wires implementing ``nt`` with its angle quantized to m bits."""
    n, m = nt.n, int(p.m)
    return Circuit(n, _cancel_flips(_synthesize_quantized(nt, quantize(nt.theta, m), m, n)))


# -- universal machine --------------------------------------------------------

def universal_layout(n: int, m: int) -> dict:
    e0 = n + 1
    return {
        "data": list(range(1, n + 1)),
        "kind": e0,
        "j": list(range(e0 + 1, e0 + 1 + n)),
        "k": list(range(e0 + 1 + n, e0 + 1 + 2 * n)),
        "r": list(range(e0 + 1 + 2 * n, e0 + 1 + 2 * n + m)),
    }


def universal_circuit(n: int, p: Precision) -> Circuit:
    """Circuit on data + encoding wires applying decode(e, r) to the data wires.

    For every valid dimension pattern and every angle bit ``t`` one block
    applies the near-trivial transformation with angle ``2 pi / 2^t``,
    controlled by the pattern's encoding bits and by ``r_t``.
    """
    m = int(p.m)
    lay = universal_layout(n, m)
    dim = 2 ** n
    total = n + 2 * n + 1 + m
    gates = []

    def code(kind, j, k):
        bits = {lay["kind"]: kind}
        bits.update({w: _bit(j, i + 1, n) for i, w in enumerate(lay["j"])})
        bits.update({w: _bit(k, i + 1, n) for i, w in enumerate(lay["k"])})
        return bits

    shapes = [NearTrivial(dim, "phase", j) for j in range(dim)]
    shapes += [NearTrivial(dim, "rotation", j, k)
               for j in range(dim) for k in range(dim) if j != k]
    for shape in shapes:
        pattern = code(1 if shape.kind == "rotation" else 0, shape.j, shape.k)
        for t, wire in enumerate(lay["r"], 1):
            extra = dict(pattern)
            extra[wire] = 1
            # angle 2 pi / 2^t expressed as q / 2^m
            gates.extend(_synthesize_quantized(shape, 2 ** (m - t), m, n, extra))
    return Circuit(total, _cancel_flips(gates))


def universal_machine(n: int, p: Precision) -> Machine:
    if n < 1:
        raise ValueError("need at least one data cell")
    return compile_circuit(universal_circuit(n, p), p, name=f"universal(n={n},m={p.m})")


def parse_nt(line: str) -> NearTrivial:
    """``phase <N> <j> <theta>`` or ``rot <N> <j> <k> <theta>``."""
    from .compiler import parse_angle
    parts = line.split()
    if not parts:
        raise ValueError("empty near-trivial spec")
    if parts[0] == "phase" and len(parts) == 4:
        return phase(int(parts[1]), int(parts[2]), parse_angle(parts[3]))
    if parts[0] == "rot" and len(parts) == 5:
        return rotation(int(parts[1]), int(parts[2]), int(parts[3]), parse_angle(parts[4]))
    raise ValueError(f"malformed near-trivial spec {line!r}")
