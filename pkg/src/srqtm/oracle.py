"""Unitary extraction by exhaustive basis simulation, and phase-aligned comparison.

Basis index ``b`` of an ``n``-cell register puts the most significant bit on
cell 1.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import BLANK, Machine
from .sim import Superposition, run

TOL = 1e-9
MAX_CELLS = 10


class ExtractionError(RuntimeError):
    pass


class TVaries(ExtractionError):
    pass


class ResidualSupport(ExtractionError):
    pass


class NonUnitaryResult(ExtractionError):
    pass


@dataclass
class ExtractedUnitary:
    n: int
    matrix: np.ndarray
    steps: int
    head_trace: Optional[tuple]

    def to_tree(self) -> dict:
        return {
            "n": self.n,
            "steps": self.steps,
            "head_trace": list(self.head_trace) if self.head_trace is not None else None,
            "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in self.matrix],
        }


def basis_string(b: int, n: int) -> str:
    return format(b, f"0{n}b") if n else ""


def extract_unitary(m: Machine, n: int, max_steps: int = 100_000,
                    tail: Sequence[str] = ()) -> ExtractedUnitary:
    """Column ``b`` is the final amplitude vector of the run on basis input ``b``.

    ``tail`` is a fixed symbol string placed after the ``n`` data cells (for
    instance encoding cells); it must come back unchanged.
    """
    if not 0 <= n <= MAX_CELLS:
        raise ValueError(f"extraction supports 0..{MAX_CELLS} cells, got {n}")
    tail = tuple(tail)
    dim = 2 ** n
    u = np.zeros((dim, dim), dtype=complex)
    steps = trace = None
    for b in range(dim):
        tape = (BLANK,) + tuple(basis_string(b, n)) + tail
        final, rep = run(m, tape, max_steps)
        if steps is None:
            steps, trace = rep.steps, rep.head_trace
        elif rep.steps != steps:
            raise TVaries(f"input {basis_string(b, n)} halts after {rep.steps} steps, "
                          f"others after {steps}")
        if rep.head_trace != trace:
            trace = None
        _fill_column(u, b, final, n, tail)
    dev = np.abs(u.conj().T @ u - np.eye(dim)).max() if dim else 0.0
    if dev > TOL:
        raise NonUnitaryResult(f"extracted matrix deviates from unitarity by {dev:.3g}")
    return ExtractedUnitary(n, u, steps, trace)


def _fill_column(u, b, final: Superposition, n, tail):
    for conf, amp in final.items():
        if conf.head != 0:
            raise ResidualSupport(f"head at cell {conf.head} after halting")
        cells = conf.tape[1:] if conf.tape else ()
        data, rest = cells[:n], cells[n:]
        rest = tuple(rest) + (BLANK,) * max(len(tail) - len(rest), 0)
        if len(data) < n or any(s not in "01" for s in data) or \
                tuple(rest[:len(tail)]) != tail or any(s != BLANK for s in rest[len(tail):]):
            if abs(amp) > 1e-12:
                raise ResidualSupport(f"amplitude {amp:.3g} on tape {''.join(conf.tape)!r} "
                                      f"outside the data register")
            continue
        u[int("".join(data), 2) if n else 0, b] += amp


def compare(a, b, tol: float = TOL):
    """Max-entry distance between ``a`` and ``b`` after aligning global phase.

    The phase is read off the largest-magnitude entry of ``b``. Returns
    ``(distance, phase)`` so that ``a ~ exp(1j * phase) * b``.
    """
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    if not a.size:
        return 0.0, 0.0
    idx = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    phase = 0.0
    if abs(b[idx]) > tol and abs(a[idx]) > tol:
        phase = float(np.angle(a[idx] / b[idx]))
    return float(np.abs(a - np.exp(1j * phase) * b).max()), phase


def embed(u, cells: Sequence[int], n: int) -> np.ndarray:
    """Lift a gate on ``cells`` (first listed = most significant) to ``n`` cells."""
    u = np.asarray(u, dtype=complex)
    k = len(cells)
    dim = 2 ** n
    out = np.zeros((dim, dim), dtype=complex)
    others = [c for c in range(1, n + 1) if c not in cells]
    for col in range(dim):
        bits = basis_string(col, n)
        sub = int("".join(bits[c - 1] for c in cells), 2)
        for row_sub in range(2 ** k):
            amp = u[row_sub, sub]
            if amp == 0:
                continue
            new = list(bits)
            for c, bit in zip(cells, basis_string(row_sub, k)):
                new[c - 1] = bit
            out[int("".join(new), 2), col] += amp
    return out


def controlled(u, n_controls: int) -> np.ndarray:
    """Block-diagonal matrix applying ``u`` when all leading control bits are 1."""
    u = np.asarray(u, dtype=complex)
    dim = 2 ** n_controls * u.shape[0]
    out = np.eye(dim, dtype=complex)
    out[-u.shape[0]:, -u.shape[0]:] = u
    return out


def all_bits(n: int):
    return ["".join(bits) for bits in itertools.product("01", repeat=n)]
