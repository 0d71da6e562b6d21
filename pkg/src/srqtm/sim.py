"""Coherent evolution of configuration superpositions, halting and head checks.

Terms are kept packed (parallel arrays of state index, head, tape row and
amplitude) while a run is in progress; :class:`Superposition` is the value
type exchanged with callers.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from . import kernels
from .core import BLANK, Machine

PRUNE = 1e-12
NORM_FAULT = 1e-6


class SimulationError(RuntimeError):
    pass


class NoApplicableRule(SimulationError):
    def __init__(self, state, symbol):
        self.state, self.symbol = state, symbol
        super().__init__(f"no rule for state {state} reading {symbol!r}")


class NegativeHead(SimulationError):
    def __init__(self, state):
        self.state = state
        super().__init__(f"state {state} moves the head left of cell 0")


class FinalStateStep(SimulationError):
    pass


class NormDrift(SimulationError):
    pass


class NonSynchronizedHalt(SimulationError):
    def __init__(self, step, halted, running):
        self.step, self.halted, self.running = step, halted, running
        super().__init__(f"after step {step} {halted} term(s) reached the final state "
                         f"while {running} did not")


class MaxStepsExceeded(SimulationError):
    pass


# -- value types --------------------------------------------------------------

def canonical_tape(tape) -> tuple:
    """Tuple of symbols with trailing blanks removed; a str is read one char per cell."""
    cells = list(tape)
    while cells and cells[-1] == BLANK:
        cells.pop()
    return tuple(cells)


@dataclass(frozen=True)
class Configuration:
    state: str
    tape: tuple
    head: int

    def __post_init__(self):
        object.__setattr__(self, "tape", canonical_tape(self.tape))
        if self.head < 0:
            raise ValueError("head position must be non-negative")

    def cell(self, i: int) -> str:
        return self.tape[i] if i < len(self.tape) else BLANK


class Superposition(Mapping):
    """Sparse map from :class:`Configuration` to complex amplitude."""

    def __init__(self, terms: Mapping = ()):
        self._terms = {}
        for conf, amp in dict(terms).items():
            amp = complex(amp)
            if abs(amp) >= PRUNE:
                self._terms[conf] = self._terms.get(conf, 0) + amp

    @classmethod
    def basis(cls, state: str, tape, head: int = 0) -> "Superposition":
        return cls({Configuration(state, tape, head): 1.0})

    @classmethod
    def from_tapes(cls, state: str, tapes: Mapping, head: int = 0) -> "Superposition":
        return cls({Configuration(state, t, head): a for t, a in tapes.items()})

    def __getitem__(self, conf):
        return self._terms[conf]

    def __iter__(self):
        return iter(self._terms)

    def __len__(self):
        return len(self._terms)

    def __repr__(self):
        return f"Superposition({len(self)} terms)"

    def norm_squared(self) -> float:
        return float(sum(abs(a) ** 2 for a in self._terms.values()))

    def states(self) -> set:
        return {c.state for c in self._terms}

    def scaled(self, factor: complex) -> "Superposition":
        return Superposition({c: a * factor for c, a in self._terms.items()})

    def __add__(self, other: "Superposition") -> "Superposition":
        out = dict(self._terms)
        for c, a in other.items():
            out[c] = out.get(c, 0) + a
        return Superposition(out)

    def distance(self, other: "Superposition") -> float:
        """Largest amplitude difference over the union of supports."""
        keys = set(self) | set(other)
        return max((abs(self.get(k, 0) - other.get(k, 0)) for k in keys), default=0.0)


# -- packed form --------------------------------------------------------------

@dataclass
class RuleTable:
    states: list
    state_index: dict
    symbols: list
    symbol_index: dict
    offsets: np.ndarray
    write: np.ndarray
    target: np.ndarray
    move: np.ndarray
    amp: np.ndarray
    final: int


def rule_table(m: Machine) -> RuleTable:
    cached = m.__dict__.get("_rule_table")
    if cached is not None:
        return cached
    symbols = [BLANK] + [s for s in m.alphabet if s != BLANK]
    sym_index = {s: i for i, s in enumerate(symbols)}
    st_index = {q: i for i, q in enumerate(m.states)}
    n_sym = len(symbols)
    counts = np.zeros(len(m.states) * n_sym + 1, dtype=np.int64)
    for (p, sigma), row in m.table.items():
        counts[st_index[p] * n_sym + sym_index[sigma] + 1] = len(row)
    offsets = np.cumsum(counts)
    order = sorted(m.rules, key=lambda r: st_index[r.source] * n_sym + sym_index[r.read])
    table = RuleTable(
        states=list(m.states), state_index=st_index, symbols=symbols,
        symbol_index=sym_index, offsets=offsets,
        write=np.array([sym_index[r.write] for r in order], dtype=np.uint8),
        target=np.array([st_index[r.target] for r in order], dtype=np.int32),
        move=np.array([r.direction.step for r in order], dtype=np.int8),
        amp=np.array([r.amp for r in order], dtype=np.complex128),
        final=st_index[m.final])
    object.__setattr__(m, "_rule_table", table)
    return table


@dataclass
class Packed:
    states: np.ndarray
    heads: np.ndarray
    tapes: np.ndarray
    amps: np.ndarray

    def __len__(self):
        return len(self.states)

    def norm_squared(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def head_set(self) -> set:
        return set(np.unique(self.heads).tolist())

    def select(self, mask) -> "Packed":
        return Packed(self.states[mask], self.heads[mask], self.tapes[mask], self.amps[mask])


def pack(table: RuleTable, s: Superposition) -> Packed:
    confs = list(s)
    width = max([len(c.tape) for c in confs] + [c.head + 1 for c in confs] + [1]) + 1
    tapes = np.zeros((len(confs), width), dtype=np.uint8)
    for i, c in enumerate(confs):
        try:
            tapes[i, :len(c.tape)] = [table.symbol_index[x] for x in c.tape]
        except KeyError as exc:
            raise ValueError(f"tape symbol {exc.args[0]!r} outside the alphabet") from None
    try:
        states = np.array([table.state_index[c.state] for c in confs], dtype=np.int32)
    except KeyError as exc:
        raise ValueError(f"unknown state {exc.args[0]!r}") from None
    return Packed(states, np.array([c.head for c in confs], dtype=np.int64), tapes,
                  np.array([s[c] for c in confs], dtype=np.complex128))


def unpack(table: RuleTable, p: Packed) -> Superposition:
    symbols = table.symbols
    terms = {}
    for q, h, row, a in zip(p.states.tolist(), p.heads.tolist(), p.tapes.tolist(), p.amps):
        terms[Configuration(table.states[q], tuple(symbols[x] for x in row), h)] = a
    return Superposition(terms)


def _merge(p: Packed, backend) -> Packed:
    if len(p) <= 1:
        keep = np.abs(p.amps) >= PRUNE
        return p.select(keep)
    keys = [p.tapes[:, j] for j in range(p.tapes.shape[1] - 1, -1, -1)]
    order = np.lexsort(keys + [p.heads, p.states]).astype(np.int64)
    return Packed(*backend.combine_sorted(order, p.states, p.heads, p.tapes, p.amps, PRUNE))


def step_packed(table: RuleTable, p: Packed, backend=None) -> Packed:
    backend = backend or kernels
    if len(p) and int(p.heads.max()) >= p.tapes.shape[1]:
        grow = int(p.heads.max()) - p.tapes.shape[1] + 2
        p = Packed(p.states, p.heads,
                   np.ascontiguousarray(np.pad(p.tapes, ((0, 0), (0, grow)))), p.amps)
    before = p.norm_squared()
    out = backend.expand(p.states, p.heads, p.tapes, p.amps, table.offsets, table.write,
                         table.target, table.move, table.amp, len(table.symbols), table.final)
    status, bad = out[4], out[5]
    if status == 1:
        raise NoApplicableRule(table.states[p.states[bad]],
                               table.symbols[p.tapes[bad, p.heads[bad]]])
    if status == 2:
        raise NegativeHead(table.states[p.states[bad]])
    if status == 3:
        raise FinalStateStep("cannot step a configuration in the final state")
    nxt = _merge(Packed(*out[:4]), backend)
    after = nxt.norm_squared()
    if abs(after - before) > NORM_FAULT:
        raise NormDrift(f"squared norm changed from {before:.12g} to {after:.12g}")
    return nxt


def step(m: Machine, s: Superposition) -> Superposition:
    table = rule_table(m)
    return unpack(table, step_packed(table, pack(table, s)))


# -- runs ---------------------------------------------------------------------

@dataclass
class RunReport:
    steps: int
    halted: bool
    head_deterministic: bool
    head_trace: Optional[tuple]
    norm_drift: float
    head_sets: list = field(default_factory=list, repr=False)
    trace: list = field(default_factory=list, repr=False)

    def to_tree(self) -> dict:
        return {
            "steps": self.steps,
            "halted": self.halted,
            "head_deterministic": self.head_deterministic,
            "head_trace": list(self.head_trace) if self.head_trace is not None else None,
            "norm_drift": self.norm_drift,
            "trace": self.trace,
        }


def as_superposition(m: Machine, initial) -> Superposition:
    if isinstance(initial, Superposition):
        return initial
    return Superposition.basis(m.start, initial)


def _trace_record(table, step_no, p: Packed, full: bool) -> dict:
    rec = {"step": step_no, "heads": sorted(p.head_set()), "terms": len(p),
           "norm": p.norm_squared() ** 0.5}
    if full:
        s = unpack(table, p)
        rec["configurations"] = [
            {"state": c.state, "tape": "".join(c.tape), "head": c.head,
             "re": a.real, "im": a.imag}
            for c, a in sorted(s.items(), key=lambda kv: (kv[0].state, kv[0].tape))]
    return rec


def run(m: Machine, initial, max_steps: int = 10_000, trace: Optional[str] = None,
        backend=None):
    """Step until every term is in the final state.

    ``initial`` is a tape (string or symbol sequence, start state, head on
    cell 0) or a :class:`Superposition`. ``trace`` is ``None``, ``"summary"``
    or ``"full"`` and fills :attr:`RunReport.trace`.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    table = rule_table(m)
    start = as_superposition(m, initial)
    p = pack(table, start)
    norm0 = p.norm_squared()
    head_sets = [p.head_set()]
    records = [_trace_record(table, 0, p, trace == "full")] if trace else []
    drift = abs(norm0 - 1)
    final = table.final
    steps = 0
    while True:
        done = p.states == final
        if len(p) and done.all():
            break
        if steps >= max_steps:
            raise MaxStepsExceeded(f"not halted after {max_steps} steps")
        p = step_packed(table, p, backend)
        steps += 1
        drift = max(drift, abs(p.norm_squared() - 1))
        head_sets.append(p.head_set())
        if trace:
            records.append(_trace_record(table, steps, p, trace == "full"))
        n_done = int((p.states == final).sum())
        if 0 < n_done < len(p):
            raise NonSynchronizedHalt(steps, n_done, len(p) - n_done)
    deterministic = all(len(h) == 1 for h in head_sets)
    head_trace = tuple(next(iter(h)) for h in head_sets) if deterministic else None
    report = RunReport(steps, True, deterministic, head_trace, drift, head_sets, records)
    return unpack(table, p), report


def head_positions(s: Superposition) -> set:
    return {c.head for c in s}


def measure_cells(s: Superposition, cells: Sequence[int]) -> dict:
    """Born-rule distribution of the symbol string read on ``cells``."""
    dist = {}
    for conf, amp in s.items():
        key = "".join(conf.cell(i) for i in cells)
        dist[key] = dist.get(key, 0.0) + abs(amp) ** 2
    total = sum(dist.values())
    return {k: v / total for k, v in sorted(dist.items())}


def sample_run(m: Machine, initial, seed: int, per_step_measure: bool = False,
               max_steps: int = 10_000, cells: Optional[Sequence[int]] = None):
    """Run once and sample the output cells; optionally collapse the internal
    state after every step. Returns ``(outcome, steps)``."""
    rng = np.random.default_rng(seed)
    table = rule_table(m)
    start = as_superposition(m, initial)
    if cells is None:
        width = max(len(c.tape) for c in start)
        cells = range(1, max(width, 2))
    p = pack(table, start)
    steps = 0
    while not (p.states == table.final).all():
        if steps >= max_steps:
            raise MaxStepsExceeded(f"not halted after {max_steps} steps")
        p = step_packed(table, p)
        steps += 1
        n_done = int((p.states == table.final).sum())
        if 0 < n_done < len(p):
            raise NonSynchronizedHalt(steps, n_done, len(p) - n_done)
        if per_step_measure:
            weights = np.abs(p.amps) ** 2
            labels, inverse = np.unique(p.states, return_inverse=True)
            probs = np.bincount(inverse, weights=weights)
            pick = rng.choice(len(labels), p=probs / probs.sum())
            kept = p.select(inverse == pick)
            kept.amps = kept.amps / np.sqrt(probs[pick])
            p = kept
    probs = np.abs(p.amps) ** 2
    pick = rng.choice(len(p), p=probs / probs.sum())
    row = p.tapes[pick]
    outcome = "".join(table.symbols[row[i]] if i < len(row) else BLANK for i in cells)
    return outcome, steps


# -- SR certificate -----------------------------------------------------------

@dataclass
class SRReport:
    n_cells: int
    inputs: int
    steps: Optional[int]
    uniform_steps: bool
    identical_head_traces: bool
    head_deterministic: bool
    final_head_zero: bool
    head_trace: Optional[tuple] = None

    @property
    def ok(self) -> bool:
        return (self.uniform_steps and self.identical_head_traces
                and self.head_deterministic and self.final_head_zero)

    def to_tree(self) -> dict:
        return {"ok": self.ok, "n_cells": self.n_cells, "inputs": self.inputs,
                "steps": self.steps, "uniform_steps": self.uniform_steps,
                "identical_head_traces": self.identical_head_traces,
                "head_deterministic": self.head_deterministic,
                "final_head_zero": self.final_head_zero,
                "head_trace": list(self.head_trace) if self.head_trace else None}


def basis_tapes(m: Machine, n_cells: int) -> Iterable[tuple]:
    data = [s for s in m.alphabet if s != BLANK]
    for cells in itertools.product(data, repeat=max(n_cells - 1, 0)):
        yield (BLANK,) + cells


def check_sr(m: Machine, n_cells: int, max_steps: int = 10_000) -> SRReport:
    steps, traces = set(), set()
    deterministic = final_zero = True
    count = 0
    for tape in basis_tapes(m, n_cells):
        final, rep = run(m, tape, max_steps)
        count += 1
        steps.add(rep.steps)
        deterministic &= rep.head_deterministic
        if rep.head_trace is not None:
            traces.add(rep.head_trace)
        final_zero &= head_positions(final) == {0}
    uniform = len(steps) == 1
    same_trace = deterministic and len(traces) == 1
    return SRReport(n_cells, count, next(iter(steps)) if uniform else None, uniform,
                    same_trace, deterministic, final_zero,
                    next(iter(traces)) if same_trace else None)
