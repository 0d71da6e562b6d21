import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from srqtm import builders
from srqtm.core import (Direction, Machine, MachineError, TransitionRule, check_local_unitarity,
                        check_rotational, classify, direction_map, rebuild_from_rotational,
                        transition_matrix)

R, L = Direction.RIGHT, Direction.LEFT


def mutate(m, match, **changes):
    rules = [dataclasses.replace(r, token=None, **changes) if match(r) else r for r in m.rules]
    return Machine(m.name, m.alphabet, m.states, m.start, m.final, rules)


def test_hadamard_directions(hadamard):
    d = direction_map(hadamard)
    assert d.ok
    assert d.directions == {"q1": R, "q2": R, "q3": L, "qf": L}


def test_single_rule_direction():
    m = Machine("halt", ("#", "0", "1"), ("q0", "qf"), "q0", "qf",
                [TransitionRule("q0", "#", "#", "qf", R)])
    assert direction_map(m).directions == {"qf": R}
    assert classify(m).ok


def test_direction_violation_cites_both_rules(hadamard):
    bad = mutate(hadamard, lambda r: (r.source, r.read) == ("q3", "1"), direction=R)
    d = direction_map(bad)
    assert not d.ok and d.directions is None
    assert {(r.source, r.read) for r in d.violation} == {("q3", "0"), ("q3", "1")}
    report = classify(bad)
    assert report.rotational.ok is None and not report.ok


def test_rotational_next_state(hadamard):
    r = check_rotational(hadamard)
    assert r.ok
    assert r.next_state[("q2", "0")] == "q3" and r.next_state[("q2", "1")] == "q3"


def test_rotational_vacuous():
    m = Machine("empty", ("#", "0", "1"), ("q0", "qf"), "q0", "qf", [])
    assert check_rotational(m).ok


def test_rotational_violation(hadamard):
    m = Machine(hadamard.name, hadamard.alphabet, hadamard.states + ("q4",), "q0", "qf",
                [dataclasses.replace(r, target="q4", token=None)
                 if (r.source, r.read, r.write) == ("q2", "0", "1") else r
                 for r in hadamard.rules]
                + [TransitionRule("q4", "0", "0", "qf", L), TransitionRule("q4", "1", "1", "qf", L)])
    r = check_rotational(m)
    assert r.ok is False
    (p, sigma), a, b = r.violation
    assert (p, sigma) == ("q2", "0") and {a.target, b.target} == {"q3", "q4"}


def test_unitarity_sign_flip(hadamard):
    assert check_local_unitarity(hadamard).ok
    bad = mutate(hadamard, lambda r: r.amp.real < 0, amp=1 / math.sqrt(2))
    u = check_local_unitarity(bad)
    assert not u.ok
    assert u.deviation == pytest.approx(1.0)
    assert set(u.rows) == {("q2", "0"), ("q2", "1")}
    assert any(r.amp == 1 / math.sqrt(2) and (r.read, r.write) == ("1", "1") for r in u.rules)


def test_transition_matrix_rows_orthonormal(hadamard):
    a, rows, cols = transition_matrix(hadamard)
    assert np.allclose(a @ a.conj().T, np.eye(len(rows)))


def test_permutation_machine_unitary():
    m = builders.cnot_machine(2, 1)
    assert all(abs(r.amp) == 1 for r in m.rules)
    assert check_local_unitarity(m).ok


def test_machine_invariants():
    with pytest.raises(MachineError):
        Machine("x", ("#", "0"), ("q0",), "q0", "q0", [])
    with pytest.raises(MachineError):
        Machine("x", ("#", "0"), ("q0", "qf"), "q0", "qf",
                [TransitionRule("qf", "0", "0", "q0", R)])
    with pytest.raises(MachineError):
        Machine("x", ("#", "0"), ("q0", "qf"), "q0", "qf",
                [TransitionRule("q0", "#", "#", "qf", R, 0.5)])
    with pytest.raises(MachineError):
        Machine("x", ("#", "0"), ("q0", "qf"), "q0", "qf",
                [TransitionRule("q0", "#", "#", "q9", R)])
    with pytest.raises(ValueError):
        TransitionRule("q0", "#", "#", "qf", R, 0)
    with pytest.raises(MachineError):
        Machine("x", ("#", "a b"), ("q0", "qf"), "q0", "qf", [])
    with pytest.raises(MachineError):
        Machine("x", ("#", "0/1"), ("q0", "qf"), "q0", "qf", [])


@given(st.sampled_from(["h", "x", "ry", "rz"]), st.integers(1, 4), st.integers(0, 3),
       st.sampled_from([1, -1]))
def test_rebuild_from_rotational_matches_table(kind, cell, k, sign):
    g = builders.PrimitiveGate(kind, sign, k)
    m = builders.rotation_machine(cell, g)
    rebuilt = rebuild_from_rotational(m)
    assert rebuilt == {(r.source, r.read, r.write, r.target, r.direction): r.amp
                       for r in m.rules}
