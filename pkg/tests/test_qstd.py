import cmath
import math

import pytest
from hypothesis import given, strategies as st

from srqtm import builders, qstd
from srqtm.core import Direction, Machine, TransitionRule

from conftest import HALT_SQTM, HADAMARD_SQTM


@pytest.mark.parametrize("text, value", [
    ("1", 1), ("-1", -1), ("0.5", 0.5), ("0.5+0.25i", 0.5 + 0.25j), ("0.5-0.25i", 0.5 - 0.25j),
    ("-2.5e-3i", -2.5e-3j), ("i", 1j), ("-i", -1j), ("1e-3-1e-3i", 1e-3 - 1e-3j),
    ("1/sqrt(2)", 1 / math.sqrt(2)), ("-1/sqrt(2)", -1 / math.sqrt(2)),
    ("cos(pi/2^3)", math.cos(math.pi / 8)), ("-sin(pi/2^0)", -math.sin(math.pi)),
    ("exp(i*pi/2^2)", cmath.exp(1j * math.pi / 4)), ("exp(-i*pi/2^1)", -1j),
])
def test_parse_amplitude(text, value):
    assert qstd.parse_amplitude(text) == pytest.approx(value, abs=1e-15)


@pytest.mark.parametrize("text", ["", "abc", "1/sqrt(3)", "1++2i", "cos(pi/3)"])
def test_parse_amplitude_rejects(text):
    with pytest.raises(ValueError):
        qstd.parse_amplitude(text)


@given(st.complex_numbers(max_magnitude=1, allow_nan=False, allow_infinity=False))
def test_decimal_amplitude_round_trip(z):
    assert qstd.parse_amplitude(qstd.format_amplitude(z)) == z


def test_hadamard_file_matches_builder(hadamard):
    built = builders.rotation_machine(2, builders.H())
    assert set(hadamard.rules) == set(built.rules)
    assert hadamard.states == built.states


def test_header_only_file():
    m = qstd.parse_machine("machine: bare\nalphabet: #,0,1\nstates: q0,qf\nstart: q0\nfinal: qf\n")
    assert m.rules == ()


@pytest.mark.parametrize("text, line", [
    (HADAMARD_SQTM.replace("rule: q1,0 -> 0,q2,R : 1", "rule: q1,0 => 0,q2,R : 1"), 8),
    (HADAMARD_SQTM.replace("rule: q1,0 -> 0,q2,R", "rule: q1,5 -> 0,q2,R"), 8),
    (HADAMARD_SQTM.replace("rule: q1,0 -> 0,q2,R", "rule: q1,0 -> 0,q9,R"), 8),
    (HADAMARD_SQTM + "rule: q3,1 -> 1,qf,L : 1\n", 16),
], ids=["arrow", "symbol", "state", "duplicate"])
def test_syntax_errors_carry_line(text, line):
    with pytest.raises(qstd.MachineSyntaxError) as info:
        qstd.parse_machine(text)
    assert info.value.lineno == line


def test_missing_header():
    with pytest.raises(qstd.MachineSyntaxError):
        qstd.parse_machine("machine: x\nalphabet: #,0\n")


def test_emit_keeps_symbolic_tokens(hadamard):
    text = qstd.emit_machine(hadamard)
    assert "-1/sqrt(2)" in text
    assert qstd.emit_machine(qstd.parse_machine(text)) == text


BUILDERS = [
    builders.rotation_machine(3, builders.Ry(-1, 2)),
    builders.rotation_machine(1, builders.Rz(1, 0)),
    builders.rotation_machine(2, builders.Phase(0.3)),
    builders.cnot_machine(3, 1),
    builders.toffoli_machine(1, 3, 2),
    builders.controlled_machine([2, 4], 1, builders.H()),
    builders.dovetail(builders.cnot_machine(1, 2), builders.rotation_machine(1, builders.H())),
]


@pytest.mark.parametrize("m", BUILDERS, ids=lambda m: m.name)
def test_parse_emit_identity(m):
    back = qstd.parse_machine(qstd.emit_machine(m))
    assert back == m
    assert [r.amp for r in back.rules] == [r.amp for r in m.rules]


@pytest.mark.parametrize("m", BUILDERS, ids=lambda m: m.name)
def test_diagram_is_lossless(m):
    doc = qstd.from_machine(m)
    assert len(doc.nodes) == len(m.states) and len(doc.edges) == len(m.rules)
    assert qstd.to_machine(doc) == m


def test_hadamard_diagram(hadamard):
    doc = qstd.from_machine(hadamard)
    assert doc.node("q0").direction is None
    assert doc.node("q3").label == "q3←"
    groups = doc.parallel_groups()
    assert len(groups["q2", "q3"]) == 4
    assert all(e.merged for e in groups["q2", "q3"])
    text = qstd.to_graph_text(doc)
    body = text.splitlines()
    assert sum("->" not in l and "[label=" in l for l in body) == 5
    assert sum("->" in l for l in body) == len(hadamard.rules)
    assert '  "q2" -> "q3" [label="1/1: -1/sqrt(2)"];' in body
    assert '  "q0" -> "q1" [label="#/#"];' in body


def test_merged_rendering(hadamard):
    text = qstd.to_graph_text(qstd.from_machine(hadamard), merge_parallel=True)
    assert sum("->" in l for l in text.splitlines()) == 4


def test_single_rule_label_omits_amp():
    doc = qstd.from_machine(qstd.parse_machine(HALT_SQTM))
    assert len(doc.nodes) == 2 and len(doc.edges) == 1
    assert doc.edges[0].label == "#/#"


def test_empty_machine_graph():
    m = Machine("empty", ("#", "0", "1"), ("q0", "qf"), "q0", "qf", [])
    text = qstd.to_graph_text(qstd.from_machine(m))
    assert text.startswith('digraph "empty" {') and "->" not in text


def test_cnot_nodes():
    doc = qstd.from_machine(builders.cnot_machine(1, 2))
    assert [n.state for n in doc.nodes] == ["q0", "q1", "q2", "q3", "q4", "q5", "qf"]


def test_rendering_is_deterministic():
    a = qstd.to_graph_text(qstd.from_machine(builders.toffoli_machine(1, 2, 3)))
    b = qstd.to_graph_text(qstd.from_machine(builders.toffoli_machine(1, 2, 3)))
    assert a == b


def test_from_machine_rejects_non_rotational():
    R = Direction.RIGHT
    m = Machine("split", ("#", "0", "1"), ("q0", "a", "qf"), "q0", "qf",
                [TransitionRule("q0", "#", "#", "a", R, 1 / math.sqrt(2)),
                 TransitionRule("q0", "#", "0", "qf", R, 1 / math.sqrt(2))])
    with pytest.raises(qstd.NotRotational):
        qstd.from_machine(m)
