import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from srqtm.compiler import Precision, circuit_unitary, compile_circuit
from srqtm.neartrivial import (EncodingError, NearTrivial, NotUnitary, NtEncoding, decode,
                               decompose_unitary, encode, gray_path, matrix, parse_nt, phase,
                               product, quantize, rotation, synthesize, universal_circuit,
                               universal_layout, universal_machine, valid_encodings)
from srqtm.oracle import compare, extract_unitary

from conftest import random_unitary


def test_matrix_examples():
    assert np.allclose(matrix(phase(4, 1, 0)), np.eye(4))
    t = 0.3
    assert np.allclose(matrix(rotation(2, 0, 1, t)),
                       [[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])
    assert np.allclose(matrix(phase(4, 2, math.pi)), np.diag([1, 1, -1, 1]))


@given(st.integers(1, 3).flatmap(lambda n: st.tuples(
    st.just(2 ** n), st.integers(0, 2 ** n - 1), st.integers(0, 2 ** n - 1))),
    st.floats(0, 2 * math.pi), st.booleans())
def test_matrix_unitary(dims, theta, rot):
    dim, j, k = dims
    nt = rotation(dim, j, k, theta) if rot and j != k else phase(dim, j, theta)
    m = matrix(nt)
    assert np.abs(m.conj().T @ m - np.eye(dim)).max() <= 1e-12


def test_validation():
    with pytest.raises(ValueError):
        NearTrivial(3, "phase", 0)
    with pytest.raises(ValueError):
        NearTrivial(4, "rotation", 1, 1)
    with pytest.raises(ValueError):
        NearTrivial(4, "phase", 4)
    with pytest.raises(ValueError):
        NearTrivial(4, "phase", 0, 0, 7.0)


@pytest.mark.parametrize("dim", [2, 4, 8])
def test_decompose_random(dim):
    rng = np.random.default_rng(dim)
    for _ in range(5):
        u = random_unitary(rng, dim)
        factors = decompose_unitary(u)
        assert len(factors) <= dim * (dim - 1) + dim
        assert np.abs(product(factors, dim) - u).max() <= 1e-9


def test_decompose_identity_and_rotation():
    assert decompose_unitary(np.eye(4)) == []
    nt = rotation(4, 1, 3, 0.7)
    (f,) = decompose_unitary(matrix(nt))
    assert f.kind == "rotation" and {f.j, f.k} == {1, 3}
    assert np.allclose(matrix(f), matrix(nt))


def test_decompose_rejects():
    with pytest.raises(NotUnitary):
        decompose_unitary(np.ones((2, 2)))
    with pytest.raises(NotUnitary):
        decompose_unitary(np.eye(3))


def test_quantize_ties_round_down():
    assert quantize(2 * math.pi * 1.5 / 8, 3) == 1
    assert quantize(2 * math.pi * 1.51 / 8, 3) == 2
    assert quantize(2 * math.pi * 7.6 / 8, 3) == 0


def test_encode_examples():
    enc = encode(phase(2, 0, math.pi / 2), 1, 2)
    assert enc == NtEncoding("000", "01")
    assert decode(enc, 1, 2) == phase(2, 0, math.pi / 2)
    assert decode(NtEncoding("00000", "000"), 2, 3) == phase(4, 0, 0)
    nt = rotation(4, 1, 2, 2 * math.pi * 5 / 8)
    assert decode(encode(nt, 2, 3), 2, 3) == nt


@given(st.integers(0, 3), st.integers(0, 3), st.floats(0, 2 * math.pi))
def test_quantization_error(j, k, theta):
    nt = rotation(4, j, k, theta) if j != k else phase(4, j, theta)
    back = decode(encode(nt, 2, 5), 2, 5)
    assert abs(math.remainder(back.theta - theta, 2 * math.pi)) <= 2 * math.pi / 2 ** 6 + 1e-12


def test_decode_rejects():
    for enc in (NtEncoding("0001", "00"), NtEncoding("00", "00"), NtEncoding("011", "00"),
                NtEncoding("111", "00"), NtEncoding("1x1", "00")):
        with pytest.raises(EncodingError):
            decode(enc, 1, 2)
    with pytest.raises(EncodingError):
        encode(phase(4, 0, 0), 1, 2)
    assert len(list(valid_encodings(1, 2))) == 4 * 4


def test_gray_path():
    assert gray_path(0b000, 0b111, 3) == [0b000, 0b100, 0b110, 0b111]
    assert gray_path(2, 3, 2) == [2, 3]


def test_synthesize_examples():
    assert len(synthesize(phase(4, 2, 0), Precision(4))) == 0
    c = synthesize(rotation(2, 0, 1, math.pi / 2), Precision(4))
    assert all(g.kind in ("prim", "mcu") and g.prim.kind == "ry" for g in c.gates)
    assert compare(circuit_unitary(c), matrix(rotation(2, 0, 1, math.pi / 2)))[0] <= 1e-12
    c = synthesize(rotation(8, 0b000, 0b111, 0.5), Precision(6))
    mcx = [g for g in c.gates if g.kind == "mcu" and g.prim.kind == "x"]
    assert len(mcx) == 4  # two transpositions on each side


@pytest.mark.parametrize("n", [1, 2, 3])
def test_synthesize_exhaustive(n):
    dim, p = 2 ** n, Precision(5)
    for j, k in itertools.product(range(dim), repeat=2):
        for theta in (0.0, math.pi / 2, 2 * math.pi * 3 / 32, 1.0, 5.9):
            nt = rotation(dim, j, k, theta) if j != k else phase(dim, j, theta)
            d = compare(circuit_unitary(synthesize(nt, p)), matrix(nt))[0]
            assert d <= n * math.pi / 2 ** p.m + 1e-9


def test_parse_nt():
    assert parse_nt("phase 4 2 pi") == phase(4, 2, math.pi)
    assert parse_nt("rot 8 1 6 0.25") == rotation(8, 1, 6, 0.25)
    with pytest.raises(ValueError):
        parse_nt("rot 4 1")
    assert parse_nt(str(rotation(4, 0, 3, 1.25))) == rotation(4, 0, 3, 1.25)


def test_universal_layout():
    lay = universal_layout(2, 3)
    assert lay["kind"] == 3 and lay["j"] == [4, 5] and lay["k"] == [6, 7] and lay["r"] == [8, 9, 10]


def test_universal_machine_sample():
    n, m = 1, 2
    machine = universal_machine(n, Precision(m))
    for enc in [NtEncoding("000", "00"), NtEncoding("101", "01"), NtEncoding("010", "11")]:
        nt = decode(enc, n, m)
        e = extract_unitary(machine, n, tail=tuple(enc.bits))
        assert compare(e.matrix, matrix(nt))[0] <= math.pi / 2 ** m
    # |0> under Rotation{0,1} at theta = pi/2 becomes |1>
    e = extract_unitary(machine, n, tail=tuple("10101"))
    assert abs(e.matrix[1, 0]) == pytest.approx(1)


def test_universal_ignores_invalid_encoding():
    machine = universal_machine(1, Precision(2))
    e = extract_unitary(machine, 1, tail=tuple("11110"))  # rotation with j == k
    assert np.allclose(e.matrix, np.eye(2))


def test_pipeline_reproduces_unitary():
    rng = np.random.default_rng(7)
    u = random_unitary(rng, 4)
    p = Precision(10)
    factors = decompose_unitary(u)
    machines_u = np.eye(4, dtype=complex)
    for f in factors:
        machines_u = extract_unitary(compile_circuit(synthesize(f, p), p), 2).matrix @ machines_u
    assert compare(machines_u, u)[0] <= len(factors) * math.pi / 2 ** p.m + 1e-6


def test_universal_circuit_wires():
    c = universal_circuit(1, Precision(3))
    assert c.n == 1 + 3 + 3
