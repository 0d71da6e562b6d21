import numpy as np
import pytest

from srqtm import builders, qstd

HADAMARD_SQTM = """\
# Hadamard on cell 2
machine: hadamard
alphabet: #,0,1
states: q0,q1,q2,q3,qf
start: q0
final: qf
rule: q0,# -> #,q1,R : 1
rule: q1,0 -> 0,q2,R : 1
rule: q1,1 -> 1,q2,R : 1
rule: q2,0 -> 0,q3,L : 1/sqrt(2)
rule: q2,0 -> 1,q3,L : 1/sqrt(2)
rule: q2,1 -> 0,q3,L : 1/sqrt(2)
rule: q2,1 -> 1,q3,L : -1/sqrt(2)
rule: q3,0 -> 0,qf,L : 1
rule: q3,1 -> 1,qf,L : 1
"""

HALT_SQTM = """\
machine: halt
alphabet: #,0,1
states: q0,qf
start: q0
final: qf
rule: q0,# -> #,qf,R : 1
"""

# Cell 1 picks the branch: reading 0 halts after 3 steps, reading 1 after 5.
# Cell 2 must hold 0. Locally unitary, so only the runtime check objects.
UNEVEN_SQTM = """\
machine: uneven
alphabet: #,0,1
states: q0,a,b,d,e,f,qf
start: q0
final: qf
rule: q0,# -> #,a,R : 1
rule: a,0 -> 0,b,R : 1
rule: a,1 -> 1,d,R : 1
rule: b,0 -> 0,qf,R : 1
rule: d,0 -> 1,e,R : 1
rule: e,# -> #,f,L : 1
rule: f,1 -> 1,qf,R : 1
"""

# Both branches halt after 4 steps, but at step 2 the heads sit on cells 2 and 0.
WANDER_SQTM = """\
machine: wander
alphabet: #,0,1
states: q0,a,b,c,e,g,qf
start: q0
final: qf
rule: q0,# -> #,a,R : 1
rule: a,0 -> 0,b,R : 1
rule: a,1 -> 1,c,L : 1
rule: b,0 -> 0,e,L : 1
rule: c,# -> #,g,R : 1
rule: e,0 -> 0,qf,L : 1
rule: g,1 -> 1,qf,L : 1
"""


@pytest.fixture
def hadamard():
    return qstd.parse_machine(HADAMARD_SQTM)


@pytest.fixture
def cnot12():
    return builders.cnot_machine(1, 2)


def random_unitary(rng, n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
