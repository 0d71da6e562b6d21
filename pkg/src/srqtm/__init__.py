"""Stationary rotational quantum Turing machines.

Build, check, simulate and render machines; compile circuits into them.
"""
from .builders import (H, X, Phase, PrimitiveGate, Ry, Rz, cnot_machine, controlled_machine,
                       dovetail, dovetail_all, identity_machine, rotation_machine,
                       toffoli_machine)
from .compiler import Circuit, Gate, Precision, circuit_unitary, compile_circuit, parse_circuit
from .core import BLANK, Direction, Machine, TransitionRule, classify
from .kernels import BACKEND
from .oracle import compare, extract_unitary
from .qstd import emit_machine, from_machine, parse_machine, to_graph_text
from .sim import Configuration, Superposition, check_sr, run, sample_run, step

__version__ = "0.1.0"
