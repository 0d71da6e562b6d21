"""``srqtm`` command line.

Exit codes: 0 success, 1 validation failure (bad file, failed check, stuck
machine), 2 usage error, 3 runtime simulation error. Failures print one line
on standard error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import builders, compiler, neartrivial, oracle, qstd, sim
from .core import MachineError, classify

EXIT_OK, EXIT_INVALID, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2, 3


class UsageError(Exception):
    pass


class ValidationFailed(Exception):
    pass


# -- helpers ------------------------------------------------------------------

def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"no such file: {path}")
    return p.read_text(encoding="utf-8")


def _machine(path: str):
    return qstd.parse_machine(_read(path))


def _emit(args, text: str):
    if getattr(args, "output", None):
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _tree(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _kv(obj, indent=0) -> str:
    pad = "  " * indent
    lines = []
    for key, val in obj.items():
        if isinstance(val, dict):
            lines.append(f"{pad}{key}:")
            lines.append(_kv(val, indent + 1).rstrip("\n"))
        else:
            lines.append(f"{pad}{key}: {val}")
    return "\n".join(lines) + "\n"


def parse_input(text: str):
    """``#0101`` for a basis tape or ``amp:tape,amp:tape`` for a superposition."""
    if ":" not in text:
        return sim.canonical_tape(text)
    tapes = {}
    for part in text.split(","):
        amp, _, tape = part.rpartition(":")
        tapes[tape.strip()] = qstd.parse_amplitude(amp.strip())
    return tapes


def format_grid(u: np.ndarray) -> str:
    cells = [[f"{z.real:+.6f}{z.imag:+.6f}i" for z in row] for row in u]
    return "\n".join("  ".join(row) for row in cells) + "\n"


def _build_machine(specs, m_bits):
    gates = []
    for spec in specs:
        if spec.strip() == "identity":
            gates.append(None)
            continue
        gates.append(compiler.parse_gate(spec))
    machines = []
    for g in gates:
        if g is None:
            machines.append(builders.identity_machine())
            continue
        low = compiler.lower(compiler.Circuit(max(g.wires), [g]), compiler.Precision(m_bits))
        machines.extend(compiler.gate_machine(x) for x in low.gates)
    if not machines:
        return builders.identity_machine()
    if len(machines) == 1:
        return machines[0]
    return builders.dovetail_all(machines, name=" ; ".join(specs))


# -- subcommands --------------------------------------------------------------

def cmd_check(args):
    report = classify(_machine(args.machine))
    summary = report.summary()
    _emit(args, _tree(summary) if args.format == "tree" else _kv(summary))
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_simulate(args):
    m = _machine(args.machine)
    initial = parse_input(args.input)
    if isinstance(initial, dict):
        initial = sim.Superposition.from_tapes(m.start, initial)
    if args.seed is not None:
        outcome, steps = sim.sample_run(m, initial, args.seed, args.per_step_measure,
                                        args.max_steps)
        result = {"outcome": outcome, "steps": steps, "seed": args.seed}
        _emit(args, _tree(result) if args.format == "tree" else _kv(result))
        return EXIT_OK
    final, rep = sim.run(m, initial, args.max_steps, trace=args.trace)
    terms = [{"state": c.state, "tape": "".join(c.tape), "head": c.head,
              "re": a.real, "im": a.imag}
             for c, a in sorted(final.items(), key=lambda kv: (kv[0].tape, kv[0].state))]
    if args.format == "tree":
        doc = rep.to_tree()
        doc["final"] = terms
        _emit(args, _tree(doc))
        return EXIT_OK
    lines = [f"steps: {rep.steps}", f"head_deterministic: {rep.head_deterministic}"]
    if rep.head_trace is not None:
        lines.append("head_trace: " + " ".join(map(str, rep.head_trace)))
    for rec in rep.trace:
        lines.append(f"step {rec['step']}: heads={rec['heads']} terms={rec['terms']} "
                     f"norm={rec['norm']:.12f}")
        for c in rec.get("configurations", ()):
            lines.append(f"  {c['state']} {c['tape']} @{c['head']} "
                         f"{qstd.format_amplitude(complex(c['re'], c['im']))}")
    lines.append("final:")
    for t in terms:
        lines.append(f"  {t['state']} {t['tape']} @{t['head']} "
                     f"{qstd.format_amplitude(complex(t['re'], t['im']))}")
    _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_build(args):
    m = _build_machine(args.spec, args.m)
    _emit(args, qstd.emit_machine(m))
    return EXIT_OK


def cmd_compile(args):
    c = compiler.parse_circuit(_read(args.circuit))
    m = compiler.compile_circuit(c, compiler.Precision(args.m),
                                 name=Path(args.circuit).stem if args.circuit != "-" else None)
    _emit(args, qstd.emit_machine(m))
    return EXIT_OK


def cmd_render(args):
    doc = qstd.from_machine(_machine(args.machine))
    _emit(args, qstd.to_graph_text(doc, merge_parallel=args.merge, rankdir=args.rankdir))
    return EXIT_OK


def cmd_unitary(args):
    m = _machine(args.machine)
    ex = oracle.extract_unitary(m, args.cells, args.max_steps, tail=tuple(args.tail))
    _emit(args, _tree(ex.to_tree()) if args.format == "tree" else
          f"steps: {ex.steps}\n" + format_grid(ex.matrix))
    return EXIT_OK


def cmd_sr_check(args):
    rep = sim.check_sr(_machine(args.machine), args.cells, args.max_steps)
    tree = rep.to_tree()
    _emit(args, _tree(tree) if args.format == "tree" else _kv(tree))
    return EXIT_OK if rep.ok else EXIT_INVALID


def cmd_nt(args):
    p = compiler.Precision(args.m)
    if args.nt_command == "decompose":
        try:
            u = np.loadtxt(args.matrix if args.matrix != "-" else sys.stdin,
                           dtype=complex, ndmin=2)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read matrix: {exc}") from None
        factors = neartrivial.decompose_unitary(u, args.tol)
        if args.format == "tree":
            text = _tree([{"kind": f.kind, "dim": f.dim, "j": f.j, "k": f.k,
                           "theta": f.theta} for f in factors])
        else:
            text = "".join(f"{f}\n" for f in factors)
        _emit(args, text)
    elif args.nt_command == "synthesize":
        nt = neartrivial.parse_nt(args.spec)
        _emit(args, compiler.emit_circuit(neartrivial.synthesize(nt, p)))
    elif args.nt_command == "encode":
        enc = neartrivial.encode(neartrivial.parse_nt(args.spec), args.n, args.m)
        _emit(args, f"e: {enc.e}\nr: {enc.r}\n")
    else:
        _emit(args, qstd.emit_machine(neartrivial.universal_machine(args.n, p)))
    return EXIT_OK


# -- wiring -------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("text", "tree"), default="text",
                        help="'tree' prints a JSON document")
    common.add_argument("-o", "--output", help="write to this file instead of stdout")

    ap = _Parser(prog="srqtm", description="Stationary rotational quantum Turing machines.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("check", parents=[common], help="classify a machine")
    p.add_argument("machine")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("simulate", parents=[common], help="run a machine on a tape")
    p.add_argument("machine")
    p.add_argument("--input", required=True, help="'#0101' or 'amp:tape,amp:tape'")
    p.add_argument("--trace", nargs="?", const="summary", choices=("summary", "full"))
    p.add_argument("--max-steps", type=int, default=10_000)
    p.add_argument("--seed", type=int, help="sample one outcome instead of evolving coherently")
    p.add_argument("--per-step-measure", action="store_true",
                   help="with --seed: collapse the internal state after every step")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("build", parents=[common], help="emit a gate machine")
    p.add_argument("spec", nargs="+", help="gate lines such as 'h 2' or 'cnot 1 2'; "
                                            "several are dovetailed")
    p.add_argument("-m", type=int, default=12, help="bits for free-angle lowering")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("compile", parents=[common], help="compile a .qcirc circuit")
    p.add_argument("circuit")
    p.add_argument("-m", type=int, default=12)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("render", parents=[common], help="emit the diagram as DOT")
    p.add_argument("machine")
    p.add_argument("--merge", action="store_true", help="one edge per state pair")
    p.add_argument("--rankdir", default="LR")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("unitary", parents=[common], help="extract the implemented unitary")
    p.add_argument("machine")
    p.add_argument("--cells", type=int, required=True, help="data cells (excluding cell 0)")
    p.add_argument("--tail", default="", help="fixed symbols after the data cells")
    p.add_argument("--max-steps", type=int, default=100_000)
    p.set_defaults(func=cmd_unitary)

    p = sub.add_parser("sr-check", parents=[common], help="runtime SR certificate")
    p.add_argument("machine")
    p.add_argument("--cells", type=int, required=True, help="tape cells including cell 0")
    p.add_argument("--max-steps", type=int, default=10_000)
    p.set_defaults(func=cmd_sr_check)

    p = sub.add_parser("nt", help="near-trivial transformations")
    nts = p.add_subparsers(dest="nt_command", required=True, parser_class=_Parser)
    q = nts.add_parser("decompose", parents=[common], help="factor a unitary")
    q.add_argument("matrix", help="text matrix, entries like 0.5+0.5j")
    q.add_argument("--tol", type=float, default=1e-9)
    q.add_argument("-m", type=int, default=12)
    q = nts.add_parser("synthesize", parents=[common], help="circuit for one factor")
    q.add_argument("spec", help="'phase N j theta' or 'rot N j k theta'")
    q.add_argument("-m", type=int, default=12)
    q = nts.add_parser("encode", parents=[common], help="encoding bits for one factor")
    q.add_argument("spec")
    q.add_argument("-n", type=int, required=True)
    q.add_argument("-m", type=int, default=3)
    q = nts.add_parser("universal", parents=[common], help="emit the universal machine")
    q.add_argument("-n", type=int, required=True)
    q.add_argument("-m", type=int, default=3)
    p.set_defaults(func=cmd_nt)
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"srqtm: usage: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except sim.NoApplicableRule as exc:
        print(f"srqtm: invalid machine: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except sim.SimulationError as exc:
        print(f"srqtm: simulation error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except oracle.ExtractionError as exc:
        print(f"srqtm: extraction error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (qstd.MachineSyntaxError, MachineError, builders.BuilderError,
            compiler.CircuitError, neartrivial.NotUnitary, neartrivial.EncodingError,
            qstd.NotUnidirectional, qstd.NotRotational, ValueError) as exc:
        print(f"srqtm: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
