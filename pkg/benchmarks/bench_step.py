"""Compare the compiled and numpy step kernels on a wide superposition.

    python benchmarks/bench_step.py --wires 10 --repeat 3
"""
import argparse
import time

from srqtm import kernels, sim
from srqtm.builders import H, Ry
from srqtm.compiler import Circuit, cnot, compile_circuit, prim


def workload(wires: int):
    """H on every wire, a CNOT ladder, then Ry on odd wires: 2**wires terms mid-run."""
    gates = [prim(H(), w) for w in range(1, wires + 1)]
    gates += [cnot(w, w + 1) for w in range(1, wires)]
    gates += [prim(Ry(1, 2), w) for w in range(1, wires + 1, 2)]
    return compile_circuit(Circuit(wires, gates))


def bench(m, tape, backend, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        final, rep = sim.run(m, tape, max_steps=100_000, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, rep.steps, len(final)


def main():
    ap = argparse.ArgumentParser(description="step kernel benchmark")
    ap.add_argument("--wires", type=int, default=10)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    m = workload(args.wires)
    tape = "#" + "0" * args.wires
    timings = {}
    for name in ("python", "cython"):
        try:
            backend = kernels.load(name)
        except ImportError:
            print(f"{name:>7}: not built")
            continue
        best, steps, terms = bench(m, tape, backend, args.repeat)
        timings[name] = best
        print(f"{name:>7}: {best * 1e3:9.1f} ms  ({steps} steps, {terms} final terms, "
              f"{best / steps * 1e6:.1f} us/step)")
    if len(timings) == 2:
        print(f"speedup: {timings['python'] / timings['cython']:.2f}x")


if __name__ == "__main__":
    main()
