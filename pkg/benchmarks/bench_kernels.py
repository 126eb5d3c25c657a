"""Compare the compiled and pure-numpy kernels.

    python benchmarks/bench_kernels.py [--qubits 6 8 10] [--repeat 5]

The numpy ``rotate`` memoizes its index tables per Pauli axis, so its warm
timing measures a table lookup; ``rotate_cold`` clears that cache first.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from gnm import kernels


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def bench(n: int, repeat: int) -> list[tuple[str, str, float]]:
    rng = np.random.default_rng(0)
    c = rng.normal(size=4**n)
    px, pz = (1 << n) - 1, 0b101 % (1 << n)
    pidx = px | (pz << n)
    rows = []
    for name, be in sorted(kernels.backends().items()):
        a, s = be.pair_table(n, px, pz)
        work = c.copy()
        rows.append((name, "rotate", best_of(lambda: be.rotate(work, n, px, pz, 0.6, 0.8), repeat)))
        clear = getattr(getattr(be, "_pairs", None), "cache_clear", lambda: None)

        def cold():
            clear()
            be.rotate(work, n, px, pz, 0.6, 0.8)

        rows.append((name, "rotate_cold", best_of(cold, repeat)))
        rows.append((name, "rotate_table", best_of(lambda: be.rotate_table(work, a, s, pidx, 0.6, 0.8), repeat)))
        rows.append((name, "fwht", best_of(lambda: be.fwht(work), repeat)))
        rows.append((name, "pair_table", best_of(lambda: be.pair_table(n, px, pz), repeat)))
    return rows


def bench_energy(repeat: int) -> dict[str, float]:
    """One noisy energy of the full 8-qubit test ansatz routed on the 14-qubit ladder."""
    from pathlib import Path

    from gnm.ansatz import build_pool, ops_circuit
    from gnm.compiled import PauliProgram
    from gnm.pauli import load_hamiltonian
    from gnm.transpiler import load_device, transpile

    root = Path(__file__).resolve().parents[1] / "fixtures"
    h = load_hamiltonian(root / "h4_1.00.json")
    dev = load_device(root / "ladder14.json")
    pool = build_pool(h)
    tc = transpile(ops_circuit(pool.doubles[:10] + pool.singles[:4], h.n_qubits), dev)
    theta = np.linspace(-0.1, 0.1, tc.circuit.n_params)
    out = {}
    saved = {k: getattr(kernels, k) for k in ("rotate", "rotate_table", "pair_table", "fwht")}
    try:
        for name, be in sorted(kernels.backends().items()):
            for k in saved:
                setattr(kernels, k, getattr(be, k))
            prog = PauliProgram(tc.circuit, dev.noise(), h)
            out[name] = best_of(lambda: prog.energy(theta), repeat)
    finally:
        for k, v in saved.items():
            setattr(kernels, k, v)
    return out


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--qubits", type=int, nargs="+", default=[6, 8, 10])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    print(f"active backend: {kernels.BACKEND}; available: {', '.join(sorted(kernels.backends()))}")
    print(f"{'n':>3} {'kernel':<13} " + " ".join(f"{b:>12}" for b in sorted(kernels.backends())) + "   speedup")
    for n in args.qubits:
        rows = bench(n, args.repeat)
        for kernel in ("rotate", "rotate_cold", "rotate_table", "fwht", "pair_table"):
            t = {b: sec for b, k, sec in rows if k == kernel}
            cells = " ".join(f"{t[b] * 1e3:10.3f}ms" for b in sorted(t))
            speed = f"{t['numpy'] / t['cython']:8.1f}x" if "cython" in t else ""
            print(f"{n:>3} {kernel:<13} {cells} {speed}")
    t = bench_energy(args.repeat)
    cells = " ".join(f"{t[b] * 1e3:10.3f}ms" for b in sorted(t))
    speed = f"{t['numpy'] / t['cython']:8.1f}x" if "cython" in t else ""
    print(f"{'H4':>3} {'energy':<13} {cells} {speed}")


if __name__ == "__main__":
    main()
