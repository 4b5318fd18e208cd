"""Time the compiled per-pulse kernel against the numpy fallback.

    python benchmarks/bench_kernels.py --length 100 --rabi 0.10005 0.1006 --repeat 3

Each configuration runs the full adder schedule once per backend and repeat,
checks the two backends agree bit for bit, and prints the best wall time.
"""
import argparse
import time

import numpy as np

from spinadder import _backend, _fallback
from spinadder import experiments as ex
from spinadder.spin_model import ChainSpec


def timed_run(kernel, spec, a, rabi, eps):
    _backend.apply_table = kernel
    t = time.perf_counter()
    psi = ex.run_addition_state(spec, a, [(1, 1)], rabi, eps=eps)
    return time.perf_counter() - t, psi


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--length", type=int, default=100)
    ap.add_argument("--rabi", type=float, nargs="+", default=[0.10005, 0.1006])
    ap.add_argument("--eps", type=float, default=1e-9)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    compiled = getattr(_backend, "_compiled", None)
    if compiled is None:
        raise SystemExit("compiled kernel not built; run `pip install -e .` first")
    kernels = {"cython": compiled.apply_table, "numpy": _fallback.apply_table}
    spec = ChainSpec(L=args.length)
    a = 1 << (args.length - 1)

    original = _backend.apply_table
    print(f"{'rabi':>9} {'entries':>8} {'cython s':>9} {'numpy s':>9} {'speedup':>8} identical")
    try:
        for rabi in args.rabi:
            best, states = {}, {}
            for name, kernel in kernels.items():
                times = []
                for _ in range(args.repeat):
                    dt, psi = timed_run(kernel, spec, a, rabi, args.eps)
                    times.append(dt)
                best[name], states[name] = min(times), psi
            c, p = states["cython"], states["numpy"]
            same = (np.array_equal(c.keys, p.keys) and np.array_equal(c.amps, p.amps)
                    and c.pruned_mass == p.pruned_mass)
            print(f"{rabi:9.5f} {len(c):8d} {best['cython']:9.3f} {best['numpy']:9.3f} "
                  f"{best['numpy'] / best['cython']:7.1f}x {same}")
    finally:
        _backend.apply_table = original


if __name__ == "__main__":
    main()
