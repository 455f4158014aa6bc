"""Compare the compiled and pure-Python kernels.

    python3 benchmarks/bench_kernels.py [--sizes 20 50 100 200] [--repeat 3]
"""
import argparse
import time

import numpy as np

from aqrm import kernels
from aqrm.exactdiag import build_hamiltonian
from aqrm.model import ModelParams


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[20, 50, 100, 200])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    backends = {"python": kernels.backend_module("python")}
    try:
        backends["cython"] = kernels.backend_module("cython")
    except ImportError:
        print("compiled core not available; timing the fallback only")

    print(f"{'kernel':<22}{'size':>6}" + "".join(f"{name:>12}" for name in backends) + f"{'speedup':>10}")
    for n_max in args.sizes:
        h = build_hamiltonian(ModelParams(0.7, 1.0, 0.9, 0.4), n_max)
        ref = np.linalg.eigvalsh(h)
        row = {}
        for name, mod in backends.items():
            w, _ = mod.eigh(h)
            assert np.abs(w - ref).max() < 1e-9 * max(1.0, np.abs(ref).max())
            row[name] = best_of(lambda: mod.eigh(h), args.repeat)
        _report("eigh (vectors)", n_max, row)

    g = np.linspace(0, 2, 2000)
    for n in (80, 200):
        row = {name: best_of(lambda: [mod.normalized_constraint_grid(n, float(x), 0.8, 0.0, 1.0) for x in g],
                             args.repeat)
               for name, mod in backends.items()}
        _report("constraint K_n x2000", n, row)


def _report(label, size, row):
    speed = f"{row['python'] / row['cython']:>9.1f}x" if "cython" in row else ""
    print(f"{label:<22}{size:>6}" + "".join(f"{t * 1e3:>10.2f}ms" for t in row.values()) + speed)


if __name__ == "__main__":
    main()
