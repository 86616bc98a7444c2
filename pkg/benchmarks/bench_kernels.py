"""Compare the compiled kernel extension against the pure-Python fallback.

Permanents are compared with a relative tolerance: the two backends sum
the Ryser terms in different orders, so the last bits differ.  Ladder
triplets must agree exactly, entry for entry, because operator matrices
are promised to be bit-identical across backends.

Run:  python3 benchmarks/bench_kernels.py [--sizes 4,6,8,10] [--repeats 5]
"""

import argparse
import importlib
import sys
import time

import numpy as np

from wicklab import _core_py
from wicklab.fock import enumerate_basis

try:
    from wicklab import _core
except ImportError:
    _core = None


def time_call(fn, repeats):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return out, best


def bench_permanent(sizes, repeats, rng):
    print(f"{'n':>3} {'compiled':>12} {'python':>12} {'speedup':>8} {'rel diff':>10}")
    for n in sizes:
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        pc, tc = time_call(lambda: _core.permanent(a), repeats)
        pp, tp = time_call(lambda: _core_py.permanent(a), repeats)
        rel = abs(pc - pp) / max(abs(pp), 1e-300)
        print(f"{n:>3} {tc * 1e6:>10.1f}us {tp * 1e6:>10.1f}us "
              f"{tp / tc:>7.1f}x {rel:>10.2e}")
        if rel > 1e-9:
            print(f"  backend mismatch beyond tolerance at n={n}", file=sys.stderr)
            return False
    return True


def bench_triplets(cases, repeats):
    print(f"\n{'basis':>16} {'compiled':>12} {'python':>12} {'speedup':>8} {'equal':>6}")
    for statistics, d, m in cases:
        basis = enumerate_basis(statistics, d, m)
        args = (basis.occs, basis.grade_offsets, statistics == "fermi")
        tc_out, tc = time_call(lambda: _core.creation_triplets(*args), repeats)
        tp_out, tp = time_call(lambda: _core_py.creation_triplets(*args), repeats)
        same = all(
            np.array_equal(a, b)
            for mode_c, mode_p in zip(tc_out, tp_out)
            for a, b in zip(mode_c, mode_p)
        )
        label = f"{statistics}({d},{m})"
        print(f"{label:>16} {tc * 1e3:>10.2f}ms {tp * 1e3:>10.2f}ms "
              f"{tp / tc:>7.1f}x {str(same):>6}")
        if not same:
            print(f"  triplet mismatch for {label}", file=sys.stderr)
            return False
    return True


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="4,6,8,10",
                        help="permanent matrix sizes, comma separated")
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    if _core is None:
        print("compiled extension not built; nothing to compare", file=sys.stderr)
        return 1
    sizes = [int(s) for s in args.sizes.split(",")]
    rng = np.random.default_rng(args.seed)
    ok = bench_permanent(sizes, args.repeats, rng)
    cases = [("bose", 6, 4), ("bose", 10, 3), ("fermi", 12, 6)]
    ok = bench_triplets(cases, args.repeats) and ok
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
