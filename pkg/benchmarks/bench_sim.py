"""Compare the numba and numpy simulation back-ends on a few designs.

    python3 benchmarks/bench_sim.py [--vectors 4096] [--repeat 3]

Both back-ends must produce identical products; the script prints wall time per
run (best of ``--repeat``, numba timed after a warm-up so compilation is not
counted).
"""
import argparse
import time

from mcim.arch import build
from mcim.config import MultiplierConfig
from mcim.harness import check_random
from mcim.netlist import kernels

DESIGNS = [
    dict(arch="star", width_a=16, width_b=16, ct=1, comp_kind="dadda"),
    dict(arch="fb", width_a=32, width_b=32, ct=4),
    dict(arch="ff", width_a=32, width_b=32, ct=2, comp_kind="dadda"),
    dict(arch="karatsuba", width_a=64, width_b=64, ct=3, comp_kind="dadda", fa_kind="3ca"),
    dict(arch="fb", width_a=128, width_b=128, ct=8),
]


def best_time(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--vectors", type=int, default=4096)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not kernels.NUMBA_AVAILABLE:
        print("numba is not importable; only the numpy back-end can run")
    print(f"{'design':34} {'cells':>7} {'numpy s':>9} {'numba s':>9} {'speedup':>8}")
    for raw in DESIGNS:
        d = build(MultiplierConfig.from_dict(raw))
        run = lambda: check_random(d, args.vectors, seed=7)
        kernels.set_backend("numpy")
        t_np, r_np = best_time(run, args.repeat)
        t_nb, r_nb = float("nan"), r_np
        if kernels.NUMBA_AVAILABLE:
            kernels.set_backend("numba")
            run()  # compile
            t_nb, r_nb = best_time(run, args.repeat)
        assert r_np.passed and r_nb.passed, d.name
        assert r_np.mismatches == r_nb.mismatches
        print(f"{d.name:34} {len(d.netlist.cells):7d} {t_np:9.3f} {t_nb:9.3f} {t_np / t_nb:7.1f}x")


if __name__ == "__main__":
    main()
