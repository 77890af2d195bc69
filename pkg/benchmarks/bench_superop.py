"""Compiled vs pure-Python assembly of the real Liouvillian block, and the
steady-state solve with each sparse backend.

    python3 benchmarks/bench_superop.py [--cutoffs 32,64,128] [--repeat 3]
"""
import argparse
import time

import numpy as np
import scipy.sparse as sp

from rabi_dpt import _linalg, _superop
from rabi_dpt.liouvillian import ModelParams, open_qrm_liouvillian
from rabi_dpt.operators import FockSpace


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def bench_assembly(cutoffs, repeat):
    p = ModelParams.from_ratios(eta=50, g=np.sqrt(1.04), kappa_ratio=0.2, gamma_d_ratio=7e-3)
    print(f"assembly of the even block (open QRM with dephasing); kernel at import: {_superop.KERNEL}")
    print(f"{'cutoff':>7} {'block size':>11} {'nnz':>10} {'python [s]':>11} {'compiled [s]':>13} {'speedup':>8}")
    for c in cutoffs:
        L = open_qrm_liouvillian(p, FockSpace(c))
        t_py, blk = best_of(lambda: _superop.real_block(L, 1, kernel="python"), repeat)
        if _superop.KERNEL == "compiled":
            t_c, blk_c = best_of(lambda: _superop.real_block(L, 1, kernel="compiled"), repeat)
            diff = abs(blk.matrix - blk_c.matrix).max()
            assert diff < 1e-12, diff
            speed = f"{t_py / t_c:8.1f}"
            t_c = f"{t_c:13.3f}"
        else:
            t_c, speed = f"{'n/a':>13}", f"{'n/a':>8}"
        print(f"{c:7d} {blk.size:11d} {blk.matrix.nnz:10d} {t_py:11.3f} {t_c} {speed}", flush=True)


def bench_solve(cutoffs, repeat):
    p = ModelParams.from_ratios(eta=50, g=np.sqrt(1.04), kappa_ratio=0.2)
    rhs_cache = {}
    print(f"\nfactorize + solve of the steady-state system; default backend: {_linalg.BACKEND}")
    backends = ["superlu"] + (["pardiso"] if _linalg.BACKEND == "pardiso" else [])
    print(f"{'cutoff':>7} " + " ".join(f"{b + ' [s]':>13}" for b in backends))
    for c in cutoffs:
        blk = open_qrm_liouvillian(p, FockSpace(c)).real_block(1)
        # the system steady_state factorizes: trace condition in place of row 0
        A = sp.vstack([sp.csr_matrix(blk.trace_row()), blk.matrix[1:]], format="csr")
        b = rhs_cache.setdefault(A.shape[0], np.random.default_rng(0).standard_normal(A.shape[0]))
        row = []
        for name in backends:
            t, _ = best_of(lambda: _linalg.Factorization(A, backend=name).solve(b), repeat)
            row.append(f"{t:13.3f}")
        print(f"{c:7d} " + " ".join(row), flush=True)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cutoffs", default="32,64,128")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    cutoffs = [int(c) for c in args.cutoffs.split(",")]
    bench_assembly(cutoffs, args.repeat)
    bench_solve(cutoffs, args.repeat)


if __name__ == "__main__":
    main()
