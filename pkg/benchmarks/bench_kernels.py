"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--n 4096] [--repeat 5]

Part one calls both variants of each kernel in one process (numba must be
installed).  Part two times an end-to-end eigenvalue solve and a short
evolution in fresh interpreters, once per value of SBWAVE_DISABLE_NUMBA.
"""
import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from sbwave import kernels
from sbwave.spectral import OpKind, assemble_operator
from sbwave.waveforms import build_profile

END_TO_END = """
import json, time
from sbwave._accel import backend
from sbwave.evolve import IntegratorConfig, init_state, run
from sbwave.spectral import OpKind, assemble_operator, eigen_lowest
from sbwave.waveforms import build_profile
p = build_profile(1.0, 3.0, -0.05, 0.0, gamma=0.0, n_points={n})
op = assemble_operator(OpKind.L1, p)
eigen_lowest(op, 1)
t0 = time.perf_counter(); eigen_lowest(op, 3); t_eig = time.perf_counter() - t0
s = init_state(p)
run(s, p.phys, IntegratorConfig(dt=1e-2, record_every=10), 0.1)
t0 = time.perf_counter(); run(s, p.phys, IntegratorConfig(dt=1e-3, record_every=500), 1.0); t_run = time.perf_counter() - t0
print(json.dumps({{"backend": backend(), "eigen_lowest_k3": t_eig, "evolve_1000_steps": t_run}}))
"""


def best_of(fn, repeat):
    fn()  # compile / warm caches
    number = max(1, int(0.2 / max(timeit.timeit(fn, number=1), 1e-7)))
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def kernel_cases(n):
    prof = build_profile(1.0, 3.0, -0.05, 0.0, gamma=0.0, n_points=n)
    op = assemble_operator(OpKind.L1, prof)
    d, o, md, mo = op.diag, op.offdiag, op.mass_diag, op.mass_off
    lo, hi = kernels.pencil_bounds(d, o, md, mo)
    shifts = np.linspace(lo, hi, 64)
    rhs = np.random.default_rng(0).standard_normal(d.shape[0])
    shifted = d - 0.5 * (lo + hi)
    rng = np.random.default_rng(1)
    eps = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    field = rng.standard_normal(n)
    return {
        "sturm_count (64 shifts)": lambda f: f(d, o, md, mo, shifts),
        "bisect_lowest (k=3)": lambda f: f(d, o, md, mo, 3, lo, hi, 1e-12),
        "tridiag_solve": lambda f: f(shifted, o, rhs),
        "phase_rotate": lambda f: f(eps, field, 0.5, 1e-3),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=4096)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    print(f"kernels at N = {args.n}")
    if not kernels.HAVE_NUMBA:
        print("  numba disabled or missing: in-process comparison skipped")
    else:
        print(f"  {'kernel':<26}{'numba':>12}{'numpy':>12}{'speedup':>10}")
        for name, case in kernel_cases(args.n).items():
            base = name.split()[0]
            t_jit = best_of(lambda: case(getattr(kernels, base + "_loop")), args.repeat)
            t_np = best_of(lambda: case(getattr(kernels, base + "_numpy")), args.repeat)
            print(f"  {name:<26}{t_jit * 1e3:>10.3f}ms{t_np * 1e3:>10.3f}ms{t_np / t_jit:>9.1f}x")

    print("end to end (fresh interpreter per backend)")
    for flag in ("0", "1"):
        env = dict(os.environ, SBWAVE_DISABLE_NUMBA=flag)
        proc = subprocess.run([sys.executable, "-c", END_TO_END.format(n=args.n)], env=env,
                              capture_output=True, text=True, check=True)
        res = json.loads(proc.stdout.strip().splitlines()[-1])
        print(f"  {res['backend']:<8} eigen_lowest k=3 {res['eigen_lowest_k3'] * 1e3:9.2f} ms"
              f"   evolve 1000 steps {res['evolve_1000_steps']:7.3f} s")


if __name__ == "__main__":
    main()
