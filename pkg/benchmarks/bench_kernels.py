"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 20] [--end-to-end]

The end-to-end mode runs one discovery in a subprocess per backend, since the
backend is fixed at import time by ``BANG_DISABLE_NUMBA``.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from bang import _kernels

SIZES = (5_000, 25_000, 100_000)

E2E = """
import time
import numpy as np
from bang import discover, DiscoveryConfig, _kernels
from bang.named_graphs import CONFOUNDED_CHAIN
from bang.sem import draw_parameters, sample_data
rng = np.random.default_rng(0)
Y = sample_data(draw_parameters(CONFOUNDED_CHAIN, signed=False, rng=rng), "gamma", {n}, rng)
discover(Y[:2000])  # warm up / compile
t = time.perf_counter()
res = discover(Y, DiscoveryConfig(alpha=0.001))
print(_kernels.USE_NUMBA, time.perf_counter() - t, res.test_count)
"""


def best(fn, repeat):
    fn()  # compile / warm caches
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def kernel_table(repeat):
    rng = np.random.default_rng(0)
    print(f"{'kernel':<14}{'n':>8}{'numpy ms':>11}{'numba ms':>11}{'speedup':>9}")
    for n in SIZES:
        w = rng.standard_normal((n, 6))
        lam = rng.normal(scale=0.01, size=6)
        gc = rng.standard_normal((3, n))
        gv = rng.standard_normal(n)
        cases = {
            "el_terms": (lambda: _kernels.el_terms_numpy(w, lam, 1 / n),
                         lambda: _kernels.el_terms_numba(w, lam, 1 / n)),
            "el_objective": (lambda: _kernels.el_objective_numpy(w, lam, 1 / n),
                             lambda: _kernels.el_objective_numba(w, lam, 1 / n)),
            "moment_rows": (lambda: _kernels.moment_rows_numpy(gc, gv, 3),
                            lambda: _kernels.moment_rows_numba(gc, gv, 3)),
        }
        for name, (f_np, f_nb) in cases.items():
            a, b = best(f_np, repeat), best(f_nb, repeat)
            print(f"{name:<14}{n:>8}{a * 1e3:>11.3f}{b * 1e3:>11.3f}{a / b:>9.2f}")


def end_to_end(n):
    for flag in ("1", "0"):
        env = dict(os.environ, BANG_DISABLE_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", E2E.format(n=n)], env=env,
                             capture_output=True, text=True, check=True).stdout.split()
        label = "numba" if out[0] == "True" else "numpy"
        print(f"discover n={n} ({label}): {float(out[1]):.2f}s, {out[2]} tests")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--end-to-end", action="store_true")
    ap.add_argument("--n", type=int, default=100_000)
    args = ap.parse_args()
    if not _kernels.NUMBA_AVAILABLE:
        sys.exit("numba is not installed; nothing to compare")
    kernel_table(args.repeat)
    if args.end_to_end:
        end_to_end(args.n)


if __name__ == "__main__":
    main()
