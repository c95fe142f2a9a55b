"""Compare the compiled and pure-Python kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--end-to-end]

Prints the best-of-``repeat`` time per call for each backend and the speedup.
``--end-to-end`` also times a 500-request scenario-b style allocation run
in a fresh interpreter per backend (``FOG2C_PURE_PYTHON`` toggles the choice).
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from fog2c import kernels
from fog2c.models import energy_optimal_rate


def split_cases(n=200, seed=0):
    rng = np.random.default_rng(seed)
    cases = []
    for _ in range(n):
        bw = 2e7
        a = 4e-21 * bw * 10 ** (rng.uniform(75, 100) / 10) / 0.35
        cases.append(dict(size=rng.uniform(1.6e7, 4.8e7), a=a, pc=0.3, bw=bw, rate_max=4e8,
                          rate_e=energy_optimal_rate(a, 0.3, bw), n_ops=rng.uniform(1.6e9, 4.8e9),
                          c=8.0, p_static=rng.uniform(6, 20), kappa=1e-27, alpha=3.0,
                          f_min=2e8, f_max=3e9, w_cpu=1.0, budget=0.5))
    return cases


def bench_split(mod, cases, repeat):
    def run():
        for c in cases:
            mod.split_search(**c)
    return min(timeit.repeat(run, number=1, repeat=repeat)) / len(cases)


def bench_fifo(mod, repeat, n=20_000):
    gen = np.arange(n) / 1500.0
    hs = np.array([1e-4, 2e-4])
    hd = np.array([5e-4, 1e-3])
    return min(timeit.repeat(lambda: mod.fifo_pipeline(gen, 1e-3, hs, hd, 6e-4),
                             number=1, repeat=repeat))


E2E = """
import time
from fog2c.allocator import SCENARIOS, run_scenario
from fog2c.config import load_config
from fog2c.seeding import stream
from fog2c.workload import sample_requests
from importlib import resources
cfg = load_config(str(resources.files("fog2c") / "configs" / "fig3.cfg"))
reqs = sample_requests(cfg.workload, 500, stream(0, "workload"))
t = time.perf_counter()
run_scenario(reqs, cfg.topology, cfg.strategies, SCENARIOS["b"].scope, 0)
print(time.perf_counter() - t)
"""


def end_to_end(pure: bool) -> float:
    env = dict(os.environ, FOG2C_PURE_PYTHON="1" if pure else "0")
    out = subprocess.run([sys.executable, "-c", E2E], env=env, check=True,
                         capture_output=True, text=True)
    return float(out.stdout.strip())


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--end-to-end", action="store_true")
    args = ap.parse_args()

    if "cython" not in kernels.BACKENDS:
        print("compiled kernels not built; only the pure-Python backend is available")
    cases = split_cases()
    rows = []
    for name, mod in kernels.BACKENDS.items():
        rows.append((name, bench_split(mod, cases, args.repeat), bench_fifo(mod, args.repeat)))
    print(f"{'backend':<8} {'split_search [us/call]':>24} {'fifo_pipeline 20k [ms]':>24}")
    for name, s, f in rows:
        print(f"{name:<8} {s * 1e6:>24.1f} {f * 1e3:>24.2f}")
    if len(rows) == 2:
        (_, s_py, f_py), (_, s_cy, f_cy) = rows
        print(f"speedup  {s_py / s_cy:>23.1f}x {f_py / f_cy:>23.1f}x")
    if args.end_to_end:
        t_py = end_to_end(pure=True)
        line = f"end-to-end 500 requests x 4 strategies: python {t_py:.2f} s"
        if "cython" in kernels.BACKENDS:
            t_cy = end_to_end(pure=False)
            line += f", cython {t_cy:.2f} s ({t_py / t_cy:.1f}x)"
        print(line)


if __name__ == "__main__":
    main()
