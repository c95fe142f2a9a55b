import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fog2c import kernels
from fog2c.kernels import _pure
from fog2c.models import energy_optimal_rate

COMPILED = "cython" in kernels.BACKENDS
needs_c = pytest.mark.skipif(not COMPILED, reason="compiled kernels not built")


def split_args(rng):
    bw = 10 ** rng.uniform(5, 7.5)
    a = 10 ** rng.uniform(-14, -4)
    pc = rng.uniform(0, 1)
    return dict(size=10 ** rng.uniform(3, 7.5), a=a, pc=pc, bw=bw, rate_max=bw * rng.uniform(1, 20),
                rate_e=energy_optimal_rate(a, pc, bw), n_ops=10 ** rng.uniform(5, 10),
                c=float(rng.choice([1, 4])), p_static=rng.uniform(0, 20), kappa=10 ** rng.uniform(-28, -26),
                alpha=rng.uniform(2, 4), f_min=1e8, f_max=rng.uniform(1e9, 4e9),
                w_cpu=float(rng.choice([0.0, 1.0])), budget=10 ** rng.uniform(-2, 1))


@needs_c
@settings(max_examples=300, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_split_search_backends_agree(seed):
    args = split_args(np.random.default_rng(seed))
    py = kernels.BACKENDS["python"].split_search(**args)
    cy = kernels.BACKENDS["cython"].split_search(**args)
    if math.isinf(py[0]):
        assert math.isinf(cy[0])
    else:
        assert cy == pytest.approx(py, rel=1e-9)


@needs_c
@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n_hops=st.integers(0, 3))
def test_fifo_pipeline_backends_agree(seed, n_hops):
    rng = np.random.default_rng(seed)
    lam = 10 ** rng.uniform(1, 4)
    gen = np.arange(int(rng.integers(1, 500))) / lam
    hs = rng.uniform(0, 2e-3, n_hops)
    hd = rng.uniform(0, 2e-3, n_hops)
    cpu = rng.uniform(1e-5, 3e-3)
    a = kernels.BACKENDS["python"].fifo_pipeline(gen, 1e-3, hs, hd, cpu)
    b = kernels.BACKENDS["cython"].fifo_pipeline(gen, 1e-3, hs, hd, cpu)
    for x, y in zip(a, b):
        assert np.array_equal(np.asarray(x), np.asarray(y))


def test_split_search_infeasible_and_golden_optimum():
    rng = np.random.default_rng(0)
    args = split_args(rng)
    assert math.isinf(_pure.split_search(**dict(args, budget=0.0))[0])
    # budget too short for both stages at full speed
    tight = args["size"] / args["rate_max"] + args["n_ops"] / (args["c"] * args["f_max"])
    assert math.isinf(_pure.split_search(**dict(args, budget=0.99 * tight))[0])
    # the returned objective is no worse than a dense scan of the split
    args = dict(args, budget=3 * tight)
    obj, _, _ = _pure.split_search(**args)
    s_lo = args["size"] / (args["rate_max"] * args["budget"])
    s_hi = 1 - args["n_ops"] / (args["c"] * args["f_max"] * args["budget"])
    f_e = (args["p_static"] / ((args["alpha"] - 1) * args["kappa"])) ** (1 / args["alpha"])
    rest = {k: args[k] for k in ("size", "a", "pc", "bw", "rate_max", "rate_e", "n_ops", "c", "p_static",
                                 "kappa", "alpha", "f_min", "f_max")}
    scan = min(_pure._split_energy(s, **rest, f_e=f_e, w_cpu=args["w_cpu"], budget=args["budget"])[0]
               for s in np.linspace(s_lo, s_hi, 20001))
    assert obj <= scan * (1 + 1e-9)


def test_backend_selection_env_override():
    code = "import fog2c.kernels as k; print(k.BACKEND)"
    env = dict(os.environ, FOG2C_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
    assert kernels.BACKEND in kernels.BACKENDS
