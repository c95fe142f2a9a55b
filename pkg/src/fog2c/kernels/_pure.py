"""Pure-Python kernels. The Cython module ``_ckernels`` mirrors these line for line."""
from __future__ import annotations

import math

import numpy as np

GOLDEN_ITERS = 90
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_SLACK = 1e-12
_SLOT_EPS = 1e-9


def _split_energy(s, size, a, pc, bw, rate_max, rate_e, n_ops, c, p_static, kappa, alpha,
                  f_min, f_max, f_e, w_cpu, budget):
    t_w = s * budget
    t_c = budget - t_w
    if t_w <= 0.0 or t_c <= 0.0:
        return math.inf, 0.0, 0.0
    r_lo = size / t_w
    if r_lo > rate_max * (1.0 + _SLACK):
        return math.inf, 0.0, 0.0
    r = rate_e
    if r < r_lo:
        r = r_lo
    if r > rate_max:
        r = rate_max
    x = r / bw
    if x > 1000.0:
        return math.inf, 0.0, 0.0
    e_w = (a * (math.pow(2.0, x) - 1.0) + pc) * size / r
    f_lo = n_ops / (c * t_c)
    if f_lo > f_max * (1.0 + _SLACK):
        return math.inf, 0.0, 0.0
    if f_lo < f_min:
        f_lo = f_min
    f = f_e
    if f < f_lo:
        f = f_lo
    if f > f_max:
        f = f_max
    e_c = w_cpu * (p_static + kappa * math.pow(f, alpha)) * n_ops / (c * f)
    return e_w + e_c, r, f


def split_search(size, a, pc, bw, rate_max, rate_e, n_ops, c, p_static, kappa, alpha,
                 f_min, f_max, w_cpu, budget):
    """Joint rate/frequency choice for one offload candidate.

    Splits ``budget`` seconds into a transmission share ``s`` and a compute
    share ``1 - s``; for a fixed split both the energy-optimal rate and the
    energy-optimal frequency are clamps of their unconstrained optima, and the
    objective

        (a*(2**(R/bw) - 1) + pc) * size/R + w_cpu*(p_static + kappa*f**alpha) * n_ops/(c*f)

    is convex in ``s``, so a golden-section search finds the global minimum.

    Returns ``(objective, rate, frequency)``; objective is ``inf`` when no
    split meets the budget.
    """
    if budget <= 0.0:
        return math.inf, 0.0, 0.0
    if kappa > 0.0:
        f_e = math.pow(p_static / ((alpha - 1.0) * kappa), 1.0 / alpha)
    else:
        f_e = math.inf
    s_lo = size / (rate_max * budget)
    s_hi = 1.0 - n_ops / (c * f_max * budget)
    if s_lo > s_hi:
        return math.inf, 0.0, 0.0
    args = (size, a, pc, bw, rate_max, rate_e, n_ops, c, p_static, kappa, alpha,
            f_min, f_max, f_e, w_cpu, budget)
    best = _split_energy(s_lo, *args)
    cand = _split_energy(s_hi, *args)
    if cand[0] < best[0]:
        best = cand
    lo = s_lo
    hi = s_hi
    x1 = hi - _INVPHI * (hi - lo)
    x2 = lo + _INVPHI * (hi - lo)
    e1 = _split_energy(x1, *args)
    e2 = _split_energy(x2, *args)
    for _ in range(GOLDEN_ITERS):
        if e1[0] <= e2[0]:
            hi = x2
            x2 = x1
            e2 = e1
            x1 = hi - _INVPHI * (hi - lo)
            e1 = _split_energy(x1, *args)
        else:
            lo = x1
            x1 = x2
            e1 = e2
            x2 = lo + _INVPHI * (hi - lo)
            e2 = _split_energy(x2, *args)
    if e1[0] < best[0]:
        best = e1
    if e2[0] < best[0]:
        best = e2
    return best


def fifo_pipeline(gen, slot, hop_service, hop_delay, cpu_service):
    """Slotted TX server -> wired hops -> CPU, every stage FIFO.

    Each request occupies exactly one slot of length ``slot`` on a fixed grid
    starting at t = 0, then each wired hop (serialisation ``hop_service[j]``
    occupies the hop, ``hop_delay[j]`` is pure delay), then the CPU for
    ``cpu_service`` seconds.

    Returns arrays ``(tx_start, hop_start, cpu_arrival, cpu_start, cpu_end)``;
    ``hop_start`` has shape ``(n, n_hops)``.
    """
    gen = np.asarray(gen, dtype=np.float64)
    hop_service = np.asarray(hop_service, dtype=np.float64)
    hop_delay = np.asarray(hop_delay, dtype=np.float64)
    n = gen.shape[0]
    n_hops = hop_service.shape[0]
    tx_start = np.empty(n)
    hop_start = np.empty((n, n_hops))
    cpu_arrival = np.empty(n)
    cpu_start = np.empty(n)
    cpu_end = np.empty(n)
    hop_free = [0.0] * n_hops
    last_slot = -1
    cpu_free = 0.0
    for i in range(n):
        k = int(math.ceil(gen[i] / slot - _SLOT_EPS))
        if k <= last_slot:
            k = last_slot + 1
        last_slot = k
        tx_start[i] = k * slot
        t = (k + 1) * slot
        for j in range(n_hops):
            start = t if t > hop_free[j] else hop_free[j]
            hop_start[i, j] = start
            hop_free[j] = start + hop_service[j]
            t = hop_free[j] + hop_delay[j]
        cpu_arrival[i] = t
        start = t if t > cpu_free else cpu_free
        cpu_start[i] = start
        cpu_free = start + cpu_service
        cpu_end[i] = cpu_free
    return tx_start, hop_start, cpu_arrival, cpu_start, cpu_end
