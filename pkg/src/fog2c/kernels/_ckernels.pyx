# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of :mod:`fog2c.kernels._pure`; same algorithms, same operation order."""
import numpy as np
from libc.math cimport pow, ceil, sqrt, INFINITY

cdef int GOLDEN_ITERS = 90
cdef double _SLACK = 1e-12
cdef double _SLOT_EPS = 1e-9


cdef struct SplitPoint:
    double energy
    double rate
    double freq


cdef inline SplitPoint _split_energy(double s, double size, double a, double pc, double bw,
                                     double rate_max, double rate_e, double n_ops, double c,
                                     double p_static, double kappa, double alpha, double f_min,
                                     double f_max, double f_e, double w_cpu, double budget) nogil:
    cdef SplitPoint out
    cdef double t_w = s * budget
    cdef double t_c = budget - t_w
    cdef double r_lo, r, x, e_w, f_lo, f, e_c
    out.energy = INFINITY
    out.rate = 0.0
    out.freq = 0.0
    if t_w <= 0.0 or t_c <= 0.0:
        return out
    r_lo = size / t_w
    if r_lo > rate_max * (1.0 + _SLACK):
        return out
    r = rate_e
    if r < r_lo:
        r = r_lo
    if r > rate_max:
        r = rate_max
    x = r / bw
    if x > 1000.0:
        return out
    e_w = (a * (pow(2.0, x) - 1.0) + pc) * size / r
    f_lo = n_ops / (c * t_c)
    if f_lo > f_max * (1.0 + _SLACK):
        return out
    if f_lo < f_min:
        f_lo = f_min
    f = f_e
    if f < f_lo:
        f = f_lo
    if f > f_max:
        f = f_max
    e_c = w_cpu * (p_static + kappa * pow(f, alpha)) * n_ops / (c * f)
    out.energy = e_w + e_c
    out.rate = r
    out.freq = f
    return out


def split_search(double size, double a, double pc, double bw, double rate_max, double rate_e,
                 double n_ops, double c, double p_static, double kappa, double alpha,
                 double f_min, double f_max, double w_cpu, double budget):
    cdef double invphi = (sqrt(5.0) - 1.0) / 2.0
    cdef double f_e, s_lo, s_hi, lo, hi, x1, x2
    cdef SplitPoint best, cand, e1, e2
    cdef int it
    if budget <= 0.0:
        return INFINITY, 0.0, 0.0
    if kappa > 0.0:
        f_e = pow(p_static / ((alpha - 1.0) * kappa), 1.0 / alpha)
    else:
        f_e = INFINITY
    s_lo = size / (rate_max * budget)
    s_hi = 1.0 - n_ops / (c * f_max * budget)
    if s_lo > s_hi:
        return INFINITY, 0.0, 0.0
    with nogil:
        best = _split_energy(s_lo, size, a, pc, bw, rate_max, rate_e, n_ops, c, p_static, kappa,
                             alpha, f_min, f_max, f_e, w_cpu, budget)
        cand = _split_energy(s_hi, size, a, pc, bw, rate_max, rate_e, n_ops, c, p_static, kappa,
                             alpha, f_min, f_max, f_e, w_cpu, budget)
        if cand.energy < best.energy:
            best = cand
        lo = s_lo
        hi = s_hi
        x1 = hi - invphi * (hi - lo)
        x2 = lo + invphi * (hi - lo)
        e1 = _split_energy(x1, size, a, pc, bw, rate_max, rate_e, n_ops, c, p_static, kappa,
                           alpha, f_min, f_max, f_e, w_cpu, budget)
        e2 = _split_energy(x2, size, a, pc, bw, rate_max, rate_e, n_ops, c, p_static, kappa,
                           alpha, f_min, f_max, f_e, w_cpu, budget)
        for it in range(GOLDEN_ITERS):
            if e1.energy <= e2.energy:
                hi = x2
                x2 = x1
                e2 = e1
                x1 = hi - invphi * (hi - lo)
                e1 = _split_energy(x1, size, a, pc, bw, rate_max, rate_e, n_ops, c, p_static,
                                   kappa, alpha, f_min, f_max, f_e, w_cpu, budget)
            else:
                lo = x1
                x1 = x2
                e1 = e2
                x2 = lo + invphi * (hi - lo)
                e2 = _split_energy(x2, size, a, pc, bw, rate_max, rate_e, n_ops, c, p_static,
                                   kappa, alpha, f_min, f_max, f_e, w_cpu, budget)
        if e1.energy < best.energy:
            best = e1
        if e2.energy < best.energy:
            best = e2
    return best.energy, best.rate, best.freq


def fifo_pipeline(gen, double slot, hop_service, hop_delay, double cpu_service):
    cdef double[::1] g = np.ascontiguousarray(gen, dtype=np.float64)
    cdef double[::1] hs = np.ascontiguousarray(hop_service, dtype=np.float64)
    cdef double[::1] hd = np.ascontiguousarray(hop_delay, dtype=np.float64)
    cdef Py_ssize_t n = g.shape[0]
    cdef Py_ssize_t n_hops = hs.shape[0]
    tx_start_a = np.empty(n)
    hop_start_a = np.empty((n, n_hops))
    cpu_arrival_a = np.empty(n)
    cpu_start_a = np.empty(n)
    cpu_end_a = np.empty(n)
    hop_free_a = np.zeros(n_hops)
    cdef double[::1] tx_start = tx_start_a
    cdef double[:, ::1] hop_start = hop_start_a
    cdef double[::1] cpu_arrival = cpu_arrival_a
    cdef double[::1] cpu_start = cpu_start_a
    cdef double[::1] cpu_end = cpu_end_a
    cdef double[::1] hop_free = hop_free_a
    cdef long long last_slot = -1
    cdef long long k
    cdef double cpu_free = 0.0
    cdef double t, start
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(n):
            k = <long long> ceil(g[i] / slot - _SLOT_EPS)
            if k <= last_slot:
                k = last_slot + 1
            last_slot = k
            tx_start[i] = k * slot
            t = (k + 1) * slot
            for j in range(n_hops):
                start = t if t > hop_free[j] else hop_free[j]
                hop_start[i, j] = start
                hop_free[j] = start + hs[j]
                t = hop_free[j] + hd[j]
            cpu_arrival[i] = t
            start = t if t > cpu_free else cpu_free
            cpu_start[i] = start
            cpu_free = start + cpu_service
            cpu_end[i] = cpu_free
    return tx_start_a, hop_start_a, cpu_arrival_a, cpu_start_a, cpu_end_a
