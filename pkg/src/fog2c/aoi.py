"""Age of Information for a periodic source feeding a slotted uplink and a fog CPU.

Pipeline: the device's TX FIFO sends each request in exactly one slot at the
least power that delivers ``size`` bits in ``slot`` seconds; optional wired
hops follow (each a FIFO server); the fog CPU serves its FIFO at a fixed DVFS
frequency. The AoI at time t is ``t - g`` where g is the generation time of
the newest request whose result has been delivered (a virtual update
generated at t = 0 seeds the process). Mean AoI is the exact integral of that
sawtooth over ``[warmup, horizon]`` divided by the window length.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .errors import ConfigError, InfeasibleError
from .models import ComputeModel, WiredHopModel, WirelessParametricModel, parametric_tx_power
from .workload import stream_length


@dataclass(frozen=True)
class AoiScenario:
    rate: float  # requests/s
    slot: float  # s
    size: float  # bits per request
    intensity: float  # ops per bit
    wireless: WirelessParametricModel
    compute: ComputeModel
    horizon: float
    warmup: float | None = None  # default 10% of horizon
    wired: tuple[WiredHopModel, ...] = ()
    idle_power_tx: float = 0.0
    idle_power_cpu: float = 0.0

    def __post_init__(self):
        errs = []
        if not self.rate > 0:
            errs.append("rate must be > 0")
        if not self.slot > 0:
            errs.append("slot must be > 0")
        if not (self.size > 0 and self.intensity > 0):
            errs.append("size and intensity must be > 0")
        if not self.horizon > self.start >= 0:
            errs.append("need horizon > warmup >= 0")
        if self.idle_power_tx < 0 or self.idle_power_cpu < 0:
            errs.append("idle powers must be >= 0")
        if errs:
            raise ConfigError(errs)

    @property
    def start(self) -> float:
        return 0.1 * self.horizon if self.warmup is None else self.warmup

    @property
    def n_ops(self) -> float:
        return self.size * self.intensity

    def with_rate(self, rate: float) -> "AoiScenario":
        return replace(self, rate=rate)


@dataclass
class AoiSample:
    """Per-request event times (arrays aligned by request index)."""

    gen: np.ndarray
    tx_start: np.ndarray
    tx_end: np.ndarray
    hop_start: np.ndarray  # (n, n_hops)
    cpu_arrival: np.ndarray
    cpu_start: np.ndarray
    cpu_end: np.ndarray

    @property
    def completion(self) -> np.ndarray:
        return self.cpu_end


@dataclass
class AoiResult:
    rate: float
    mean_aoi: float
    mean_power: float
    tx_utilization: float
    cpu_utilization: float
    diverged: bool
    frequency: float
    tx_power: float  # W while a slot is in use
    cpu_power: float  # W while the CPU is busy
    n_generated: int
    n_completed: int
    n_in_flight: int
    n_queued: int  # generated but not yet started transmission at the horizon
    samples: AoiSample | None = None


def _hop_service(h: WiredHopModel, size: float) -> float:
    return 0.0 if math.isinf(h.capacity) else size / h.capacity


def throughput_cap(sc: AoiScenario) -> float:
    """Max rate the network stages (slot grid, wired hops) can pass to the CPU."""
    cap = 1.0 / sc.slot
    for h in sc.wired:
        s = _hop_service(h, sc.size)
        if s > 0:
            cap = min(cap, 1.0 / s)
    return cap


def capacity(sc: AoiScenario) -> float:
    """Largest sustainable generation rate (slot grid, hops, CPU at f_max)."""
    return min(throughput_cap(sc), sc.compute.max_throughput / sc.n_ops)


def operating_frequency(sc: AoiScenario) -> float:
    """Energy-optimal clock, raised to keep the CPU queue stable.

    The stability floor uses the rate actually reaching the CPU, which the
    slot grid and wired hops cap, so the clock stops rising once the uplink
    saturates.
    """
    cm = sc.compute
    arrival = min(sc.rate, throughput_cap(sc))
    floor = max(cm.f_min, arrival * sc.n_ops / cm.ops_per_cycle)
    return min(max(cm.efficient_frequency, floor), cm.f_max)


def _overlap(start: np.ndarray, end: np.ndarray, lo: float, hi: float) -> np.ndarray:
    return np.clip(np.minimum(end, hi) - np.maximum(start, lo), 0.0, None)


def aoi_integral(gen: np.ndarray, delivered: np.ndarray, lo: float, hi: float) -> float:
    """Exact integral of the AoI sawtooth over ``[lo, hi]``.

    ``delivered`` must be non-decreasing (FIFO delivery).
    """
    before = delivered <= lo
    g0 = float(gen[before][-1]) if before.any() else 0.0
    inside = (delivered > lo) & (delivered < hi)
    b = delivered[inside]
    edges = np.concatenate(([lo], b, [hi]))
    gs = np.concatenate(([g0], gen[inside]))
    s = edges[:-1]
    e = edges[1:]
    return float(np.sum((e - s) * (0.5 * (e + s) - gs)))


def simulate(scenario: AoiScenario, trace: bool = False) -> AoiResult:
    sc = scenario
    w = sc.wireless
    tx_rate = sc.size / sc.slot
    if tx_rate > w.rate_max * (1 + 1e-12):
        raise ConfigError(f"a {sc.size:g}-bit request needs {tx_rate:g} b/s to fit one slot; "
                          f"rate_max is {w.rate_max:g} b/s")
    p_tx = parametric_tx_power(w, min(tx_rate, w.rate_max)) / w.pa_efficiency \
        + w.circuit_power_tx + w.circuit_power_rx
    f = operating_frequency(sc)
    cm = sc.compute
    cpu_service = sc.n_ops / (cm.ops_per_cycle * f)
    p_cpu = cm.power(f)
    hop_service = np.array([_hop_service(h, sc.size) for h in sc.wired], dtype=float)
    hop_delay = np.array([h.prop_delay + h.proc_delay for h in sc.wired], dtype=float)

    n = stream_length(sc.rate, sc.horizon)
    gen = np.arange(n, dtype=float) / sc.rate
    tx_start, hop_start, cpu_arrival, cpu_start, cpu_end = kernels.fifo_pipeline(
        gen, sc.slot, hop_service, hop_delay, cpu_service)
    tx_end = tx_start + sc.slot

    lo, hi = sc.start, sc.horizon
    window = hi - lo
    mean_aoi = aoi_integral(gen, cpu_end, lo, hi) / window

    busy_tx = float(_overlap(tx_start, tx_end, lo, hi).sum())
    busy_cpu = float(_overlap(cpu_start, cpu_end, lo, hi).sum())
    energy = p_tx * busy_tx + p_cpu * busy_cpu
    for j, h in enumerate(sc.wired):
        starts = hop_start[:, j]
        if hop_service[j] > 0:
            energy += h.eps * sc.size / hop_service[j] * float(
                _overlap(starts, starts + hop_service[j], lo, hi).sum())
        else:
            energy += h.eps * sc.size * int(((starts >= lo) & (starts < hi)).sum())
    energy += sc.idle_power_tx * (window - busy_tx) + sc.idle_power_cpu * (window - busy_cpu)

    completed = int((cpu_end <= hi).sum())
    queued = int((tx_start >= hi).sum())
    in_flight = n - completed - queued

    mid = 0.5 * (lo + hi)

    def backlog(t):
        return int((gen <= t).sum()) - int((cpu_end <= t).sum())

    tx_util = busy_tx / window
    cpu_util = busy_cpu / window
    # a stable deterministic pipeline keeps its backlog bounded; an overloaded
    # one grows it linearly while a server stays saturated
    diverged = (backlog(hi) - backlog(mid) >= 3) and max(tx_util, cpu_util) > 0.99

    samples = None
    if trace:
        samples = AoiSample(gen, tx_start, tx_end, hop_start, cpu_arrival, cpu_start, cpu_end)
    return AoiResult(
        rate=sc.rate, mean_aoi=mean_aoi, mean_power=energy / window,
        tx_utilization=tx_util, cpu_utilization=cpu_util, diverged=diverged, frequency=f,
        tx_power=p_tx, cpu_power=p_cpu, n_generated=n, n_completed=completed,
        n_in_flight=in_flight, n_queued=queued, samples=samples,
    )


def _simulate_at(args):
    scenario, rate = args
    return simulate(scenario.with_rate(rate))


def sweep_rate(scenario: AoiScenario, rates, workers: int = 1) -> list[tuple[float, AoiResult]]:
    """Independent runs over ``rates``, returned in increasing rate order."""
    rates = sorted(float(r) for r in rates)
    if not rates:
        raise ConfigError("rate grid must be non-empty")
    jobs = [(scenario, r) for r in rates]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_simulate_at, jobs))
    else:
        results = [_simulate_at(j) for j in jobs]
    return list(zip(rates, results))


def optimal_rate_for_aoi(scenario: AoiScenario, aoi_max: float, rate_grid, sweep=None) -> float:
    """Least-power grid rate whose mean AoI stays within ``aoi_max`` (ties: lower rate).

    Pass a precomputed ``sweep`` (from :func:`sweep_rate`) to skip re-simulation.
    """
    if sweep is None:
        sweep = sweep_rate(scenario, rate_grid)
    ok = [(res.mean_power, lam) for lam, res in sweep if res.mean_aoi <= aoi_max]
    if not ok:
        raise InfeasibleError(f"no rate on the grid reaches a mean AoI of {aoi_max:g} s")
    return min(ok)[1]
