"""Energy and latency cost models for wireless links, wired hops and computation.

All quantities are SI: joules, seconds, hertz, bits, watts. Catalog values
quoted in pJ/b, kW or TFlop/s are converted where the catalog is built
(:mod:`fog2c.catalog`) or where a config is parsed (:mod:`fog2c.config`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from scipy.special import lambertw

from .errors import DomainError, InfeasibleError

K_BOLTZMANN = 1.380649e-23  # J/K
DEFAULT_TEMPERATURE = 290.0  # K, gives N0 = 4.0e-21 W/Hz
LN2 = math.log(2.0)

# relative slack for float comparisons against deadlines and bounds
_REL = 1e-12


def _check(cond: bool, msg: str) -> None:
    if not cond:
        raise DomainError(msg)


@dataclass(frozen=True)
class WirelessCatalogModel:
    """Measured link: linear per-bit energy, throughput, fixed and random delay."""

    eps_tx: float
    eps_rx: float
    rate: float
    base_latency: float = 0.0
    mac_mean_delay: float = 0.0

    def __post_init__(self):
        _check(self.eps_tx >= 0 and self.eps_rx >= 0, "per-bit energies must be >= 0")
        _check(self.rate > 0, "rate must be > 0")
        _check(self.base_latency >= 0, "base_latency must be >= 0")
        _check(self.mac_mean_delay >= 0, "mac_mean_delay must be >= 0")


@dataclass(frozen=True)
class WirelessParametricModel:
    """Shannon-inverted link model.

    Radiated power for rate R is ``N0 * B * (2**(R/B) - 1) * G`` with
    ``G = 10**(path_loss_db/10)``; the transmitter draws that power divided
    by the PA efficiency plus its circuit power, the receiver its circuit
    power.
    """

    bandwidth: float
    noise_density: float
    path_loss_db: float
    pa_efficiency: float
    circuit_power_tx: float
    circuit_power_rx: float
    rate_max: float

    def __post_init__(self):
        _check(self.bandwidth > 0, "bandwidth must be > 0")
        _check(self.noise_density > 0, "noise_density must be > 0")
        _check(0 < self.pa_efficiency <= 1, "pa_efficiency must lie in (0, 1]")
        _check(self.circuit_power_tx >= 0 and self.circuit_power_rx >= 0,
               "circuit powers must be >= 0")
        _check(0 < self.rate_max < math.inf, "rate_max must be finite and > 0")

    @property
    def noise_power_at_tx(self) -> float:
        """N0 * B * G: radiated power needed for one b/s/Hz of spectral efficiency."""
        return self.noise_density * self.bandwidth * 10 ** (self.path_loss_db / 10)


@dataclass(frozen=True)
class WiredHopModel:
    eps: float  # incremental J/b above idle
    capacity: float
    prop_delay: float = 0.0
    proc_delay: float = 0.0

    def __post_init__(self):
        _check(self.eps >= 0, "eps must be >= 0")
        _check(self.capacity > 0, "capacity must be > 0")
        _check(self.prop_delay >= 0 and self.proc_delay >= 0, "delays must be >= 0")


# zero-cost hop joining an access point to its collocated fog node
FREE_HOP = WiredHopModel(eps=0.0, capacity=math.inf)


@dataclass(frozen=True)
class ComputeModel:
    """A CPU under DVFS with power ``p_static + kappa * f**alpha``."""

    f_max: float
    f_min: float
    ops_per_cycle: float
    p_static: float
    kappa: float
    alpha: float = 3.0

    def __post_init__(self):
        _check(0 < self.f_min <= self.f_max, "need 0 < f_min <= f_max")
        _check(self.ops_per_cycle > 0, "ops_per_cycle must be > 0")
        _check(self.p_static >= 0, "p_static must be >= 0")
        _check(self.kappa >= 0, "kappa must be >= 0")
        _check(self.alpha > 1, "alpha must be > 1")

    def power(self, f: float) -> float:
        return self.p_static + self.kappa * f ** self.alpha

    @property
    def efficient_frequency(self) -> float:
        """Unconstrained minimiser of energy per operation, (p/((alpha-1)kappa))**(1/alpha)."""
        if self.kappa == 0:
            return math.inf
        return (self.p_static / ((self.alpha - 1) * self.kappa)) ** (1 / self.alpha)

    @property
    def max_throughput(self) -> float:
        return self.ops_per_cycle * self.f_max


@dataclass(frozen=True)
class ComputerSpec:
    name: str
    power: float  # W
    perf: float  # Flop/s

    def __post_init__(self):
        _check(self.power > 0 and self.perf > 0, "power and perf must be > 0")


def shannon_min_energy_per_bit(path_loss_db: float, temperature: float = DEFAULT_TEMPERATURE) -> float:
    """Infinite-bandwidth minimum transmit energy per bit, k_B*T*ln2*G."""
    _check(temperature > 0, "temperature must be > 0")
    return K_BOLTZMANN * temperature * LN2 * 10 ** (path_loss_db / 10)


def compute_energy_per_bit(spec: ComputerSpec, intensity: float) -> float:
    """Energy per input bit for a workload of ``intensity`` Flop per byte."""
    _check(intensity > 0, "intensity must be > 0")
    return spec.power / spec.perf * intensity / 8


def catalog_latency(model: WirelessCatalogModel, size: float, rng=None) -> float:
    """Serialisation + fixed latency, plus one Exp(mac_mean_delay) draw when rng is given."""
    t = size / model.rate + model.base_latency
    if rng is not None and model.mac_mean_delay > 0:
        t += float(rng.exponential(model.mac_mean_delay))
    return t


def wireless_cost_catalog(model: WirelessCatalogModel, size: float, side: str = "tx", rng=None):
    """Return ``(energy, latency)`` for ``size`` bits over a catalog link.

    ``side`` selects which end's energy is charged: "tx", "rx" or "both".
    The MAC delay is sampled only when ``rng`` is supplied.
    """
    _check(size >= 0, "size must be >= 0")
    if side == "tx":
        eps = model.eps_tx
    elif side == "rx":
        eps = model.eps_rx
    elif side == "both":
        eps = model.eps_tx + model.eps_rx
    else:
        raise DomainError(f"side must be tx, rx or both, not {side!r}")
    return eps * size, catalog_latency(model, size, rng)


def parametric_tx_power(model: WirelessParametricModel, rate: float) -> float:
    """Radiated power needed at the transmitter to sustain ``rate``."""
    _check(rate >= 0, "rate must be >= 0")
    if rate > model.rate_max * (1 + _REL):
        raise DomainError(f"rate {rate:g} b/s exceeds rate_max {model.rate_max:g} b/s")
    return model.noise_power_at_tx * math.expm1(rate / model.bandwidth * LN2)


def parametric_link_powers(model: WirelessParametricModel, rate: float) -> tuple[float, float]:
    """(transmitter, receiver) electrical power drawn while sending at ``rate``."""
    p_tx = parametric_tx_power(model, rate) / model.pa_efficiency + model.circuit_power_tx
    return p_tx, model.circuit_power_rx


def parametric_energy(model: WirelessParametricModel, size: float, rate: float) -> float:
    p_tx, p_rx = parametric_link_powers(model, rate)
    return (p_tx + p_rx) * size / rate


def energy_optimal_rate(radiated_coeff: float, circuit_power: float, bandwidth: float) -> float:
    """Unconstrained minimiser of ``(a*(2**(R/B)-1) + pc) / R``.

    Stationarity gives ``a*(e**x*(x-1) + 1) = pc`` with ``x = R*ln2/B``, solved
    by ``x = 1 + W((pc/a - 1)/e)`` on the principal Lambert-W branch.
    """
    if radiated_coeff <= 0:
        return math.inf
    if circuit_power <= 0:
        return 0.0
    y = circuit_power / radiated_coeff
    if y < 1e-6:
        # next to the branch point W loses precision; e**x*(x-1)+1 ~ x**2/2 there,
        # so start from sqrt(2y) and polish with Newton steps
        x = math.sqrt(2.0 * y)
        for _ in range(3):
            ex = math.exp(x)
            x -= (ex * (x - 1.0) + 1.0 - y) / (x * ex)
    else:
        x = 1.0 + float(lambertw((y - 1) / math.e).real)
    return max(x, 0.0) * bandwidth / LN2


def optimal_rate(model: WirelessParametricModel, size: float, latency_budget: float):
    """Energy-minimising rate for ``size`` bits delivered within ``latency_budget``.

    Returns ``(rate, energy, latency)``. Energy is convex in transmission time,
    so the unconstrained optimum is clamped into ``[size/budget, rate_max]``.
    """
    _check(size > 0, "size must be > 0")
    _check(latency_budget > 0, "latency_budget must be > 0")
    r_min = size / latency_budget
    if r_min > model.rate_max * (1 + _REL):
        raise InfeasibleError(
            f"need {r_min:g} b/s to meet the budget but rate_max is {model.rate_max:g} b/s")
    a = model.noise_power_at_tx / model.pa_efficiency
    pc = model.circuit_power_tx + model.circuit_power_rx
    r = min(max(energy_optimal_rate(a, pc, model.bandwidth), r_min), model.rate_max)
    return r, parametric_energy(model, size, r), size / r


def wired_path_cost(hops: Iterable[WiredHopModel], size: float):
    """Sum of per-hop incremental energy and serialisation + propagation + processing."""
    _check(size >= 0, "size must be >= 0")
    energy = 0.0
    latency = 0.0
    for h in hops:
        energy += h.eps * size
        latency += size / h.capacity + h.prop_delay + h.proc_delay
    return energy, latency


def compute_cost(model: ComputeModel, n_ops: float, f: float):
    """Return ``(time, energy)`` for ``n_ops`` operations at clock ``f``."""
    _check(n_ops >= 0, "n_ops must be >= 0")
    if not (model.f_min * (1 - _REL) <= f <= model.f_max * (1 + _REL)):
        raise DomainError(f"frequency {f:g} Hz outside [{model.f_min:g}, {model.f_max:g}]")
    t = n_ops / (model.ops_per_cycle * f)
    return t, model.power(f) * t


def optimal_frequency(model: ComputeModel, n_ops: float, time_budget: float):
    """DVFS: the energy-minimal clock that still finishes within ``time_budget``.

    Returns ``(f, energy, time)``. Raises :class:`InfeasibleError` when even
    ``f_max`` misses the budget.
    """
    _check(n_ops > 0, "n_ops must be > 0")
    _check(time_budget > 0, "time_budget must be > 0")
    f_deadline = n_ops / (model.ops_per_cycle * time_budget)
    if f_deadline > model.f_max * (1 + _REL):
        raise InfeasibleError(
            f"deadline needs {f_deadline:g} Hz but f_max is {model.f_max:g} Hz")
    lo = max(model.f_min, f_deadline)
    f = min(max(model.efficient_frequency, lo), model.f_max)
    t, e = compute_cost(model, n_ops, f)
    return f, e, t
