"""Deadline-constrained, energy-minimising placement of offloaded requests.

A candidate is an (access point, compute node) pair. For a candidate the
forward route is the latency-shortest wired path from the access point, and
the remaining free variables (wireless rate and CPU frequency) are set by
:func:`fog2c.kernels.split_search` or by the closed-form DVFS optimum when the
wireless hop has a fixed rate. Strategies differ only in which candidates they
may use and whether the clock is pinned to ``f_max``.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from . import kernels
from .errors import ConfigError, InfeasibleError, UnreachableError
from .models import (
    WirelessCatalogModel,
    compute_cost,
    energy_optimal_rate,
    optimal_frequency,
    parametric_link_powers,
)
from .seeding import stream
from .topology import Path, Topology, link_cost
from .workload import Request

_SLACK = 1e-9


class Strategy(str, Enum):
    FULL_OPT = "full_opt"
    NEAREST_OPT_FREQ = "nearest_opt_freq"
    NEAREST_MAX_FREQ = "nearest_max_freq"
    COLLOCATED = "collocated"
    LOCAL_DEVICE = "local_device"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class AccountingScope:
    include_device_energy: bool = True
    include_fog_cloud_energy: bool = True

    def __post_init__(self):
        if not (self.include_device_energy or self.include_fog_cloud_energy):
            raise ConfigError("accounting scope must include at least one tier")

    def weigh(self, device_energy: float, fog_cloud_energy: float) -> float:
        e = 0.0
        if self.include_device_energy:
            e += device_energy
        if self.include_fog_cloud_energy:
            e += fog_cloud_energy
        return e


SCOPE_FOG_CLOUD = AccountingScope(include_device_energy=False, include_fog_cloud_energy=True)
SCOPE_ALL = AccountingScope()


@dataclass(frozen=True)
class ScenarioSpec:
    key: str
    title: str
    scope: AccountingScope
    strategies: tuple[Strategy, ...]
    constraint: str
    variables: str


SCENARIOS = {
    "a": ScenarioSpec("a", "Allocation within the fog and cloud tiers", SCOPE_FOG_CLOUD,
                      (Strategy.FULL_OPT, Strategy.NEAREST_OPT_FREQ, Strategy.NEAREST_MAX_FREQ),
                      "latency", "main: compute node; aux: CPU frequency, wired route"),
    "b": ScenarioSpec("b", "Joint wireless, fog and cloud allocation", SCOPE_ALL,
                      (Strategy.FULL_OPT, Strategy.NEAREST_OPT_FREQ, Strategy.NEAREST_MAX_FREQ,
                       Strategy.COLLOCATED),
                      "latency", "main: access point, compute node; aux: CPU frequency, wireless rate"),
    "c": ScenarioSpec("c", "Request generation rate under an AoI target", SCOPE_ALL, (),
                      "AoI", "main: CPU frequency, transmission rate"),
}


@dataclass(frozen=True)
class Allocation:
    request_id: str
    strategy: str
    feasible: bool
    chosen_ap: str | None = None
    compute_node: str | None = None
    forward_path: Path = Path()
    return_path: Path = Path()
    wireless_rate: float | None = None
    frequency: float | None = None
    energy: float | None = None  # under the scope used for the decision
    latency: float | None = None
    device_energy: float | None = None
    fog_cloud_energy: float | None = None

    def energy_in(self, scope: AccountingScope) -> float | None:
        if not self.feasible:
            return None
        return scope.weigh(self.device_energy, self.fog_cloud_energy)


def _infeasible(req: Request, strategy: Strategy) -> Allocation:
    return Allocation(request_id=req.id, strategy=str(strategy), feasible=False)


def _tier_weight(topo: Topology, node: str, scope: AccountingScope) -> float:
    tier = topo.nodes[node].tier
    if tier == "device":
        return 1.0 if scope.include_device_energy else 0.0
    return 1.0 if scope.include_fog_cloud_energy else 0.0


def _routes(req: Request, topo: Topology, ap: str, node: str):
    """Forward/return routes between ``ap`` and ``node`` and their fixed costs, or None."""
    size = req.size
    try:
        fwd = topo.shortest_path(ap, node, size, "latency")
    except UnreachableError:
        return None
    dev_e = 0.0
    infra_e = 0.0
    fixed_t = 0.0
    for l in fwd.links:
        _, _, e, t = link_cost(l, size)
        infra_e += e
        fixed_t += t
    ret = Path()
    if req.result_size > 0:
        down = topo.link(ap, req.source)
        if down is None:
            return None
        try:
            back = topo.shortest_path(node, ap, req.result_size, "latency")
        except UnreachableError:
            return None
        for l in back.links:
            _, _, e, t = link_cost(l, req.result_size)
            infra_e += e
            fixed_t += t
        tx, rx, _, t = link_cost(down, req.result_size)
        infra_e += tx
        dev_e += rx
        fixed_t += t
        ret = back + Path((down,))
    return fwd, ret, dev_e, infra_e, fixed_t


def _evaluate(req: Request, topo: Topology, ap: str, node: str, scope: AccountingScope,
              max_freq: bool, mac_delay: float, strategy: Strategy,
              memo: dict | None = None) -> Allocation | None:
    size = req.size
    n_ops = req.n_ops
    up = topo.link(req.source, ap)
    if up is None:
        return None
    if memo is not None and (ap, node) in memo:
        routes = memo[(ap, node)]
    else:
        routes = _routes(req, topo, ap, node)
        if memo is not None:
            memo[(ap, node)] = routes
    if routes is None:
        return None
    fwd, ret, dev_e, infra_e, fixed_t = routes

    cm = topo.nodes[node].compute
    budget = req.deadline - fixed_t
    if budget <= 0:
        return None
    m = up.model
    if isinstance(m, WirelessCatalogModel):
        rate = m.rate
        t_w = size / m.rate + m.base_latency + mac_delay
        dev_e += m.eps_tx * size
        infra_e += m.eps_rx * size
        t_budget = budget - t_w
        if t_budget <= 0:
            return None
        if max_freq:
            f = cm.f_max
            if n_ops / (cm.ops_per_cycle * f) > t_budget * (1 + _SLACK):
                return None
        else:
            try:
                f, _, _ = optimal_frequency(cm, n_ops, t_budget)
            except InfeasibleError:
                return None
    else:
        w_dev = 1.0 if scope.include_device_energy else 0.0
        w_infra = 1.0 if scope.include_fog_cloud_energy else 0.0
        a = w_dev * m.noise_power_at_tx / m.pa_efficiency
        pc = w_dev * m.circuit_power_tx + w_infra * m.circuit_power_rx
        r_e = energy_optimal_rate(a, pc, m.bandwidth)
        if max_freq:
            f = cm.f_max
            t_left = budget - n_ops / (cm.ops_per_cycle * f)
            if t_left <= 0 or size / t_left > m.rate_max * (1 + _SLACK):
                return None
            rate = min(max(r_e, size / t_left), m.rate_max)
        else:
            obj, rate, f = kernels.split_search(
                size, a, pc, m.bandwidth, m.rate_max, r_e, n_ops, cm.ops_per_cycle,
                cm.p_static, cm.kappa, cm.alpha, cm.f_min, cm.f_max,
                _tier_weight(topo, node, scope), budget)
            if not math.isfinite(obj):
                return None
        t_w = size / rate
        p_tx, p_rx = parametric_link_powers(m, rate)
        dev_e += p_tx * t_w
        infra_e += p_rx * t_w
    t_c, e_c = compute_cost(cm, n_ops, f)
    infra_e += e_c
    latency = fixed_t + t_w + t_c
    if latency > req.deadline * (1 + _SLACK):
        return None
    return Allocation(
        request_id=req.id, strategy=str(strategy), feasible=True, chosen_ap=ap,
        compute_node=node, forward_path=Path((up,)) + fwd, return_path=ret,
        wireless_rate=rate, frequency=f, energy=scope.weigh(dev_e, infra_e), latency=latency,
        device_energy=dev_e, fog_cloud_energy=infra_e,
    )


def _evaluate_local(req: Request, topo: Topology, scope: AccountingScope, max_freq: bool,
                    strategy: Strategy) -> Allocation | None:
    cm = topo.nodes[req.source].device_compute
    if max_freq:
        f = cm.f_max
    else:
        try:
            f, _, _ = optimal_frequency(cm, req.n_ops, req.deadline)
        except InfeasibleError:
            return None
    t, e = compute_cost(cm, req.n_ops, f)
    if t > req.deadline * (1 + _SLACK):
        return None
    return Allocation(request_id=req.id, strategy=str(strategy), feasible=True,
                      compute_node=req.source, frequency=f, energy=scope.weigh(e, 0.0),
                      latency=t, device_energy=e, fog_cloud_energy=0.0)


def _rank(a: Allocation):
    return (a.energy, a.latency, a.compute_node, a.chosen_ap or "")


def _candidate_aps(req: Request, topo: Topology) -> list[str]:
    if req.assigned_ap is not None:
        return [req.assigned_ap]
    return topo.access_points_of(req.source)


def _mac_draws(req: Request, topo: Topology, aps: Sequence[str], rng) -> dict[str, float]:
    out = {}
    for ap in aps:
        link = topo.link(req.source, ap)
        m = link.model if link is not None else None
        if rng is not None and isinstance(m, WirelessCatalogModel) and m.mac_mean_delay > 0:
            out[ap] = float(rng.exponential(m.mac_mean_delay))
        else:
            out[ap] = 0.0
    return out


def check_strategy(strategy: Strategy, topo: Topology, requests: Sequence[Request] = ()) -> None:
    """Raise :class:`ConfigError` when ``strategy`` cannot run on ``topo``."""
    strategy = Strategy(strategy)
    if strategy is Strategy.COLLOCATED:
        aps = topo.by_tier("access_point")
        bad = [ap for ap in aps if topo.nodes[ap].collocated is None]
        if not aps or bad:
            raise ConfigError(f"strategy collocated needs a collocated fog node on every access "
                              f"point; missing on {', '.join(bad) or 'all (no access points)'}")
    if strategy is Strategy.LOCAL_DEVICE:
        devs = {r.source for r in requests} or set(topo.by_tier("device"))
        bad = sorted(d for d in devs if topo.nodes[d].device_compute is None)
        if bad:
            raise ConfigError(f"strategy local_device needs device_compute on {', '.join(bad)}")


def allocate(request: Request, topology: Topology, strategy: Strategy,
             scope: AccountingScope = SCOPE_ALL, rng=None) -> Allocation:
    """Minimum-energy feasible allocation of one request under ``strategy``.

    ``rng`` supplies MAC-delay draws for catalog links with a non-zero mean;
    without it those delays are omitted. Infeasible requests come back with
    ``feasible=False`` and no energy or latency.
    """
    strategy = Strategy(strategy)
    check_strategy(strategy, topology, [request])
    req = request
    topo = topology
    max_only = strategy is Strategy.NEAREST_MAX_FREQ
    if strategy is Strategy.LOCAL_DEVICE:
        pairs = None
    elif strategy in (Strategy.NEAREST_OPT_FREQ, Strategy.NEAREST_MAX_FREQ):
        ap = req.assigned_ap if req.assigned_ap is not None else topo.closest_ap(req.source)
        pairs = [(ap, topo.home_node(ap, req.size))]
    elif strategy is Strategy.COLLOCATED:
        pairs = [(ap, topo.nodes[ap].collocated) for ap in _candidate_aps(req, topo)]
    else:
        pairs = [(ap, n) for ap in _candidate_aps(req, topo) for n in topo.compute_nodes]

    found: list[Allocation] = []
    if pairs is None:
        for mf in ((True,) if max_only else (True, False)):
            a = _evaluate_local(req, topo, scope, mf, strategy)
            if a is not None:
                found.append(a)
    else:
        macs = _mac_draws(req, topo, sorted({ap for ap, _ in pairs}), rng)
        memo: dict = {}
        for ap, node in pairs:
            # optimising modes also score the f_max configuration so they can
            # never lose to the pinned-clock strategy through rounding
            for mf in ((True,) if max_only else (True, False)):
                a = _evaluate(req, topo, ap, node, scope, mf, macs[ap], strategy, memo)
                if a is not None:
                    found.append(a)
    if not found:
        return _infeasible(req, strategy)
    return min(found, key=_rank)


def optimize_full(request: Request, topology: Topology, scope: AccountingScope = SCOPE_ALL,
                  rng=None) -> Allocation:
    """Exhaustive search over (access point, compute node) with optimised rate and clock."""
    return allocate(request, topology, Strategy.FULL_OPT, scope, rng)


# -- statistics --------------------------------------------------------------

def energy_cdf(allocations: Sequence[Allocation]) -> list[tuple[float, float]]:
    """Empirical CDF as ``(energy, fraction of all requests)`` steps.

    Infeasible requests stay out of the numerator, so the curve tops out at
    the success fraction. An empty list means the curve is 0 everywhere.
    """
    n = len(allocations)
    es = sorted(a.energy for a in allocations if a.feasible)
    return [(e, (i + 1) / n) for i, e in enumerate(es)]


def cdf_at(curve: Sequence[tuple[float, float]], energy: float) -> float:
    frac = 0.0
    for e, p in curve:
        if e <= energy:
            frac = p
        else:
            break
    return frac


def median_energy(allocations: Sequence[Allocation]) -> float | None:
    """Median with failures counted as +inf; None when fewer than half succeed.

    With an even count the two middle values are averaged, except when
    exactly half succeed: then the lower middle value (the costliest success)
    is returned rather than an infinite average.
    """
    n = len(allocations)
    if n == 0:
        return None
    es = sorted(a.energy if a.feasible else math.inf for a in allocations)
    if n % 2:
        m = es[n // 2]
    else:
        lo, hi = es[n // 2 - 1], es[n // 2]
        m = lo if math.isinf(hi) else 0.5 * (lo + hi)
    return m if math.isfinite(m) else None


@dataclass
class StrategyStats:
    strategy: str
    allocations: list[Allocation] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.allocations)

    @property
    def success_rate(self) -> float:
        if not self.allocations:
            return 0.0
        return sum(a.feasible for a in self.allocations) / len(self.allocations)

    @property
    def cdf(self):
        return energy_cdf(self.allocations)

    @property
    def median(self):
        return median_energy(self.allocations)

    @property
    def total_energy(self) -> float:
        return math.fsum(a.energy for a in self.allocations if a.feasible)


def _allocate_chunk(args):
    requests, topology, strategies, scope, seed = args
    # all strategies see a request back to back, so its routes are cached once
    out = {str(s): [] for s in strategies}
    for r in requests:
        for s in strategies:
            out[str(s)].append(allocate(r, topology, s, scope, stream(seed, "allocate", str(s), r.id)))
    return out


def run_scenario(requests: Sequence[Request], topology: Topology, strategies: Sequence[Strategy],
                 scope: AccountingScope, seed: int, workers: int = 1,
                 chunk: int = 500) -> dict[str, StrategyStats]:
    """Apply every strategy to every request.

    Each (strategy, request) pair gets its own seed-derived stream, so results
    are identical for any ``workers`` value and any chunking.
    """
    strategies = [Strategy(s) for s in strategies]
    for s in strategies:
        check_strategy(s, topology, requests)
    jobs = [(list(requests[i:i + chunk]), topology, strategies, scope, seed)
            for i in range(0, len(requests), chunk)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_allocate_chunk, jobs))
    else:
        results = [_allocate_chunk(j) for j in jobs]
    out = {str(s): StrategyStats(str(s)) for s in strategies}
    for res in results:
        for name, allocs in res.items():
            out[name].allocations.extend(allocs)
    return out


def savings(stats: dict[str, StrategyStats], reference: str = "full_opt") -> dict[str, float | None]:
    """Percent median energy saved by ``reference`` relative to each other strategy."""
    ref = stats[reference].median if reference in stats else None
    out = {}
    for name, st in stats.items():
        if name == reference:
            continue
        other = st.median
        out[name] = None if (ref is None or other is None or other <= 0) else 100.0 * (1 - ref / other)
    return out
