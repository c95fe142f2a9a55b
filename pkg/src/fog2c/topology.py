"""Fog network graph: tiers, typed links, validation and least-cost routing."""
from __future__ import annotations

import heapq
import threading
from collections import OrderedDict
from dataclasses import dataclass
from typing import Sequence, Union

from .errors import ConfigError, UnreachableError
from .models import (
    FREE_HOP,
    ComputeModel,
    WiredHopModel,
    WirelessCatalogModel,
    WirelessParametricModel,
    catalog_latency,
    parametric_link_powers,
    wired_path_cost,
)

TIERS = ("device", "access_point", "fog", "cloud")
WIRED_TIERS = {"access_point", "fog", "cloud"}

_CACHE_LIMIT = 4096

WirelessModel = Union[WirelessCatalogModel, WirelessParametricModel]


@dataclass(frozen=True)
class NodeSpec:
    id: str
    tier: str
    compute: ComputeModel | None = None
    device_compute: ComputeModel | None = None
    # access points only: fog node sharing the site, joined by a free link
    collocated: str | None = None


@dataclass(frozen=True)
class LinkSpec:
    """Directed link. Wired links hold one or more hops in series."""

    src: str
    dst: str
    model: object  # WirelessCatalogModel | WirelessParametricModel | tuple[WiredHopModel, ...]

    @property
    def is_wireless(self) -> bool:
        return isinstance(self.model, (WirelessCatalogModel, WirelessParametricModel))

    @property
    def hops(self) -> tuple[WiredHopModel, ...]:
        return () if self.is_wireless else self.model


def wired(src: str, dst: str, *hops: WiredHopModel, bidirectional: bool = True) -> list[LinkSpec]:
    out = [LinkSpec(src, dst, tuple(hops))]
    if bidirectional:
        out.append(LinkSpec(dst, src, tuple(hops)))
    return out


def wireless(src: str, dst: str, model: WirelessModel, bidirectional: bool = True) -> list[LinkSpec]:
    out = [LinkSpec(src, dst, model)]
    if bidirectional:
        out.append(LinkSpec(dst, src, model))
    return out


def link_cost(link: LinkSpec, size: float, rate: float | None = None, rng=None):
    """``(tx_energy, rx_energy, infra_energy, latency)`` of one link.

    Wireless energy is split between the transmitting and receiving end; wired
    energy is network (infrastructure) energy. Parametric links default to
    ``rate_max``; catalog MAC delay is drawn only when ``rng`` is given.
    """
    m = link.model
    if isinstance(m, WirelessCatalogModel):
        return m.eps_tx * size, m.eps_rx * size, 0.0, catalog_latency(m, size, rng)
    if isinstance(m, WirelessParametricModel):
        r = m.rate_max if rate is None else rate
        if size == 0:
            return 0.0, 0.0, 0.0, 0.0
        p_tx, p_rx = parametric_link_powers(m, r)
        t = size / r
        return p_tx * t, p_rx * t, 0.0, t
    e, t = wired_path_cost(m, size)
    return 0.0, 0.0, e, t


@dataclass(frozen=True)
class Path:
    links: tuple[LinkSpec, ...] = ()

    @property
    def nodes(self) -> tuple[str, ...]:
        if not self.links:
            return ()
        return (self.links[0].src,) + tuple(l.dst for l in self.links)

    def __len__(self):
        return len(self.links)

    def __add__(self, other: "Path") -> "Path":
        return Path(self.links + other.links)


class Topology:
    """Immutable node/link set with a memoised single-source router.

    The routing cache is keyed by ``(src, metric, size)`` because serialisation
    terms make link costs payload dependent. Concurrent readers are safe: the
    cache is guarded by a lock and every entry is a pure function of its key.
    """

    def __init__(self, nodes: Sequence[NodeSpec], links: Sequence[LinkSpec]):
        self.nodes = {n.id: n for n in nodes}
        self._node_list = tuple(nodes)
        extra = []
        for n in nodes:
            if n.tier == "access_point" and n.collocated is not None:
                extra += wired(n.id, n.collocated, FREE_HOP)
        self.links = tuple(links) + tuple(extra)
        self._out: dict[str, list[LinkSpec]] = {}
        self._by_pair: dict[tuple[str, str], LinkSpec] = {}
        for l in self.links:
            self._out.setdefault(l.src, []).append(l)
            self._by_pair.setdefault((l.src, l.dst), l)
        for v in self._out.values():
            v.sort(key=lambda l: l.dst)
        self._tiers = {n.id: n.tier for n in nodes}
        self._edge_tables: dict[str, dict] = {}
        self._cache: OrderedDict = OrderedDict()
        self._lock = threading.Lock()

    def __getstate__(self):
        state = self.__dict__.copy()
        state["_cache"] = OrderedDict()
        del state["_lock"]
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self._lock = threading.Lock()

    def _edges(self, metric: str) -> dict:
        table = self._edge_tables.get(metric)
        if table is None:
            table = {u: [(l, _edge_terms(l, metric)) for l in ls] for u, ls in self._out.items()}
            self._edge_tables[metric] = table
        return table

    # -- queries -----------------------------------------------------------
    def link(self, src: str, dst: str) -> LinkSpec | None:
        return self._by_pair.get((src, dst))

    def out_links(self, node: str) -> list[LinkSpec]:
        return self._out.get(node, [])

    def by_tier(self, *tiers: str) -> list[str]:
        return sorted(n.id for n in self._node_list if n.tier in tiers)

    @property
    def compute_nodes(self) -> list[str]:
        return self.by_tier("fog", "cloud")

    def access_points_of(self, device: str) -> list[str]:
        return sorted(l.dst for l in self.out_links(device)
                      if l.is_wireless and self.nodes[l.dst].tier == "access_point")

    def closest_ap(self, device: str) -> str:
        """The device's nearest access point: least path loss (parametric) or
        least deterministic latency for a 1-bit payload (catalog); ties by id."""
        aps = self.access_points_of(device)
        if not aps:
            raise UnreachableError(f"device {device!r} has no wireless link to an access point")

        def key(ap):
            m = self.link(device, ap).model
            if isinstance(m, WirelessParametricModel):
                return (0, m.path_loss_db, ap)
            return (1, catalog_latency(m, 1.0), ap)

        return min(aps, key=key)

    def home_node(self, ap: str, size: float) -> str:
        """Compute node that serves requests arriving at ``ap``: the collocated
        fog node, else the latency-nearest fog/cloud node."""
        node = self.nodes[ap]
        if node.collocated is not None:
            return node.collocated
        best = None
        table = self.routes_from(ap, size, "latency")
        for n in self.compute_nodes:
            if n in table:
                key = table[n][0]
                if best is None or key < best[0]:
                    best = (key, n)
        if best is None:
            raise UnreachableError(f"no compute node reachable from {ap!r}")
        return best[1]

    # -- validation --------------------------------------------------------
    def validate(self) -> list[str]:
        return validate(self)

    # -- routing -----------------------------------------------------------
    def routes_from(self, src: str, size: float, metric: str = "latency"):
        """Dijkstra from ``src``: ``{dst: ((cost, hops, node_ids), Path)}``."""
        key = (src, metric, float(size))
        with self._lock:
            hit = self._cache.get(key)
            if hit is not None:
                self._cache.move_to_end(key)
                return hit
        table = _dijkstra(self, src, size, metric)
        with self._lock:
            table = self._cache.setdefault(key, table)
            while len(self._cache) > _CACHE_LIMIT:
                self._cache.popitem(last=False)  # least recently used
        return table

    def shortest_path(self, src: str, dst: str, size: float, metric: str = "latency") -> Path:
        return shortest_path(self, src, dst, size, metric)


def _edge_terms(link: LinkSpec, metric: str):
    """Per-link constants so the router can price an edge without model calls.

    The arithmetic mirrors :func:`link_cost` term by term, so edge costs are
    bit-identical to it.
    """
    m = link.model
    if metric == "latency":
        if isinstance(m, WirelessCatalogModel):
            return ("cat", m.rate, m.base_latency)
        if isinstance(m, WirelessParametricModel):
            return ("par", m.rate_max)
        return ("hops", tuple((h.capacity, h.prop_delay, h.proc_delay) for h in m))
    if metric == "energy":
        if isinstance(m, WirelessCatalogModel):
            return ("lin2", m.eps_tx, m.eps_rx)
        if isinstance(m, WirelessParametricModel):
            p_tx, p_rx = parametric_link_powers(m, m.rate_max)
            return ("pow", p_tx, p_rx, m.rate_max)
        return ("eps", tuple(h.eps for h in m))
    raise ValueError(f"metric must be 'latency' or 'energy', not {metric!r}")


def _edge_cost(terms, size: float) -> float:
    kind = terms[0]
    if kind == "hops":
        t = 0.0
        for cap, prop, proc in terms[1]:
            t += size / cap + prop + proc
        return t
    if kind == "cat":
        return size / terms[1] + terms[2]
    if kind == "par":
        return size / terms[1] if size else 0.0
    if kind == "eps":
        e = 0.0
        for eps in terms[1]:
            e += eps * size
        return e
    if kind == "lin2":
        return terms[1] * size + terms[2] * size
    # parametric energy
    if not size:
        return 0.0
    t = size / terms[3]
    return terms[1] * t + terms[2] * t


def _dijkstra(topo: Topology, src: str, size: float, metric: str):
    # labels compare (cost, hop count, node-id sequence): least cost, then
    # fewer hops, then lexicographic route
    edges = topo._edges(metric)
    tiers = topo._tiers
    best = {src: ((0.0, 0, (src,)), ())}
    heap = [((0.0, 0, (src,)), src, ())]
    done = set()
    while heap:
        label, u, links = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        cost, hops, ids = label
        if u != src and tiers[u] == "device":
            continue  # devices terminate routes, they do not relay
        for l, terms in edges.get(u, ()):
            v = l.dst
            if v in done or v in ids:
                continue
            cand = (cost + _edge_cost(terms, size), hops + 1, ids + (v,))
            cur = best.get(v)
            if cur is None or cand < cur[0]:
                best[v] = (cand, links + (l,))
                heapq.heappush(heap, (cand, v, links + (l,)))
    return {v: (lab, Path(ls)) for v, (lab, ls) in best.items()}


def shortest_path(topo: Topology, src: str, dst: str, size: float, metric: str = "latency") -> Path:
    """Least-cost loop-free path; MAC randomness is excluded from the metric."""
    for n in (src, dst):
        if n not in topo.nodes:
            raise UnreachableError(f"unknown node {n!r}")
    if src == dst:
        return Path()
    table = topo.routes_from(src, size, metric)
    if dst not in table:
        raise UnreachableError(f"no route from {src!r} to {dst!r}")
    return table[dst][1]


def path_cost(topo: Topology, path: Path, size: float, rng=None):
    """Total ``(energy, latency)`` of carrying ``size`` bits along ``path``."""
    energy = 0.0
    latency = 0.0
    for l in path.links:
        tx, rx, infra, t = link_cost(l, size, rng=rng)
        energy += tx + rx + infra
        latency += t
    return energy, latency


def validate(topo: Topology) -> list[str]:
    """Every invariant violation, as human-readable strings (empty list = ok)."""
    errs: list[str] = []
    nodes = topo._node_list
    if not nodes:
        return ["topology has no nodes"]
    seen = set()
    for n in nodes:
        if n.id in seen:
            errs.append(f"duplicate node id {n.id!r}")
        seen.add(n.id)
        if n.tier not in TIERS:
            errs.append(f"node {n.id!r}: unknown tier {n.tier!r}")
            continue
        if n.tier in ("fog", "cloud") and n.compute is None:
            errs.append(f"node {n.id!r}: {n.tier} nodes need a compute model")
        if n.tier == "access_point" and n.compute is not None:
            errs.append(f"node {n.id!r}: access points carry no compute model")
        if n.tier != "device" and n.device_compute is not None:
            errs.append(f"node {n.id!r}: device_compute is only valid on devices")
        if n.collocated is not None:
            if n.tier != "access_point":
                errs.append(f"node {n.id!r}: only access points may declare a collocated node")
            elif n.collocated not in topo.nodes or topo.nodes[n.collocated].tier != "fog":
                errs.append(f"node {n.id!r}: collocated node {n.collocated!r} is not a fog node")
    for l in topo.links:
        missing = [x for x in (l.src, l.dst) if x not in topo.nodes]
        if missing:
            errs.append(f"link {l.src}->{l.dst}: unknown endpoint(s) {', '.join(missing)}")
            continue
        if l.src == l.dst:
            errs.append(f"link {l.src}->{l.dst}: self loop")
        tiers = {topo.nodes[l.src].tier, topo.nodes[l.dst].tier}
        if l.is_wireless:
            if tiers != {"device", "access_point"}:
                errs.append(f"link {l.src}->{l.dst}: wireless links must join a device and an "
                            f"access point (tier rule violated)")
        else:
            if not l.hops:
                errs.append(f"link {l.src}->{l.dst}: wired link with no hops")
            if not tiers <= WIRED_TIERS:
                errs.append(f"link {l.src}->{l.dst}: wired links are only allowed among access "
                            f"points, fog and cloud nodes (tier rule violated)")
    # every fog node must be reachable (ignoring direction) from an AP or device
    adj: dict[str, set[str]] = {}
    for l in topo.links:
        adj.setdefault(l.src, set()).add(l.dst)
        adj.setdefault(l.dst, set()).add(l.src)
    frontier = [n.id for n in nodes if n.tier in ("access_point", "device")]
    reached = set(frontier)
    while frontier:
        u = frontier.pop()
        for v in adj.get(u, ()):
            if v not in reached:
                reached.add(v)
                frontier.append(v)
    for n in nodes:
        if n.tier == "fog" and n.id not in reached:
            errs.append(f"fog node {n.id!r} is not connected to any access point or device")
    return errs


def require_valid(topo: Topology) -> Topology:
    errs = validate(topo)
    if errs:
        raise ConfigError(errs)
    return topo


def path_latency(path: Path, size: float) -> float:
    return sum(link_cost(l, size)[3] for l in path.links)

