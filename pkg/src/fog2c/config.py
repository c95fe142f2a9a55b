"""Scenario config files: unit-tagged JSON in, validated SI objects out.

Every dimensional value must carry a unit ("3 GHz", "4.5e4 pJ/b"); plain
numbers are accepted only for dimensionless fields (efficiencies, exponents,
``kappa`` in SI W/Hz^alpha, counts, weights). Unknown keys are errors.

:func:`parse_config` normalises to an SI dict (defaults filled in, presets
resolved), builds the domain objects, and derives a digest from the
normalised dict, so two files that mean the same thing share a digest.
:func:`emit_config` writes the normalised dict back with SI units.
"""
from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field

from . import catalog
from .aoi import AoiScenario
from .allocator import SCENARIOS, Strategy
from .errors import ConfigError
from .models import (
    DEFAULT_TEMPERATURE,
    K_BOLTZMANN,
    ComputeModel,
    DomainError,
    WiredHopModel,
    WirelessCatalogModel,
    WirelessParametricModel,
)
from .topology import TIERS, LinkSpec, NodeSpec, Topology, validate
from .units import UnitError, format_quantity, parse_quantity
from .workload import Dist, RequestDistribution

_MISSING = object()


# -- schema ------------------------------------------------------------------

class _Schema:
    def norm(self, v, path, errs):
        raise NotImplementedError

    def emit(self, v):
        return v


class Q(_Schema):
    def __init__(self, dim, positive=False, nonneg=False):
        self.dim = dim
        self.positive = positive
        self.nonneg = nonneg

    def norm(self, v, path, errs):
        try:
            x = parse_quantity(v, self.dim)
        except UnitError as e:
            errs.append(f"{path}: {e}")
            return None
        if self.positive and not x > 0:
            errs.append(f"{path}: must be > 0")
        if self.nonneg and not x >= 0:
            errs.append(f"{path}: must be >= 0")
        return x

    def emit(self, v):
        return format_quantity(v, self.dim)


class Num(_Schema):
    def __init__(self, lo=None, hi=None, lo_open=False, integer=False):
        self.lo, self.hi, self.lo_open, self.integer = lo, hi, lo_open, integer

    def norm(self, v, path, errs):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            errs.append(f"{path}: expected a plain number, got {v!r}")
            return None
        if self.integer and not isinstance(v, int):
            errs.append(f"{path}: expected an integer, got {v!r}")
            return None
        if self.lo is not None and (v <= self.lo if self.lo_open else v < self.lo):
            errs.append(f"{path}: must be {'>' if self.lo_open else '>='} {self.lo}")
        if self.hi is not None and v > self.hi:
            errs.append(f"{path}: must be <= {self.hi}")
        return int(v) if self.integer else float(v)


class Str(_Schema):
    def norm(self, v, path, errs):
        if not isinstance(v, str) or not v:
            errs.append(f"{path}: expected a non-empty string, got {v!r}")
            return None
        return v


class Bool(_Schema):
    def norm(self, v, path, errs):
        if not isinstance(v, bool):
            errs.append(f"{path}: expected true or false, got {v!r}")
            return None
        return v


class Enum(_Schema):
    def __init__(self, *choices):
        self.choices = choices

    def norm(self, v, path, errs):
        if v not in self.choices:
            errs.append(f"{path}: expected one of {', '.join(map(str, self.choices))}, got {v!r}")
            return None
        return v


class F:
    """An object field: schema plus required flag or default (given in config syntax)."""

    def __init__(self, schema, default=_MISSING, optional=False):
        self.schema = schema
        self.default = default
        self.optional = optional


class Obj(_Schema):
    def __init__(self, fields: dict[str, F]):
        self.fields = fields

    def norm(self, v, path, errs):
        if not isinstance(v, dict):
            errs.append(f"{path or '<root>'}: expected an object")
            return None
        out = {}
        for k in v:
            if k not in self.fields:
                errs.append(f"{_join(path, k)}: unknown key (allowed: {', '.join(self.fields)})")
        for k, f in self.fields.items():
            p = _join(path, k)
            if k in v:
                out[k] = f.schema.norm(v[k], p, errs)
            elif f.default is not _MISSING:
                out[k] = f.schema.norm(f.default, p, errs)
            elif not f.optional:
                errs.append(f"{p}: missing required key")
        return out

    def emit(self, v):
        return {k: self.fields[k].schema.emit(x) for k, x in v.items() if x is not None}


class List(_Schema):
    def __init__(self, item, min_len=0):
        self.item = item
        self.min_len = min_len

    def norm(self, v, path, errs):
        if not isinstance(v, list):
            errs.append(f"{path}: expected a list")
            return None
        if len(v) < self.min_len:
            errs.append(f"{path}: needs at least {self.min_len} entr{'y' if self.min_len == 1 else 'ies'}")
        return [self.item.norm(x, f"{path}[{i}]", errs) for i, x in enumerate(v)]

    def emit(self, v):
        return [self.item.emit(x) for x in v]


class Map(_Schema):
    def __init__(self, value):
        self.value = value

    def norm(self, v, path, errs):
        if not isinstance(v, dict):
            errs.append(f"{path}: expected an object")
            return None
        return {k: self.value.norm(x, _join(path, k), errs) for k, x in sorted(v.items())}

    def emit(self, v):
        return {k: self.value.emit(x) for k, x in v.items()}


def _join(path, key):
    return f"{path}.{key}" if path else key


class _Dist(Obj):
    """Distribution object; parameter dimensions follow the quantity it describes."""

    def __init__(self, dim):
        super().__init__({
            "dist": F(Enum("constant", "uniform", "lognormal")),
            "value": F(Q(dim), optional=True),
            "low": F(Q(dim), optional=True),
            "high": F(Q(dim), optional=True),
            "median": F(Q(dim), optional=True),
            "sigma": F(Num(lo=0), optional=True),
        })

    def norm(self, v, path, errs):
        out = super().norm(v, path, errs)
        if not out:
            return out
        need = {"constant": ("value",), "uniform": ("low", "high"),
                "lognormal": ("median", "sigma")}.get(out.get("dist"), ())
        for k in need:
            if k not in out:
                errs.append(f"{_join(path, k)}: required for a {out['dist']} distribution")
        for k in list(out):
            if k != "dist" and k not in need:
                errs.append(f"{_join(path, k)}: not a parameter of a {out.get('dist')} distribution")
        return out


COMPUTE = Obj({
    "f_max": F(Q("frequency", positive=True)),
    "f_min": F(Q("frequency", positive=True)),
    "ops_per_cycle": F(Num(lo=0, lo_open=True), default=1),
    "p_static": F(Q("power", nonneg=True)),
    "kappa": F(Num(lo=0)),
    "alpha": F(Num(lo=1, lo_open=True), default=3),
})


class _Preset(Obj):
    """Object whose unspecified fields may be filled from a catalog row."""

    def __init__(self, fields, presets, fill):
        super().__init__(dict(fields, preset=F(Enum(*presets), optional=True)))
        self.fill = fill

    def norm(self, v, path, errs):
        if isinstance(v, dict) and "preset" in v and v["preset"] in self.fields["preset"].schema.choices:
            v = dict(self.fill(v["preset"]), **v)
        out = super().norm(v, path, errs)
        if out:
            out.pop("preset", None)
        return out


def _wireless_fill(key):
    row = catalog.WIRELESS[key]
    return {"eps_tx": format_quantity(row.eps_tx or 0.0, "energy_per_bit"),
            "eps_rx": format_quantity(row.eps_rx or 0.0, "energy_per_bit")}


def _wired_fill(key):
    row = catalog.WIRED[key]
    return {"eps": format_quantity(row.eps, "energy_per_bit"),
            "capacity": format_quantity(row.capacity, "rate")}


WIRELESS_CATALOG = _Preset({
    "eps_tx": F(Q("energy_per_bit", nonneg=True)),
    "eps_rx": F(Q("energy_per_bit", nonneg=True)),
    "rate": F(Q("rate", positive=True)),
    "base_latency": F(Q("time", nonneg=True), default="0 s"),
    "mac_mean_delay": F(Q("time", nonneg=True), default="0 s"),
}, tuple(catalog.WIRELESS), _wireless_fill)

WIRELESS_PARAMETRIC = Obj({
    "bandwidth": F(Q("frequency", positive=True)),
    "noise_density": F(Q("noise_density", positive=True),
                       default=format_quantity(K_BOLTZMANN * DEFAULT_TEMPERATURE, "noise_density")),
    "path_loss": F(Q("decibel")),
    "pa_efficiency": F(Num(lo=0, hi=1, lo_open=True)),
    "circuit_power_tx": F(Q("power", nonneg=True), default="0 W"),
    "circuit_power_rx": F(Q("power", nonneg=True), default="0 W"),
    "rate_max": F(Q("rate", positive=True)),
})

HOP = _Preset({
    "eps": F(Q("energy_per_bit", nonneg=True)),
    "capacity": F(Q("rate", positive=True)),
    "prop_delay": F(Q("time", nonneg=True), default="0 s"),
    "proc_delay": F(Q("time", nonneg=True), default="0 s"),
    "repeat": F(Num(lo=1, integer=True), default=1),
}, tuple(catalog.WIRED), _wired_fill)

NODE = Obj({
    "id": F(Str()),
    "tier": F(Enum(*TIERS)),
    "compute": F(COMPUTE, optional=True),
    "device_compute": F(COMPUTE, optional=True),
    "collocated": F(Str(), optional=True),
})

LINK = Obj({
    "from": F(Str()),
    "to": F(Str()),
    "bidirectional": F(Bool(), default=True),
    "wireless_catalog": F(WIRELESS_CATALOG, optional=True),
    "wireless_parametric": F(WIRELESS_PARAMETRIC, optional=True),
    "wired": F(List(HOP, min_len=1), optional=True),
})

WORKLOAD = Obj({
    "kind": F(Enum("distribution", "periodic")),
    # distribution (scenarios a, b)
    "requests": F(Num(lo=0, integer=True), optional=True),
    "size": F(Obj({}), optional=True),  # replaced per kind below
    "intensity": F(Obj({}), optional=True),
    "deadline": F(_Dist("time"), optional=True),
    "sources": F(Map(Num(lo=0)), optional=True),
    "result_size": F(Q("size", nonneg=True), default="0 b"),
    # periodic (scenario c)
    "source": F(Str(), optional=True),
    "access_point": F(Str(), optional=True),
    "node": F(Str(), optional=True),
})


class _Workload(Obj):
    def __init__(self):
        super().__init__(WORKLOAD.fields)

    def norm(self, v, path, errs):
        if not isinstance(v, dict):
            errs.append(f"{path}: expected an object")
            return None
        kind = v.get("kind")
        fields = dict(self.fields)
        if kind == "periodic":
            fields["size"] = F(Q("size", positive=True))
            fields["intensity"] = F(Q("intensity", positive=True))
            for k in ("source", "access_point", "node"):
                fields[k] = F(Str())
            for k in ("requests", "deadline", "sources", "result_size"):
                fields.pop(k)
        else:
            fields["size"] = F(_Dist("size"))
            fields["intensity"] = F(_Dist("intensity"))
            fields["deadline"] = F(_Dist("time"))
            fields["sources"] = F(Map(Num(lo=0)))
            fields["requests"] = F(Num(lo=0, integer=True))
            for k in ("source", "access_point", "node"):
                fields.pop(k)
        self._active = Obj(fields)
        return self._active.norm(v, path, errs)

    def emit(self, v):
        kind = v.get("kind")
        fields = dict(self.fields)
        if kind == "periodic":
            fields["size"] = F(Q("size"))
            fields["intensity"] = F(Q("intensity"))
        else:
            fields["size"] = F(_Dist("size"))
            fields["intensity"] = F(_Dist("intensity"))
        return Obj(fields).emit(v)


EXPERIMENT = Obj({
    "scenario": F(Enum("a", "b", "c")),
    "strategies": F(List(Enum(*[s.value for s in Strategy]), min_len=1), optional=True),
    "seed": F(Num(lo=0, integer=True), default=0),
    "size_grid": F(List(Q("size", positive=True), min_len=1), optional=True),
    "rate_grid": F(List(Q("per_time", positive=True), min_len=1), optional=True),
    "slot": F(Q("time", positive=True), optional=True),
    "horizon": F(Q("time", positive=True), optional=True),
    "warmup": F(Q("time", nonneg=True), optional=True),
    "aoi_max": F(Q("time", positive=True), optional=True),
    "idle_power_tx": F(Q("power", nonneg=True), default="0 W"),
    "idle_power_cpu": F(Q("power", nonneg=True), default="0 W"),
})

OUTPUT = Obj({
    "directory": F(Str(), default="out"),
    "formats": F(List(Enum("csv", "svg"), min_len=1), default=["csv"]),
})

ROOT = Obj({
    "topology": F(Obj({"nodes": F(List(NODE, min_len=1)), "links": F(List(LINK), default=[])})),
    "workload": F(_Workload()),
    "experiment": F(EXPERIMENT),
    "output": F(OUTPUT, default={}),
})


# -- building ------------------------------------------------------------------

@dataclass
class ScenarioConfig:
    data: dict  # normalised SI form
    topology: Topology
    scenario: str
    strategies: tuple[Strategy, ...]
    seed: int
    n_requests: int = 0
    workload: RequestDistribution | None = None
    size_grid: list[float] = field(default_factory=list)
    rate_grid: list[float] = field(default_factory=list)
    aoi: AoiScenario | None = None
    aoi_max: float | None = None
    output_dir: str = "out"
    formats: tuple[str, ...] = ("csv",)

    @property
    def digest(self) -> str:
        return config_digest(self.data)


def config_digest(data: dict) -> str:
    blob = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _compute(d):
    return None if d is None else ComputeModel(
        f_max=d["f_max"], f_min=d["f_min"], ops_per_cycle=d["ops_per_cycle"],
        p_static=d["p_static"], kappa=d["kappa"], alpha=d["alpha"])


def _hops(lst):
    out = []
    for h in lst:
        hop = WiredHopModel(h["eps"], h["capacity"], h["prop_delay"], h["proc_delay"])
        out += [hop] * h["repeat"]
    return tuple(out)


def _build_topology(t, errs):
    nodes = []
    for i, n in enumerate(t["nodes"]):
        try:
            nodes.append(NodeSpec(n["id"], n["tier"], _compute(n.get("compute")),
                                  _compute(n.get("device_compute")), n.get("collocated")))
        except DomainError as e:
            errs.append(f"topology.nodes[{i}]: {e}")
    links = []
    for i, l in enumerate(t["links"]):
        kinds = [k for k in ("wireless_catalog", "wireless_parametric", "wired") if k in l]
        if len(kinds) != 1:
            errs.append(f"topology.links[{i}]: exactly one of wireless_catalog, "
                        f"wireless_parametric, wired is required")
            continue
        kind = kinds[0]
        m = l[kind]
        try:
            if kind == "wireless_catalog":
                model = WirelessCatalogModel(m["eps_tx"], m["eps_rx"], m["rate"],
                                             m["base_latency"], m["mac_mean_delay"])
            elif kind == "wireless_parametric":
                model = WirelessParametricModel(m["bandwidth"], m["noise_density"], m["path_loss"],
                                                m["pa_efficiency"], m["circuit_power_tx"],
                                                m["circuit_power_rx"], m["rate_max"])
            else:
                model = _hops(m)
        except DomainError as e:
            errs.append(f"topology.links[{i}].{kind}: {e}")
            continue
        links.append(LinkSpec(l["from"], l["to"], model))
        if l["bidirectional"]:
            links.append(LinkSpec(l["to"], l["from"], model))
    topo = Topology(nodes, links)
    errs.extend(f"topology: {e}" for e in validate(topo))
    return topo


def _dist(d) -> Dist:
    return Dist(d["dist"], **{k: v for k, v in d.items() if k != "dist"})


def _line_hint(text: str, err: str) -> str:
    # point at the first line mentioning the offending key
    m = re.match(r"([\w.\[\]]+):", err)
    if not m:
        return err
    key = re.sub(r"\[\d+\]", "", m.group(1)).split(".")[-1]
    for no, line in enumerate(text.splitlines(), 1):
        if f'"{key}"' in line:
            return f"line {no}: {err}"
    return err


def parse_config(text: str) -> ScenarioConfig:
    """Parse and fully validate a config; raises :class:`ConfigError` with every problem."""
    if not text.strip():
        raise ConfigError("empty config: missing required sections topology, workload, experiment")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"line {e.lineno} column {e.colno}: JSON syntax error: {e.msg}") from None
    errs: list[str] = []
    data = ROOT.norm(raw, "", errs)
    if errs:
        raise ConfigError([_line_hint(text, e) for e in errs])
    cfg = build(data)
    return cfg


def build(data: dict) -> ScenarioConfig:
    errs: list[str] = []
    topo = _build_topology(data["topology"], errs)
    exp = data["experiment"]
    wl = data["workload"]
    scen = exp["scenario"]
    spec = SCENARIOS[scen]
    strategies = tuple(Strategy(s) for s in exp.get("strategies") or [s.value for s in spec.strategies])
    cfg = ScenarioConfig(data=data, topology=topo, scenario=scen, strategies=strategies,
                         seed=exp["seed"], output_dir=data["output"]["directory"],
                         formats=tuple(data["output"]["formats"]))
    if scen in ("a", "b"):
        if wl["kind"] != "distribution":
            errs.append(f"workload.kind: scenario {scen} needs a 'distribution' workload")
        else:
            dist = RequestDistribution(_dist(wl["size"]), _dist(wl["intensity"]),
                                       _dist(wl["deadline"]), dict(wl["sources"]), wl["result_size"])
            errs.extend(f"workload.{e}" for e in dist.check())
            for s in dist.sources:
                if s not in topo.nodes or topo.nodes[s].tier != "device":
                    errs.append(f"workload.sources.{s}: not a device node")
            cfg.workload = dist
            cfg.n_requests = wl["requests"]
        if scen == "b":
            if not exp.get("size_grid"):
                errs.append("experiment.size_grid: required for scenario b")
            cfg.size_grid = list(exp.get("size_grid") or [])
        if not errs:
            from .allocator import check_strategy

            for s in strategies:
                try:
                    check_strategy(s, topo)
                except ConfigError as e:
                    errs.extend(f"experiment.strategies: {x}" for x in e.errors)
    else:
        for k in ("rate_grid", "slot", "horizon"):
            if k not in exp:
                errs.append(f"experiment.{k}: required for scenario c")
        if wl["kind"] != "periodic":
            errs.append("workload.kind: scenario c needs a 'periodic' workload")
        if not errs:
            cfg.rate_grid = list(exp["rate_grid"])
            cfg.aoi_max = exp.get("aoi_max")
            try:
                cfg.aoi = _aoi_scenario(topo, wl, exp)
            except ConfigError as e:
                errs.extend(e.errors)
    if errs:
        raise ConfigError(errs)
    return cfg


def _aoi_scenario(topo: Topology, wl: dict, exp: dict) -> AoiScenario:
    src, ap, node = wl["source"], wl["access_point"], wl["node"]
    errs = []
    for key, nid, tier in (("source", src, "device"), ("access_point", ap, "access_point"),
                           ("node", node, "fog")):
        if nid not in topo.nodes or topo.nodes[nid].tier != tier:
            errs.append(f"workload.{key}: {nid!r} is not a {tier} node")
    if errs:
        raise ConfigError(errs)
    up = topo.link(src, ap)
    if up is None or not isinstance(up.model, WirelessParametricModel):
        raise ConfigError(f"workload: the {src}->{ap} link must be wireless_parametric")
    from .errors import UnreachableError

    try:
        path = topo.shortest_path(ap, node, wl["size"], "latency")
    except UnreachableError as e:
        raise ConfigError(f"workload: {e}") from None
    hops = tuple(h for l in path.links for h in l.hops
                 if not (h.eps == 0 and h.capacity == float("inf") and h.prop_delay == 0
                         and h.proc_delay == 0))
    sc = AoiScenario(rate=exp["rate_grid"][0], slot=exp["slot"], size=wl["size"],
                     intensity=wl["intensity"], wireless=up.model,
                     compute=topo.nodes[node].compute, horizon=exp["horizon"],
                     warmup=exp.get("warmup"), wired=hops,
                     idle_power_tx=exp["idle_power_tx"], idle_power_cpu=exp["idle_power_cpu"])
    if sc.size / sc.slot > sc.wireless.rate_max * (1 + 1e-12):
        raise ConfigError(f"workload.size: {sc.size:g} b cannot be sent in one "
                          f"{sc.slot:g} s slot at rate_max {sc.wireless.rate_max:g} b/s")
    return sc


def emit_config(cfg: ScenarioConfig | dict) -> str:
    """Serialise the normalised config with SI unit strings; parses back digest-equal."""
    data = cfg.data if isinstance(cfg, ScenarioConfig) else cfg
    return json.dumps(ROOT.emit(data), indent=2, ensure_ascii=False) + "\n"


def load_config(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
