"""Built-in device catalog (published energy/latency figures), stored in SI.

Wireless rows give per-bit efficiencies only; a usable
:class:`~fog2c.models.WirelessCatalogModel` also needs a throughput and a
fixed latency, which scenario configs supply (see :func:`wireless_model`).

Note on arithmetic intensity: the published computer efficiencies are
reproduced with intensities of 71 and 220 *Flop per byte*. The source quotes
"GFlop/B", which would put every entry nine orders of magnitude higher; the
pJ/b figures only match Flop/B.
"""
from __future__ import annotations

from dataclasses import dataclass

from .models import ComputerSpec, WiredHopModel, WirelessCatalogModel

PJ = 1e-12

INTENSITY_RANGE = (71.0, 220.0)  # Flop/B


@dataclass(frozen=True)
class WirelessRow:
    key: str
    label: str
    bandwidth: float  # Hz, inf for the Shannon bound
    eps_tx: float | None  # J/b, None = not reported
    eps_rx: float | None
    latency: str
    source: str


@dataclass(frozen=True)
class WiredRow:
    key: str
    label: str
    capacity: float  # b/s
    active_power: float  # W
    eps: float  # J/b
    latency: str
    source: str


@dataclass(frozen=True)
class ComputerRow:
    key: str
    spec: ComputerSpec
    cores: int
    eff_range: tuple[float, float]  # J/b, as published (71 and 220 Flop/B)
    source: str


WIRELESS = {
    r.key: r
    for r in [
        WirelessRow("shannon", "Shannon limit (83 dB path loss)", float("inf"), 0.55 * PJ, 0.0,
                    "-", "k_B*T*ln2 at 290 K, infinite bandwidth"),
        WirelessRow("wifi", "Wi-Fi link", 20e6, 4.5e4 * PJ, 3.9e4 * PJ, "1 - 1000 ms",
                    "Wi-Fi power measurements, Sensors 2020"),
        WirelessRow("lte_ue_dl", "LTE UE DL", 20e6, None, 1.7e6 * PJ, "RTT 2.6 ms",
                    "Xu et al., SIGCOMM 2020"),
        WirelessRow("5g_ue_dl", "5G UE DL", 100e6, None, 4e5 * PJ, "RTT 2.2 ms",
                    "Xu et al., SIGCOMM 2020"),
        WirelessRow("lte_bs_dl", "LTE BS DL", 10e6, 4.5e7 * PJ, None, "-",
                    "Auer et al., IEEE Wireless Commun. 2011"),
    ]
}

WIRED = {
    r.key: r
    for r in [
        WiredRow("epon_1g", "1G EPON gateway", 1e9, 3.3, 300 * PJ, "0.5e-5 - 0.5 ms",
                 "EU broadband code of conduct v8, 2021"),
        WiredRow("gpon_10g", "10/10G GPON gateway", 10e9, 5.5, 200 * PJ, "0.5e-5 - 0.5 ms",
                 "EU broadband code of conduct v8, 2021"),
        WiredRow("juniper_t1600", "Juniper T1600 core router", 640e9, 6572.0, 1030 * PJ,
                 "0.01 - 27 ms", "Van Heddeghem et al., Photonic Netw. Commun. 2012"),
    ]
}

COMPUTERS = {
    r.key: r
    for r in [
        ComputerRow("henri", ComputerSpec("Henri (#1 Green500)", 31e3, 2038e12), 5920,
                    (136 * PJ, 422 * PJ), "Green500, Nov 2022"),
        ComputerRow("frontier", ComputerSpec("Frontier (#1 Top500)", 21100e3, 1102e3 * 1e12),
                    873011, (170 * PJ, 527 * PJ), "Green500, Nov 2022"),
        ComputerRow("asus_b9400", ComputerSpec("ASUS Expertbook B9400CEA", 33.47, 0.148e12), 4,
                    (2000 * PJ, 6199 * PJ), "Prieto et al., Sustainability 2022"),
        ComputerRow("cumulus", ComputerSpec("Cumulus (#106 Green500)", 530e3, 2271.38e12),
                    50176, (2069 * PJ, 6410 * PJ), "Green500, Nov 2022"),
    ]
}


def wireless_model(key: str, rate: float, base_latency: float = 0.0,
                   mac_mean_delay: float = 0.0) -> WirelessCatalogModel:
    """Catalog row plus caller-chosen throughput/latency; unreported sides count 0 J/b."""
    row = WIRELESS[key]
    return WirelessCatalogModel(
        eps_tx=row.eps_tx or 0.0,
        eps_rx=row.eps_rx or 0.0,
        rate=rate,
        base_latency=base_latency,
        mac_mean_delay=mac_mean_delay,
    )


def wired_hop(key: str, prop_delay: float = 0.0, proc_delay: float = 0.0) -> WiredHopModel:
    row = WIRED[key]
    return WiredHopModel(eps=row.eps, capacity=row.capacity, prop_delay=prop_delay,
                         proc_delay=proc_delay)


def format_table() -> str:
    """Human-readable dump of every row, in the published units."""
    lines = ["Preset       Wireless link                    BW [MHz]  TX eff [pJ/b]  RX eff [pJ/b]  "
             "Latency        Source"]
    for key, r in WIRELESS.items():
        bw = "inf" if r.bandwidth == float("inf") else f"{r.bandwidth / 1e6:g}"
        tx = "-" if r.eps_tx is None else f"{r.eps_tx / PJ:g}"
        rx = "-" if r.eps_rx is None else f"{r.eps_rx / PJ:g}"
        lines.append(f"{key:<12} {r.label:<32} {bw:>8}  {tx:>13}  {rx:>13}  {r.latency:<14} {r.source}")
    lines.append("")
    lines.append("Preset         Wired link                  Cap [Gb/s]  Active [W]  Eff [pJ/b]  "
                 "Latency          Source")
    for key, r in WIRED.items():
        lines.append(f"{key:<14} {r.label:<27} {r.capacity / 1e9:>10g}  {r.active_power:>10g}  "
                     f"{r.eps / PJ:>10g}  {r.latency:<16} {r.source}")
    lines.append("")
    lines.append("Computer                     Perf [TFlop/s]   Cores  Power [kW]  Eff [pJ/b]    Source")
    for r in COMPUTERS.values():
        eff = f"{r.eff_range[0] / PJ:g} - {r.eff_range[1] / PJ:g}"
        lines.append(f"{r.spec.name:<28} {r.spec.perf / 1e12:>14g}  {r.cores:>6}  "
                     f"{r.spec.power / 1e3:>10g}  {eff:<13} {r.source}")
    lines.append("")
    lines.append("Computer efficiencies assume 71-220 Flop/B aggregate arithmetic intensity.")
    return "\n".join(lines)
