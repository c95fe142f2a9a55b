"""Unit-tagged quantity parsing.

Config values carry explicit units ("4.5e4 pJ/b", "3 GHz", "2 MB") and are
converted to SI on parse. Each dimension has one SI spelling used when a
config is emitted back to text.
"""
from __future__ import annotations

import math
import re

_PREFIX = {
    "T": 1e12, "G": 1e9, "M": 1e6, "k": 1e3, "": 1.0,
    "m": 1e-3, "u": 1e-6, "µ": 1e-6, "n": 1e-9, "p": 1e-12, "f": 1e-15,
}


def _prefixed(base: str, scale: float = 1.0, prefixes: str = "TGMk mupnfµ") -> dict[str, float]:
    out = {}
    for p in prefixes.replace(" ", ""):
        out[p + base] = scale * _PREFIX[p]
    out[base] = scale
    return out


def _table() -> dict[str, dict[str, float]]:
    t: dict[str, dict[str, float]] = {}
    t["energy"] = _prefixed("J")
    t["energy_per_bit"] = {k + "/b": v for k, v in _prefixed("J").items()}
    t["energy_per_bit"].update({k + "/B": v / 8 for k, v in _prefixed("J").items()})
    t["power"] = _prefixed("W")
    t["time"] = _prefixed("s", prefixes="mupnµ")
    t["time"].update({"min": 60.0, "h": 3600.0})
    t["frequency"] = _prefixed("Hz", prefixes="TGMk")
    t["rate"] = _prefixed("b/s", prefixes="TGMk")
    t["rate"].update({k.replace("b/s", "bps"): v for k, v in t["rate"].items()})
    t["rate"].update({k + "B/s": 8 * v for k, v in _PREFIX.items() if k in "TGMk"})
    t["size"] = _prefixed("b", prefixes="TGMk")
    t["size"].update({k + "B": 8 * v for k, v in _PREFIX.items() if k in "TGMk"})
    t["size"]["bit"] = 1.0
    t["size"]["bits"] = 1.0
    t["intensity"] = {"ops/b": 1.0, "ops/B": 1 / 8, "Flop/b": 1.0, "Flop/B": 1 / 8,
                      "cycles/b": 1.0}
    t["flop_intensity"] = {"Flop/B": 1.0, "GFlop/B": 1e9, "Flop/b": 8.0}
    t["perf"] = {p + "Flop/s": v for p, v in _PREFIX.items() if p in "PTGMk"}
    t["perf"].update({"Flop/s": 1.0, "PFlop/s": 1e15})
    t["per_time"] = {"/s": 1.0, "1/s": 1.0, "Hz": 1.0, "/ms": 1e3, "1/ms": 1e3,
                     "/us": 1e6, "/min": 1 / 60}
    t["decibel"] = {"dB": 1.0}
    t["temperature"] = {"K": 1.0}
    t["noise_density"] = {"W/Hz": 1.0, "mW/Hz": 1e-3}
    return t


UNITS = _table()

SI_UNIT = {
    "energy": "J", "energy_per_bit": "J/b", "power": "W", "time": "s",
    "frequency": "Hz", "rate": "b/s", "size": "b", "intensity": "ops/b",
    "flop_intensity": "Flop/B", "perf": "Flop/s", "per_time": "/s",
    "decibel": "dB", "temperature": "K", "noise_density": "W/Hz",
}

_NUM = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?|[-+]?inf)\s*(.*?)\s*$")


class UnitError(ValueError):
    pass


def parse_quantity(text, dimension: str) -> float:
    """Convert ``"<number> <unit>"`` to an SI float of the given dimension.

    ``dBm/Hz`` is accepted for noise densities (logarithmic, not a scale).
    """
    if dimension not in UNITS:
        raise KeyError(dimension)
    if isinstance(text, bool) or not isinstance(text, str):
        raise UnitError(f"expected a unit-tagged string like '1 {SI_UNIT[dimension]}', got {text!r}")
    m = _NUM.match(text)
    if not m:
        raise UnitError(f"cannot parse quantity {text!r}")
    value = float(m.group(1))
    unit = m.group(2)
    if dimension == "noise_density" and unit == "dBm/Hz":
        return 10 ** (value / 10) * 1e-3
    if not unit:
        raise UnitError(f"missing unit in {text!r} (expected {SI_UNIT[dimension]} or a scaled variant)")
    scale = UNITS[dimension].get(unit)
    if scale is None:
        raise UnitError(f"unit {unit!r} is not a valid {dimension.replace('_', ' ')} unit")
    return value * scale


def format_quantity(value: float, dimension: str) -> str:
    if math.isinf(value):
        return f"{'-' if value < 0 else ''}inf {SI_UNIT[dimension]}"
    return f"{value!r} {SI_UNIT[dimension]}"
