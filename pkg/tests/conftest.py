import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from fog2c.models import ComputeModel, WiredHopModel, WirelessCatalogModel, WirelessParametricModel
from fog2c.topology import NodeSpec, Topology, wired, wireless
from fog2c.workload import Request

IDEAL = WirelessCatalogModel(eps_tx=0.0, eps_rx=0.0, rate=math.inf)
ROUTER_HOP = WiredHopModel(eps=1030e-12, capacity=1e9, prop_delay=1e-3)


def two_fog(uplink=IDEAL, p_static=(10.0, 1.0)):
    """dev -> ap1 (collocated with fog1) -> one router hop -> fog2."""
    fog1 = ComputeModel(f_max=3e9, f_min=1e8, ops_per_cycle=1, p_static=p_static[0], kappa=1e-27)
    fog2 = ComputeModel(f_max=3e9, f_min=1e8, ops_per_cycle=1, p_static=p_static[1], kappa=1e-27)
    nodes = [
        NodeSpec("dev", "device"),
        NodeSpec("ap1", "access_point", collocated="fog1"),
        NodeSpec("fog1", "fog", compute=fog1),
        NodeSpec("fog2", "fog", compute=fog2),
    ]
    links = wireless("dev", "ap1", uplink) + wired("fog1", "fog2", ROUTER_HOP)
    return Topology(nodes, links)


def two_fog_request(**kw):
    args = dict(id="q", source="dev", size=8e6, intensity=100.0, deadline=1.0, assigned_ap="ap1")
    args.update(kw)
    return Request(**args)


def parametric(path_loss=83.0, bw=1e7, eta=0.5, pc_tx=0.1, pc_rx=0.1, rate_max=1e9):
    return WirelessParametricModel(bandwidth=bw, noise_density=4e-21, path_loss_db=path_loss,
                                   pa_efficiency=eta, circuit_power_tx=pc_tx,
                                   circuit_power_rx=pc_rx, rate_max=rate_max)


@pytest.fixture
def topo2():
    return two_fog()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


CONFIG_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "src", "fog2c", "configs")


def bundled(name: str) -> dict:
    """Raw JSON of a shipped config, for tests that tweak and re-serialise it."""
    import json
    with open(os.path.join(CONFIG_DIR, name), encoding="utf-8") as fh:
        return json.load(fh)


# acceptance verdict lines, echoed again in the terminal summary
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
