import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fog2c.catalog import COMPUTERS
from fog2c.errors import DomainError, InfeasibleError
from fog2c.models import (
    K_BOLTZMANN,
    ComputeModel,
    ComputerSpec,
    WiredHopModel,
    WirelessCatalogModel,
    compute_cost,
    compute_energy_per_bit,
    energy_optimal_rate,
    optimal_frequency,
    optimal_rate,
    parametric_energy,
    parametric_tx_power,
    shannon_min_energy_per_bit,
    wired_path_cost,
    wireless_cost_catalog,
)
from oracles import frequency_grid_oracle, rate_energy, rate_grid_oracle
from conftest import parametric


# -- Shannon bound ------------------------------------------------------------

def test_shannon_83db():
    assert shannon_min_energy_per_bit(83, 290) == pytest.approx(0.55e-12, rel=0.02)


def test_shannon_zero_path_loss_is_thermal_floor():
    assert shannon_min_energy_per_bit(0, 290) == pytest.approx(K_BOLTZMANN * 290 * math.log(2), rel=1e-12)
    assert shannon_min_energy_per_bit(0, 290) == pytest.approx(2.775e-21, rel=1e-3)


def test_shannon_plus_20db_is_100x():
    assert shannon_min_energy_per_bit(103) == pytest.approx(100 * shannon_min_energy_per_bit(83), rel=1e-12)
    assert shannon_min_energy_per_bit(103) == pytest.approx(5.54e-11, rel=0.01)


def test_shannon_rejects_nonpositive_temperature():
    with pytest.raises(DomainError):
        shannon_min_energy_per_bit(83, 0)


@given(st.floats(-50, 200), st.floats(0.01, 50), st.floats(1, 1000))
def test_shannon_monotone_and_linear(pl, dpl, temp):
    assert shannon_min_energy_per_bit(pl + dpl, temp) > shannon_min_energy_per_bit(pl, temp)
    assert shannon_min_energy_per_bit(pl, 2 * temp) == pytest.approx(2 * shannon_min_energy_per_bit(pl, temp), rel=1e-12)


# -- computer efficiency --------------------------------------------------------

@pytest.mark.parametrize("key,intensity,pj", [
    ("henri", 71, 136), ("henri", 220, 422),
    ("frontier", 71, 170), ("frontier", 220, 527),
    ("asus_b9400", 71, 2000), ("asus_b9400", 220, 6199),
    ("cumulus", 71, 2069), ("cumulus", 220, 6410),
])
def test_computer_efficiency_endpoints(key, intensity, pj):
    assert compute_energy_per_bit(COMPUTERS[key].spec, intensity) == pytest.approx(pj * 1e-12, rel=0.02)


def test_computer_spec_invariants():
    with pytest.raises(DomainError):
        ComputerSpec("x", 0, 1)
    with pytest.raises(DomainError):
        compute_energy_per_bit(ComputerSpec("x", 1, 1), 0)


# -- catalog wireless ---------------------------------------------------------

WIFI = WirelessCatalogModel(eps_tx=4.5e4 * 1e-12, eps_rx=3.9e4 * 1e-12, rate=54e6, base_latency=1e-3)


def test_catalog_wifi_tx_energy():
    e, t = wireless_cost_catalog(WIFI, 8e6, "tx")
    assert e == pytest.approx(0.36, rel=1e-12)
    assert t == pytest.approx(8e6 / 54e6 + 1e-3, rel=1e-12)


def test_catalog_sides():
    assert wireless_cost_catalog(WIFI, 1e6, "rx")[0] == pytest.approx(0.039)
    assert wireless_cost_catalog(WIFI, 1e6, "both")[0] == pytest.approx(0.084)
    with pytest.raises(DomainError):
        wireless_cost_catalog(WIFI, 1e6, "sideways")


def test_catalog_zero_payload():
    assert wireless_cost_catalog(WIFI, 0, "tx") == (0.0, 1e-3)


def test_catalog_mac_delay_mean(rng):
    m = WirelessCatalogModel(eps_tx=0, eps_rx=0, rate=54e6, base_latency=1e-3, mac_mean_delay=5e-3)
    lat = [wireless_cost_catalog(m, 8e6, "tx", rng)[1] for _ in range(100_000)]
    assert np.mean(lat) == pytest.approx(8e6 / 54e6 + 1e-3 + 5e-3, rel=0.02)


def test_catalog_mac_delay_deterministic_given_rng_state():
    m = WirelessCatalogModel(eps_tx=0, eps_rx=0, rate=1e6, mac_mean_delay=1e-3)
    a = [wireless_cost_catalog(m, 10, rng=np.random.default_rng(5))[1] for _ in range(3)]
    assert a[0] == a[1] == a[2]


@pytest.mark.parametrize("kw", [dict(eps_tx=-1), dict(rate=0), dict(base_latency=-1), dict(mac_mean_delay=-1)])
def test_catalog_invariants(kw):
    args = dict(eps_tx=0, eps_rx=0, rate=1)
    args.update(kw)
    with pytest.raises(DomainError):
        WirelessCatalogModel(**args)


# -- parametric wireless ------------------------------------------------------

def test_parametric_power_at_unit_spectral_efficiency():
    m = parametric(path_loss=83, bw=1e7, rate_max=1e9)
    assert parametric_tx_power(m, 1e7) == pytest.approx(7.98e-6, rel=1e-3)
    # direct evaluation of N0 * B * (2**1 - 1) * G
    assert parametric_tx_power(m, 1e7) == pytest.approx(4e-21 * 1e7 * 10 ** 8.3, rel=1e-12)


def test_parametric_power_zero_and_doubling():
    m = parametric(path_loss=83, bw=1e7, rate_max=1e9)
    assert parametric_tx_power(m, 0) == 0.0
    assert parametric_tx_power(m, 2e7) == pytest.approx(3 * parametric_tx_power(m, 1e7), rel=1e-12)
    assert parametric_tx_power(m, 2e7) == pytest.approx(2.394e-5, rel=1e-3)


def test_parametric_power_above_rate_max():
    with pytest.raises(DomainError):
        parametric_tx_power(parametric(rate_max=1e8), 2e8)


@pytest.mark.parametrize("kw", [dict(bandwidth=0), dict(noise_density=0), dict(pa_efficiency=0),
                                dict(pa_efficiency=1.5), dict(circuit_power_tx=-1), dict(rate_max=0),
                                dict(rate_max=math.inf)])
def test_parametric_invariants(kw):
    from fog2c.models import WirelessParametricModel

    args = dict(bandwidth=1e6, noise_density=4e-21, path_loss_db=80, pa_efficiency=0.5,
                circuit_power_tx=0, circuit_power_rx=0, rate_max=1e8)
    args.update(kw)
    with pytest.raises(DomainError):
        WirelessParametricModel(**args)


def test_optimal_rate_worked_example():
    m = parametric(path_loss=83, bw=1e7, eta=0.5, pc_tx=0.1, pc_rx=0.1, rate_max=1e9)
    r, e, t = optimal_rate(m, 1e6, 1.0)
    assert r == pytest.approx(1.09e8, rel=0.01)
    assert e == pytest.approx(2.11e-3, rel=0.01)
    assert t == pytest.approx(1e6 / r)
    ro, eo = rate_grid_oracle(m, 1e6, 1.0)
    assert e <= eo * (1 + 1e-9)
    assert e == pytest.approx(eo, rel=1e-3)


def test_optimal_rate_without_circuit_power_goes_slow():
    m = parametric(path_loss=0, pc_tx=0, pc_rx=0, rate_max=1e9)
    r, e, _ = optimal_rate(m, 1e3, 1e6)
    assert r == pytest.approx(1e3 / 1e6)  # slowest feasible rate
    # energy decreases towards the low-rate limit N0*B*G*ln2/eta per bit
    floor = m.noise_power_at_tx * math.log(2) / m.bandwidth / m.pa_efficiency * 1e3
    assert e == pytest.approx(floor, rel=1e-6)
    assert rate_energy(m, 1e3, 10 * r) > e


def test_optimal_rate_infeasible():
    with pytest.raises(InfeasibleError):
        optimal_rate(parametric(rate_max=1e8), 1e9, 1e-3)


def test_energy_optimal_rate_edges():
    assert energy_optimal_rate(0.0, 1.0, 1e6) == math.inf
    assert energy_optimal_rate(1.0, 0.0, 1e6) == 0.0


@settings(max_examples=200, deadline=None)
@given(pl=st.floats(60, 120), bw=st.floats(1e5, 1e8), eta=st.floats(0.05, 1), pc=st.floats(0, 2),
       size=st.floats(1e3, 1e8), frac=st.floats(0.01, 1.0))
def test_optimal_rate_matches_grid(pl, bw, eta, pc, size, frac):
    m = parametric(path_loss=pl, bw=bw, eta=eta, pc_tx=pc / 2, pc_rx=pc / 2, rate_max=20 * bw)
    budget = size / (m.rate_max * frac)
    r, e, t = optimal_rate(m, size, budget)
    assert size / budget * (1 - 1e-9) <= r <= m.rate_max * (1 + 1e-9)
    _, eo = rate_grid_oracle(m, size, budget)
    assert e <= eo * (1 + 1e-9)
    assert e == pytest.approx(eo, rel=1e-3)


@settings(max_examples=100, deadline=None)
@given(size=st.floats(1e3, 1e7), b1=st.floats(1e-4, 10), grow=st.floats(1, 100))
def test_optimal_rate_nonincreasing_in_budget(size, b1, grow):
    m = parametric(path_loss=90, bw=1e6, rate_max=1e9)
    try:
        e1 = optimal_rate(m, size, b1)[1]
    except InfeasibleError:
        return
    e2 = optimal_rate(m, size, b1 * grow)[1]
    assert e2 <= e1 * (1 + 1e-12)


def test_parametric_energy_formula():
    m = parametric()
    r = 3e7
    assert parametric_energy(m, 1e6, r) == pytest.approx(
        (parametric_tx_power(m, r) / m.pa_efficiency + 0.2) * 1e6 / r, rel=1e-12)


# -- wired ------------------------------------------------------------------------

def test_wired_three_routers():
    hops = [WiredHopModel(1030e-12, 640e9, 0, 1e-4)] * 3
    e, t = wired_path_cost(hops, 8e6)
    assert e == pytest.approx(2.472e-2, rel=1e-12)
    assert t == pytest.approx(3 * (1.25e-5 + 1e-4), rel=1e-12)


def test_wired_empty_and_epon():
    assert wired_path_cost([], 123.0) == (0.0, 0.0)
    e, t = wired_path_cost([WiredHopModel(300e-12, 1e9)], 8e6)
    assert e == pytest.approx(2.4e-3, rel=1e-12)
    assert t == pytest.approx(8e-3, rel=1e-12)


def test_wired_invariants():
    for kw in (dict(eps=-1, capacity=1), dict(eps=0, capacity=0), dict(eps=0, capacity=1, prop_delay=-1)):
        with pytest.raises(DomainError):
            WiredHopModel(**kw)


# -- compute ----------------------------------------------------------------------

CM = ComputeModel(f_max=3e9, f_min=1e8, ops_per_cycle=1, p_static=10, kappa=1e-27, alpha=3)


def test_compute_cost_examples():
    assert compute_cost(CM, 1e9, 1e9) == pytest.approx((1.0, 11.0))
    assert compute_cost(CM, 0, 1e9) == (0.0, 0.0)
    cm0 = ComputeModel(f_max=3e9, f_min=1e8, ops_per_cycle=1, p_static=0, kappa=1e-27)
    assert compute_cost(cm0, 1e9, 2e9) == pytest.approx((0.5, 4.0))


def test_compute_cost_out_of_range():
    with pytest.raises(DomainError):
        compute_cost(CM, 1e9, 4e9)
    with pytest.raises(DomainError):
        compute_cost(CM, 1e9, 1e7)


@pytest.mark.parametrize("kw", [dict(f_min=0), dict(f_min=4e9), dict(ops_per_cycle=0),
                                dict(p_static=-1), dict(kappa=-1), dict(alpha=1)])
def test_compute_invariants(kw):
    args = dict(f_max=3e9, f_min=1e8, ops_per_cycle=1, p_static=1, kappa=1e-27)
    args.update(kw)
    with pytest.raises(DomainError):
        ComputeModel(**args)


def test_optimal_frequency_interior():
    f, e, t = optimal_frequency(CM, 1e9, 1.0)
    assert f == pytest.approx(1.710e9, rel=1e-3)
    assert e == pytest.approx(8.772, rel=1e-3)
    assert t == pytest.approx(1e9 / f)


def test_optimal_frequency_deadline_binds():
    f, e, t = optimal_frequency(CM, 1e9, 0.4)
    assert f == pytest.approx(2.5e9, rel=1e-12)
    assert e == pytest.approx(10.25, rel=1e-9)


def test_optimal_frequency_infeasible():
    with pytest.raises(InfeasibleError):
        optimal_frequency(CM, 1e9, 0.2)


@settings(max_examples=300, deadline=None)
@given(ps=st.floats(0, 100), kexp=st.floats(-30, -26), alpha=st.floats(1.5, 4), fmax=st.floats(1e8, 5e9),
       fmin_frac=st.floats(0.01, 1), c=st.floats(0.5, 16), n=st.floats(1e6, 1e11), b=st.floats(1e-3, 100))
def test_optimal_frequency_never_loses(ps, kexp, alpha, fmax, fmin_frac, c, n, b):
    cm = ComputeModel(f_max=fmax, f_min=fmax * fmin_frac, ops_per_cycle=c, p_static=ps,
                      kappa=10 ** kexp, alpha=alpha)
    try:
        f, e, t = optimal_frequency(cm, n, b)
    except InfeasibleError:
        assert n / (c * b) > fmax
        return
    assert cm.f_min * (1 - 1e-12) <= f <= cm.f_max * (1 + 1e-12)
    assert t <= b * (1 + 1e-9)
    assert e <= compute_cost(cm, n, cm.f_max)[1] * (1 + 1e-12)
    f_dl = max(cm.f_min, n / (c * b))
    assert e <= compute_cost(cm, n, f_dl)[1] * (1 + 1e-12)
    oracle = frequency_grid_oracle(cm, n, b, 2000)
    assert e <= oracle[1] * (1 + 1e-9)


@settings(max_examples=100, deadline=None)
@given(n=st.floats(1e6, 1e10), b=st.floats(0.01, 100))
def test_no_static_power_picks_slowest_clock(n, b):
    cm = ComputeModel(f_max=3e9, f_min=1e8, ops_per_cycle=1, p_static=0, kappa=1e-27)
    try:
        f, _, _ = optimal_frequency(cm, n, b)
    except InfeasibleError:
        return
    assert f == pytest.approx(max(cm.f_min, n / b), rel=1e-12)


def test_cost_functions_are_pure():
    assert optimal_frequency(CM, 1e9, 0.7) == optimal_frequency(CM, 1e9, 0.7)
    m = parametric()
    assert optimal_rate(m, 1e6, 0.1) == optimal_rate(m, 1e6, 0.1)
