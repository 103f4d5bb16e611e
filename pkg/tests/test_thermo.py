import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thermal_machines.dissipation import BathSpec, build_dissipators
from thermal_machines.dynamics import liouvillian, steady_state
from thermal_machines.linalg import dag, gibbs_state, partial_trace, trace_distance
from thermal_machines.models import build_three_body
from thermal_machines.thermo import (
    VirtualTemperature,
    carnot_cop,
    carnot_efficiency,
    cooling_window,
    cop_at_max_power_bound,
    diagonal_ergotropy,
    ergotropy,
    ergotropy_change,
    ladder_ergotropy_asymptotic,
    passive_state,
    split_virtual_temperatures,
    virtual_temperature,
)


def rand_density(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = a @ dag(a)
    return rho / np.trace(rho)


def rand_herm(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a + dag(a)) / 2


def rand_unitary(rng, n):
    q, r = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    return q * (np.diag(r) / abs(np.diag(r)))


def brute_force_ergotropy(rho, h):
    """Max work over every assignment of rho's eigenvalues to the levels of h."""
    p = np.linalg.eigvalsh(rho)
    e = np.linalg.eigvalsh(h)
    mean = np.trace(h @ rho).real
    return mean - min(np.dot(p[list(perm)], e) for perm in itertools.permutations(range(len(p))))


# virtual temperatures


def test_virtual_temperature_examples():
    assert round(virtual_temperature(1.0, 0.7, 1 / 1.1, 1 / 1.5).value, 4) == 0.6781
    assert abs(virtual_temperature(1.0, 0.7, 1 / 1.3, 1 / 1.3).value - 1.3) < 1e-14
    plus, minus = split_virtual_temperatures(0.3, 0.7, 1.0, 0.1, 1 / 1.1, 1 / 1.5)
    # (omega_c +/- g) / (beta_h omega_h - beta_w (omega_w -/+ g)) evaluated by hand
    assert abs(plus.value - 0.4 / (1 / 1.1 - 0.6 / 1.5)) < 1e-14
    assert abs(minus.value - 0.2 / (1 / 1.1 - 0.8 / 1.5)) < 1e-14
    assert (round(plus.value, 4), round(minus.value, 4)) == (0.7857, 0.5323)
    p0, m0 = split_virtual_temperatures(0.3, 0.7, 1.0, 0.0, 1 / 1.1, 1 / 1.5)
    ref = virtual_temperature(1.0, 0.7, 1 / 1.1, 1 / 1.5).value
    assert p0 == m0 and abs(p0.value - ref) < 1e-14


def test_virtual_temperature_infinite_and_negative_tags():
    inf = virtual_temperature(1.0, 0.5, 1.0, 2.0)  # beta_h w_h == beta_w w_w
    assert inf.kind == "+inf" and inf.value == math.inf and not inf.is_negative
    neg = virtual_temperature(1.0, 0.5, 0.1, 1.0)
    assert neg.is_negative and neg.value < 0
    assert VirtualTemperature.from_beta(math.inf).value == 0.0
    with pytest.raises(ValueError):
        virtual_temperature(-1.0, 0.5, 1.0, 1.0)


@given(st.floats(0.05, 5), st.floats(0.05, 0.95), st.floats(0.1, 10), st.floats(0.1, 10))
@settings(max_examples=200, deadline=None)
def test_virtual_temperature_sign(wh, frac, th, tw):
    ww = frac * wh
    tv = virtual_temperature(wh, ww, 1 / th, 1 / tw)
    if wh / th > ww / tw * (1 + 1e-9):
        assert tv.value > 0
    elif ww / tw > wh / th * (1 + 1e-9):
        assert tv.is_negative
    # engine substitution: colder leg at omega_c
    wc = ww
    tc = th / 2
    if wc / tc > wh / th * (1 + 1e-9):
        assert virtual_temperature(wh, wc, 1 / th, 1 / tc).is_negative


# windows and Carnot bounds


def test_window_and_carnot_examples():
    assert round(cooling_window(1.0, 1.1, 1.5), 4) == 2.6667
    assert round(carnot_cop(1.0, 1.1, 1.5), 4) == 2.6667
    assert cooling_window(1.0, 1.5, 1.5) == 0.0
    assert carnot_cop(1.0, 1.0, 1.5) == math.inf
    assert carnot_efficiency(1.0, 10.0) == 0.9
    assert carnot_efficiency(2.0, 2.0) == 0.0
    assert abs(cop_at_max_power_bound(1.0, 1.1, 1.5, 3) - 2.0) < 1e-12
    assert cooling_window(1e-9, 1.1, 1.5) < 1e-8
    for bad in [(1.1, 1.0, 1.5), (1.0, 1.6, 1.5), (0.0, 1.0, 2.0)]:
        with pytest.raises(ValueError):
            cooling_window(*bad)
    with pytest.raises(ValueError):
        carnot_efficiency(2.0, 1.0)


@given(st.floats(0.01, 10), st.floats(1.001, 5), st.floats(1.001, 5))
@settings(max_examples=200, deadline=None)
def test_window_equals_carnot_cop(tc, a, b):
    th, tw = tc * a, tc * a * b
    assert cooling_window(tc, th, tw) == carnot_cop(tc, th, tw)


# passive states and ergotropy


def test_ergotropy_examples():
    w = 1.7
    h = np.diag([0.0, w])
    rep = ergotropy(np.diag([0.3, 0.7]), h)
    assert abs(rep.work - 0.4 * w) < 1e-14
    assert np.allclose(rep.passive_state, np.diag([0.7, 0.3]))
    plus = np.full((2, 2), 0.5)
    assert abs(ergotropy(plus, h).work - w / 2) < 1e-14
    ground = np.diag([1.0, 0.0])
    assert abs(ergotropy_change(ground, np.diag([0.3, 0.7]), h) - 0.4 * w) < 1e-14
    assert ergotropy_change(np.diag([0.8, 0.2]), np.diag([0.8, 0.2]), h) == 0.0
    assert ergotropy_change(gibbs_state(h, 0.5), gibbs_state(h, 3.0), h) == 0.0


def test_gibbs_states_are_passive():
    rng = np.random.default_rng(1)
    for n in range(2, 6):
        h = rand_herm(rng, n)
        g = gibbs_state(h, 0.8)
        assert trace_distance(passive_state(g, h), g) < 1e-12
        assert ergotropy(g, h).work < 1e-12


def test_brute_force_ergotropy_oracle():
    rng = np.random.default_rng(2)
    for k in range(100):
        n = 2 + k % 4
        rho, h = rand_density(rng, n), rand_herm(rng, n)
        rep = ergotropy(rho, h)
        assert abs(rep.work - brute_force_ergotropy(rho, h)) < 1e-12
        pi = rep.passive_state
        assert ergotropy(pi, h).work < 1e-12
        assert abs(brute_force_ergotropy(pi, h)) < 1e-12


@given(st.integers(0, 2**32 - 1), st.integers(2, 5))
@settings(max_examples=50, deadline=None)
def test_ergotropy_invariants(seed, n):
    rng = np.random.default_rng(seed)
    rho, h = rand_density(rng, n), rand_herm(rng, n)
    rep = ergotropy(rho, h)
    e = np.linalg.eigvalsh(h)
    assert rep.work >= 0
    assert rep.work <= rep.mean_energy - e[0] + 1e-12
    assert np.allclose(np.linalg.eigvalsh(rep.passive_state), np.linalg.eigvalsh(rho), atol=1e-10)
    v = np.linalg.eigh(h)[1]
    pops = np.real(np.diag(dag(v) @ rep.passive_state @ v))
    assert np.all(np.diff(pops) <= 1e-12)
    u = rand_unitary(rng, n)
    assert abs(ergotropy(u @ rho @ dag(u), u @ h @ dag(u)).work - rep.work) < 1e-10


def test_degenerate_levels_do_not_change_work():
    h = np.diag([0.0, 1.0, 1.0, 2.0])
    rho = np.diag([0.1, 0.2, 0.3, 0.4])
    swapped = np.diag([0.1, 0.3, 0.2, 0.4])
    assert abs(ergotropy(rho, h).work - ergotropy(swapped, h).work) < 1e-15
    assert abs(diagonal_ergotropy([0.1, 0.2, 0.3, 0.4], [0, 1, 1, 2]) - ergotropy(rho, h).work) < 1e-15


def test_ladder_asymptotic_examples():
    assert round(ladder_ergotropy_asymptotic(100.0, 10.0), 2) == 84.04
    assert ladder_ergotropy_asymptotic(5.0, 0.0) == 5.0
    with pytest.raises(ValueError):
        ladder_ergotropy_asymptotic(-1.0, 1.0)


@pytest.mark.parametrize("nbar", [100, 200, 400])
def test_ladder_asymptotic_against_exact_gaussian(nbar):
    sigma = math.sqrt(3 * nbar)
    n = np.arange(int(nbar + 12 * sigma))
    p = np.exp(-((n - nbar) ** 2) / (2 * sigma**2))
    p /= p.sum()
    mean = float(np.dot(p, n))
    std = float(np.sqrt(np.dot(p, (n - mean) ** 2)))
    exact = diagonal_ergotropy(p, n.astype(float))
    assert abs(ladder_ergotropy_asymptotic(mean, std) / exact - 1) < 0.02


def test_virtual_qubit_population_ratio_at_weak_coupling():
    wc, wh = 0.4, 1.3
    ww = wh - wc
    th, tw = 1.1, 1.5
    m = build_three_body("qubit", wc, wh, 0.005)
    bs = [BathSpec("c", 1.0, 0.01), BathSpec("h", th, 0.01), BathSpec("w", tw, 0.01)]
    rep = steady_state(liouvillian(m.hamiltonian, build_dissipators(m, bs, "local")), m.h_free)
    hw = partial_trace(rep.rho_ss, m.dims, [1, 2])
    # virtual qubit: |0_h 1_w> (ground) and |1_h 0_w> (excited), gap omega_c
    ratio = hw[2, 2].real / hw[1, 1].real
    tv = virtual_temperature(wh, ww, 1 / th, 1 / tw)
    assert abs(ratio / math.exp(-wc / tv.value) - 1) < 0.01
