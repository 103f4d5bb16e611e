import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thermal_machines.dissipation import (
    BathSpec,
    Dissipator,
    bohr_decomposition,
    bose_occupation,
    build_dissipators,
    global_dissipator,
    local_dissipator,
    rate_pair,
)
from thermal_machines.dynamics import dissipator_superoperator, evolve, liouvillian, steady_state
from thermal_machines.linalg import dag, gibbs_state, partial_trace, trace_distance
from thermal_machines.models import build_three_body, build_three_level


def test_bose_occupation_examples():
    assert bose_occupation(1e4, 1.0) == 0.0
    assert abs(bose_occupation(math.log(2), 1.0) - 1.0) < 1e-14
    assert round(bose_occupation(1.0, 1.0), 4) == 0.5820
    for bad in [(0, 1), (1, 0), (-1, 1)]:
        with pytest.raises(ValueError):
            bose_occupation(*bad)


@given(st.floats(1e-3, 50), st.floats(1e-2, 100), st.sampled_from([1, 2, 3]))
@settings(max_examples=200, deadline=None)
def test_detailed_balance_ratio(omega, temp, dim):
    down, up = rate_pair(omega, BathSpec("c", temp, 0.01, dim))
    assert down > 0 and up >= 0
    assert abs(up / down - math.exp(-omega / temp)) <= 1e-14 * max(math.exp(-omega / temp), 1e-300)


def test_rate_pair_limits_and_power_law():
    down, up = rate_pair(1.0, BathSpec("c", 1e-3, 1.0))
    assert up == 0.0 and down == 1.0
    b3 = BathSpec("c", 1.0, 0.1, 3)
    d1, _ = rate_pair(0.5, b3)
    d2, _ = rate_pair(1.0, b3)
    n1, n2 = bose_occupation(0.5, 1.0), bose_occupation(1.0, 1.0)
    assert abs((d2 / (n2 + 1)) / (d1 / (n1 + 1)) - 8.0) < 1e-12
    with pytest.raises(ValueError):
        rate_pair(0.0, b3)
    with pytest.raises(ValueError):
        BathSpec("c", 1.0, 0.1, 4)


def test_local_dissipator_rates_and_fixed_point():
    m = build_three_body("qubit", 0.4, 1.3, 0.0)
    bath = BathSpec("c", 0.8, 0.01)
    d = local_dissipator(m, "c", bath)
    down, up = rate_pair(0.4, bath)
    assert [r for _, r in d.terms] == [down, up]
    # alone, it drives the cold qubit to its Gibbs populations
    l = liouvillian(m.h_free, [d] + [local_dissipator(m, lab, BathSpec(lab, 1.0, 0.01)) for lab in "hw"])
    rep = steady_state(l)
    red = partial_trace(rep.rho_ss, m.dims, 0)
    assert abs(red[1, 1].real / red[0, 0].real - math.exp(-0.4 / 0.8)) < 1e-10
    hot = rate_pair(0.4, BathSpec("c", 1e8, 0.01))
    assert abs(hot[1] / hot[0] - 1) < 1e-8
    with pytest.raises(ValueError):
        local_dissipator(m, "x", bath)


def test_ladder_local_dissipator_has_one_pair_per_link():
    m = build_three_body({"c": "qubit", "h": "qubit", "w": ("ladder", 4)}, 0.4, 1.3, 0.0)
    d = local_dissipator(m, "w", BathSpec("w", 1.0, 0.01))
    assert len(d.terms) == 6


def test_global_reduces_to_local_for_decoupled_qubit():
    m = build_three_body("qubit", 0.4, 1.3, 0.0)
    bath = BathSpec("c", 0.8, 0.01)
    sg = dissipator_superoperator(global_dissipator(m, bath))
    sl = dissipator_superoperator(local_dissipator(m, "c", bath))
    assert np.max(abs(sg - sl)) < 1e-14


def test_global_bohr_frequencies_split_by_coupling():
    g = 0.1
    m = build_three_body("qubit", 0.4, 1.3, g)
    freqs = [w for w, _ in bohr_decomposition(m.hamiltonian, m.bath_coupling_ops["c"])]
    for target in (0.4 - g, 0.4 + g):
        assert min(abs(np.array(freqs) - target)) < 1e-9


@pytest.mark.parametrize("label", ["c", "h", "w"])
def test_global_jump_operators_lower_energy(label):
    m = build_three_body("qubit", 0.4, 1.3, 0.1)
    h = m.hamiltonian
    for w, a in bohr_decomposition(h, m.bath_coupling_ops[label]):
        assert np.max(abs(h @ a - a @ h + w * a)) < 1e-9
    d = global_dissipator(m, BathSpec(label, 0.9, 0.02, 2))
    gibbs = gibbs_state(h, 0.9)
    assert np.linalg.norm(d.apply(gibbs)) < 1e-9


def test_single_bath_global_relaxes_to_gibbs():
    m = build_three_body("qubit", 0.4, 1.3, 0.2)
    x = sum(m.bath_coupling_ops.values())
    d = global_dissipator(m, BathSpec("c", 0.7, 0.5), coupling=x)
    l = liouvillian(m.hamiltonian, [d])
    rng = np.random.default_rng(0)
    a = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    rho0 = a @ dag(a)
    rho0 /= np.trace(rho0)
    traj = evolve(rho0, l, [0.0, 400.0])
    assert trace_distance(traj.states[-1], gibbs_state(m.hamiltonian, 0.7)) < 1e-8


def test_global_rejects_empty_coupling_and_dissipator_validation():
    m = build_three_level(0.3, 1.0)
    with pytest.raises(ValueError):
        global_dissipator(m, BathSpec("c", 1.0, 0.1), coupling=np.zeros((3, 3)))
    with pytest.raises(ValueError):
        Dissipator([(np.eye(2), -1.0)], "local")
    with pytest.raises(ValueError):
        build_dissipators(m, [], "nonsense")


def test_adjoint_is_dual_of_apply():
    m = build_three_body("qubit", 0.4, 1.3, 0.1)
    d = global_dissipator(m, BathSpec("h", 1.2, 0.03))
    rng = np.random.default_rng(3)
    x = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    rho = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    assert abs(np.trace(x @ d.apply(rho)) - np.trace(d.adjoint(x) @ rho)) < 1e-12
