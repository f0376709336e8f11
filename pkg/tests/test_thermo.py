import math
import warnings

import numpy as np
import pytest

from liouvsim import bea, oracle
from liouvsim import phasespace as ps
from liouvsim import thermo as th
from conftest import toy_pair, toy_state

SMALL = dict(g_x=4, g_p=3, g_s=3, g_ps=3)


@pytest.fixture(scope="module")
def mass_pair():
    return toy_pair(charges=(1.0, 1.0), masses=(1.0, 2.0), well=1.0, electronic=False, **SMALL)


def test_config_validation():
    with pytest.raises(ValueError):
        th.ThermoConfig(n_lambda=0)
    with pytest.raises(ValueError):
        th.ThermoConfig(mode="exact")
    with pytest.raises(ValueError):
        th.ThermoConfig(xi=1.0)
    np.testing.assert_allclose(th.ThermoConfig(n_lambda=2).lambdas, [0, 0.5])


def test_pair_requires_shared_layout():
    a = th.System(ps.PhaseSpaceSpec(N=1, g_x=4, g_p=3, g_s=3, g_ps=3))
    b = th.System(ps.PhaseSpaceSpec(N=1, g_x=5, g_p=3, g_s=3, g_ps=3))
    with pytest.raises(th.ThermoError, match="layouts"):
        th.AlchemicalPair(a, b)


def test_nuclear_energies_match_oracle(mass_pair):
    for s in (mass_pair.a, mass_pair.b):
        np.testing.assert_allclose(th.nuclear_energy_values(s), oracle.microstate_energies(s.pspec), atol=1e-12)


def test_nuclear_energy_includes_ground_energy():
    pair = toy_pair(**SMALL)
    e0 = oracle.ground_energy(3, pair.a.espec.omega, [1.0], [0.0])
    ref = oracle.microstate_energies(pair.a.pspec, e0=lambda xs: e0)
    np.testing.assert_allclose(th.nuclear_energy_values(pair.a), ref, atol=1e-10)


def test_delta_hamiltonian_contract(mass_pair):
    dh = th.delta_hamiltonian(mass_pair)
    vals = th.delta_hamiltonian_values(mass_pair)
    assert bea.verify_contract(dh, np.diag(vals)) <= dh.epsilon + 1e-12
    shared = th.delta_hamiltonian(mass_pair, cancel_shared=True)
    assert bea.verify_contract(shared, np.diag(vals)) <= shared.epsilon + 1e-12
    assert shared.alpha <= dh.alpha


def test_interpolated_liouvillian(mass_pair):
    la, lb = (L.dense().toarray() for L in mass_pair.liouvillians)
    mid = th.interpolated_liouvillian(mass_pair, 0.25)
    assert bea.verify_contract(mid, 0.75 * la + 0.25 * lb) < 1e-10
    np.testing.assert_allclose(th.interpolated_dense(mass_pair, 0.25).toarray(), 0.75 * la + 0.25 * lb)


def test_duplicate_bath_properties(mass_pair):
    cfg = th.ThermoConfig(n_lambda=2, t_eq=0.5)
    st = th.superposed_equilibrate(mass_pair, cfg, toy_state(mass_pair), 1e-6)
    cp = th.duplicate_bath(st)
    assert cp.copied and th.duplicate_bath(cp) is cp
    lay = mass_pair.layout
    g = lay.dims[lay.index("s")]
    a = cp.blocks.reshape((2,) + lay.dims + (g,))
    # copy is diagonal in (s, s') and preserves the s marginal and the norm
    s_ax = 1 + lay.index("s")
    off = np.moveaxis(a, (s_ax, a.ndim - 1), (-2, -1)) * (1 - np.eye(g))
    assert np.max(np.abs(off)) == 0
    np.testing.assert_allclose(np.linalg.norm(cp.blocks, axis=1), np.linalg.norm(st.blocks, axis=1))
    with pytest.raises(th.ThermoError):
        cp.block_state(0)


def test_duplicate_bath_nve_warns():
    spec = ps.PhaseSpaceSpec(N=1, ensemble="NVE", g_x=4, g_p=3, well_charge=1.0, well_center=1.5)
    pair = th.AlchemicalPair(th.System(spec), th.System(spec.with_(masses=(2.0,))))
    st = th.superposed_equilibrate(pair, th.ThermoConfig(n_lambda=2, t_eq=0.3),
                                   ps.KvNState.gaussian(spec, {}, {"x0": 1.0, "p0": 1.0}), 1e-6)
    with pytest.warns(UserWarning, match="NVE"):
        assert th.duplicate_bath(st) is st


def test_hadamard_test_linearity(mass_pair):
    cfg = th.ThermoConfig(n_lambda=2, t_eq=0.5)
    st = th.duplicate_bath(th.superposed_equilibrate(mass_pair, cfg, toy_state(mass_pair), 1e-6))
    n = mass_pair.layout.size
    rng = np.random.default_rng(0)
    v1, v2 = rng.uniform(-1, 1, n), rng.uniform(-1, 1, n)
    e1, e2 = bea.diagonal_encoding(v1, 1.0), bea.diagonal_encoding(v2, 1.0)
    e12 = bea.diagonal_encoding((v1 + v2) / 2, 1.0)
    p1, p2, p12 = (th.hadamard_test(st, e).exact_probability for e in (e1, e2, e12))
    assert p12 == pytest.approx((p1 + p2) / 2, abs=1e-12)
    one = th.hadamard_test(st, bea.diagonal_encoding(np.ones(n), 1.0))
    assert one.probability == pytest.approx(0.5 * (np.mean(st.success_probabilities) + 1), abs=1e-10)


def test_hadamard_sampled_needs_shots(mass_pair):
    cfg = th.ThermoConfig(n_lambda=1, t_eq=0.0)
    st = th.superposed_equilibrate(mass_pair, cfg, toy_state(mass_pair), 1e-6)
    with pytest.raises(th.ThermoError):
        th.hadamard_test(st, th.delta_hamiltonian(mass_pair), mode=th.SAMPLED)
    r = th.hadamard_test(st, th.delta_hamiltonian(mass_pair), mode=th.SAMPLED, shots=1000,
                         rng=np.random.default_rng(1))
    assert abs(r.probability - r.exact_probability) < 0.1


# ---------------------------------------------------------------- estimation

@pytest.mark.parametrize("m", [3, 5])
def test_qae_exact_on_grid(m):
    M = 2 ** m
    for y in range(M // 2 + 1):
        p = math.sin(math.pi * y / M) ** 2
        probs, est = th.qae_distribution(p, m)
        assert probs.sum() == pytest.approx(1.0)
        assert est[np.argmax(probs)] == pytest.approx(p, abs=1e-12)
        assert probs[np.isclose(est, p, atol=1e-12)].sum() == pytest.approx(1.0, abs=1e-9)


def test_qae_off_grid_success_probability():
    m = 6
    probs, est = th.qae_distribution(0.3137, m)
    M = 2 ** m
    close = np.abs(est - 0.3137) <= math.pi / M + math.pi ** 2 / M ** 2
    assert probs[close].sum() >= 8 / math.pi ** 2


def test_grover_matrix_rotation():
    Q, start = th.grover_matrix(0.25)
    w = np.linalg.eigvals(Q)
    assert np.allclose(np.abs(w), 1)
    assert np.sort(np.abs(np.angle(w)))[-1] == pytest.approx(2 * math.asin(0.5))


def test_median_repetitions():
    r = th.median_repetitions(0.75, 0.05)
    assert r % 2 == 1 and math.exp(-2 * r * 0.25 ** 2) <= 0.05


def test_amplitude_estimate_modes():
    rng = np.random.default_rng(0)
    ideal = th.amplitude_estimate(0.4, 1.0, 0.01, th.ThermoConfig(mode="ideal"), rng)
    assert ideal.estimate == 0.4
    qae = th.amplitude_estimate(0.4, 1.0, 0.01, th.ThermoConfig(mode="qae"), rng)
    assert abs(qae.estimate - 0.4) <= qae.precision
    assert qae.ancillas == th.qae_required_ancillas(1.0, 0.01)
    sm = th.amplitude_estimate(0.4, 1.0, 0.05, th.ThermoConfig(mode="sampled"), rng)
    assert abs(sm.estimate - 0.4) <= 0.05 / 2


def test_amplitude_estimate_rejects_small_register():
    with pytest.raises(th.ThermoError, match="ancillas"):
        th.amplitude_estimate(0.4, 1.0, 0.01, th.ThermoConfig(mode="qae", qae_ancillas=3))


# ---------------------------------------------------------------- end to end

def test_error_budget_split():
    b = th.error_budget(0.06, 2.0)
    assert b["eps_disc"] == pytest.approx(0.02) and b["eps_delta"] == pytest.approx(0.01)
    assert 2 * 2.0 * math.sqrt(2 * b["eps_L"]) == pytest.approx(0.01)


def test_identical_systems_give_zero(mass_pair):
    same = th.AlchemicalPair(mass_pair.a, mass_pair.a)
    r = th.free_energy_difference(same, th.ThermoConfig(n_lambda=2, t_eq=0.5, mode="ideal"), toy_state(same))
    assert abs(r.delta_f) < 1e-10


def test_mass_pair_matches_dynamic_oracle(mass_pair):
    cfg = th.ThermoConfig(n_lambda=4, t_eq=0.5, eps=0.05, mode="ideal")
    rho0 = toy_state(mass_pair)
    r = th.free_energy_difference(mass_pair, cfg, rho0)
    la, lb = (L.dense() for L in mass_pair.liouvillians)
    ref, vals = oracle.dynamic_delta_f(la, lb, th.delta_hamiltonian_values(mass_pair), rho0.amplitudes, 0.5, 4)
    assert abs(r.delta_f - ref) <= r.ledger["eps_L"] + r.ledger["eps_delta"] + 1e-9
    np.testing.assert_allclose([p["expectation"] for p in r.per_lambda], vals, atol=r.ledger_total)
    assert all(p["block_fidelity"] > 1 - 1e-6 for p in r.per_lambda)


def test_antisymmetry_ideal(mass_pair):
    cfg = th.ThermoConfig(n_lambda=4, t_eq=0.5, eps=0.05, mode="ideal")
    f = th.free_energy_difference(mass_pair, cfg, toy_state(mass_pair))
    b = th.free_energy_difference(mass_pair.reversed(), cfg, toy_state(mass_pair))
    assert abs(f.delta_f + b.delta_f) <= 2 * cfg.eps
