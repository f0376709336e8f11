import numpy as np
import pytest
import scipy.linalg as sl

from liouvsim import bea, oracle
from liouvsim import electronic as el
from liouvsim import phasespace as ps


@pytest.fixture(scope="module")
def toy():
    es = el.ElectronicSpec(n_planewaves=3, h_el=0.5)
    pspec = ps.PhaseSpaceSpec(N=2, ensemble="NVE", g_x=4, g_p=3, h_x=es.omega / 4, masses=(1, 1), charges=(1, 1))
    return es, pspec


def test_spec_validation():
    with pytest.raises(el.ElectronicError):
        el.ElectronicSpec(n_planewaves=4)
    with pytest.raises(el.ElectronicError):
        el.ElectronicSpec(spatial_dim=3)
    with pytest.raises(el.ElectronicError):
        el.ElectronicSpec(mode="approximate")
    es = el.ElectronicSpec(n_planewaves=5, h_el=0.25, n_electrons=2)
    assert es.omega == pytest.approx(1.25) and es.dim == 25
    np.testing.assert_array_equal(es.indices, [-2, -1, 0, 1, 2])


@pytest.mark.parametrize("x", [[0.3], [1.7], [0.2, 1.1]])
def test_matrix_matches_oracle(x):
    es = el.ElectronicSpec(n_planewaves=5, h_el=1.0)
    z = [1.5] * len(x)
    h, be = el.electronic_hamiltonian(es, z, x)
    np.testing.assert_allclose(h, oracle.electronic_matrix(5, es.omega, z, x), atol=1e-12)
    np.testing.assert_allclose(h, h.conj().T, atol=1e-13)
    assert bea.verify_contract(be, h) < 1e-10
    assert be.alpha == pytest.approx(el.hamiltonian_alpha(es, z))


def test_force_matrix_matches_oracle_and_fd():
    es = el.ElectronicSpec(n_planewaves=5, h_el=1.0)
    x, step = 0.7, 1e-5
    f, fb = el.force_operator(es, [1.5], [x], 0)
    np.testing.assert_allclose(f, oracle.electronic_force_matrix(5, es.omega, 1.5, x), atol=1e-12)
    fd = (el.electronic_matrix(es, [1.5], [x + step]) - el.electronic_matrix(es, [1.5], [x - step])) / (2 * step)
    np.testing.assert_allclose(f, fd, atol=1e-8)
    assert bea.verify_contract(fb, f) < 1e-10
    assert fb.alpha == pytest.approx(el.force_alpha(es, 1.5))


def test_two_electron_matrix_hermitian_and_encoded():
    es = el.ElectronicSpec(n_planewaves=3, h_el=1.0, n_electrons=2)
    h, be = el.electronic_hamiltonian(es, [1.0], [0.4])
    assert h.shape == (9, 9)
    np.testing.assert_allclose(h, h.conj().T, atol=1e-13)
    assert bea.verify_contract(be, h) < 1e-10


def test_printed_lambda_is_order_of_magnitude_only():
    es = el.ElectronicSpec(n_planewaves=5, h_el=0.5)
    assert el.printed_lambda_bound(es, [1.0]) > 0
    assert el.hamiltonian_alpha(es, [1.0]) >= np.linalg.norm(el.electronic_matrix(es, [1.0], [0.2]), 2)


def test_controlled_hamiltonian(toy):
    es, pspec = toy
    cb = el.controlled_electronic_hamiltonian(es, pspec)
    mats = el.controlled_electronic_dense(es, pspec)
    assert len(mats) == 16
    assert bea.verify_contract(cb, sl.block_diag(*mats)) < 1e-10


def test_gap_data(toy):
    es, pspec = toy
    mu, gamma = el.gap_data(es, pspec)
    for h in el.controlled_electronic_dense(es, pspec):
        e = np.linalg.eigvalsh(h)
        assert e[0] <= mu - gamma + 1e-12 and e[1] >= mu + gamma - 1e-12


def test_d_el_matches_hellmann_feynman(toy):
    es, pspec = toy
    d = el.d_el(es, pspec, 0, mode="exact")
    pos = el._position_values(pspec)
    ref = [oracle.hellmann_feynman(3, es.omega, [1, 1], list(x), 0) for x in pos]
    np.testing.assert_allclose(d.info["values"], ref, atol=1e-12)
    assert d.alpha == pytest.approx(el.force_alpha(es, 1.0))


def test_d_el_faithful_within_declared_error(toy):
    es, pspec = toy
    exact = el.d_el(es, pspec, 1, mode="exact").info["values"]
    d = el.d_el(es, pspec, 1, eps_de=1e-3, mode="faithful")
    assert d.epsilon <= 1e-3
    assert np.max(np.abs(d.info["values"] - exact)) <= d.epsilon


def test_h_gse_is_ground_energy(toy):
    es, pspec = toy
    g = el.h_gse(es, pspec, mode="exact")
    ref = [oracle.ground_energy(3, es.omega, [1, 1], list(x)) for x in el._position_values(pspec)]
    np.testing.assert_allclose(g.info["values"], ref, atol=1e-12)


def test_zero_charge_nucleus_has_no_force(toy):
    es, pspec = toy
    p0 = pspec.with_(charges=(1.0, 0.0))
    d = el.d_el(es, p0, 1, mode="exact")
    assert np.all(d.info["values"] == 0)


def test_single_nucleus_surface_is_flat():
    # [DERIVED] one nucleus in a periodic box: E0 does not depend on its position
    es = el.ElectronicSpec(n_planewaves=5, h_el=0.5)
    e = [el.ground_energy(es, [1.0], [x]) for x in np.linspace(0, es.omega, 7)]
    assert np.ptp(e) < 1e-12
