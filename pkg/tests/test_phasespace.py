import math
from fractions import Fraction

import numpy as np
import pytest

from liouvsim import bea, oracle
from liouvsim import phasespace as ps


def small_nvt(**kw):
    base = dict(N=2, g_x=4, g_p=3, g_s=3, g_ps=3, masses=(1.0, 2.0), charges=(1.0, 2.0), well_charge=0.5)
    base.update(kw)
    return ps.PhaseSpaceSpec(**base)


# ---------------------------------------------------------------- stencils

def test_stencil_known_values():
    # [TRIVIAL] d=1 -> (-1/2, 0, 1/2); d=2 -> (1, -8, 0, 8, -1)/12
    assert ps.stencil(1).exact == (Fraction(-1, 2), Fraction(0), Fraction(1, 2))
    np.testing.assert_allclose(ps.stencil(2).coefficients * 12, [1, -8, 0, 8, -1])
    assert ps.stencil(3).exact[-1] == Fraction(1, 60)


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_stencil_exact_on_polynomials(d):
    st = ps.stencil(d)
    for m in range(2 * d + 1):
        got = sum(c * Fraction(int(k)) ** m for c, k in zip(st.exact, st.offsets))
        assert got == (1 if m == 1 else 0)


def test_stencil_rejects_zero():
    with pytest.raises(ps.PhaseSpaceError):
        ps.stencil(0)


def test_derivative_matrix_antisymmetric():
    m = ps.derivative_matrix(7, 0.3, 2)
    np.testing.assert_allclose(m, -m.T, atol=1e-14)
    np.testing.assert_allclose(m.sum(axis=1), 0, atol=1e-13)


# ---------------------------------------------------------------- spec and layout

def test_spec_validation():
    with pytest.raises(ps.PhaseSpaceError):
        ps.PhaseSpaceSpec(N=2, masses=(1.0,), charges=(1.0, 1.0))
    with pytest.raises(ps.PhaseSpaceError):
        ps.PhaseSpaceSpec(g_x=4, d_x=2)
    with pytest.raises(ps.PhaseSpaceError):
        ps.PhaseSpaceSpec(ensemble="NPT")
    with pytest.raises(ps.PhaseSpaceError, match="s grid"):
        ps.PhaseSpaceSpec(s_min=0.1, origin_s=2)


def test_layout_and_grid_values():
    spec = small_nvt()
    lay = ps.Layout.of(spec)
    assert lay.dims == (4, 4, 3, 3, 3, 3)
    assert lay.has("s") and not ps.Layout.of(spec.with_(ensemble="NVE")).has("s")
    np.testing.assert_allclose(spec.values("p"), [-1, 0, 1])
    np.testing.assert_allclose(spec.values("x"), [0, 1, 2, 3])


def test_gaussian_state_is_normalized():
    spec = small_nvt()
    st = ps.KvNState.gaussian(spec, {"x0": 1.0}, {"x0": 0.5, "p1": 0.7})
    assert st.norm == pytest.approx(1.0)
    assert st.marginal("x", 1).argmax() == 0
    assert st.expectation(spec, "x", 0) == pytest.approx(1.0, abs=0.2)


# ---------------------------------------------------------------- energies and Liouvillian

def test_microstate_energies_match_oracle():
    spec = small_nvt()
    mine = (ps.kinetic_values(spec) + ps.potential_values(spec)).ravel()
    np.testing.assert_allclose(mine, oracle.microstate_energies(spec), atol=1e-12)
    full = ps.classical_hamiltonian_values(spec).ravel()
    np.testing.assert_allclose(full, oracle.microstate_energies(spec, include_bath=True), atol=1e-12)


@pytest.mark.parametrize("ensemble", ["NVT", "NVE"])
def test_liouvillian_matches_bruteforce(ensemble):
    spec = small_nvt(ensemble=ensemble)
    L = ps.classical_liouvillian_dense(spec).toarray()
    np.testing.assert_allclose(L, oracle.liouvillian_bruteforce(spec), atol=1e-12)
    np.testing.assert_allclose(L, L.conj().T, atol=1e-12)


def test_liouvillian_encoding_contract():
    spec = small_nvt(N=1, masses=(1.0,), charges=(1.0,))
    be = ps.classical_liouvillian(spec, attach_target=True)
    assert bea.verify_contract(be, be.info["target"].toarray()) < 1e-10
    assert be.alpha == pytest.approx(ps.classical_liouvillian_alpha(spec))


def test_free_particle_liouvillian_alpha():
    # [DERIVED] alpha = max|p/m| * l1(stencil)/h_x for one free nucleus
    spec = ps.PhaseSpaceSpec(N=1, ensemble="NVE", g_x=5, g_p=5, h_x=0.5, h_p=0.25, d_x=2, masses=(2.0,))
    assert ps.classical_liouvillian_alpha(spec) == pytest.approx(0.5 / 2.0 * (1.5) / 0.5)


def test_derivative_encoding_and_kernel():
    spec = small_nvt()
    lay = ps.Layout.of(spec)
    D = ps.derivative_operator(spec, "p", 1)
    be = ps.derivative_encoding(spec, "p", 1)
    x = np.random.default_rng(1).normal(size=lay.size) + 0j
    np.testing.assert_allclose(be.apply_block(x[:, None])[:, 0] * be.alpha, D @ x, atol=1e-12)
    y = ps.apply_derivative(x.reshape(lay.dims), lay.index("p", 1), spec.grid("p"))
    np.testing.assert_allclose(y.ravel(), D @ x, atol=1e-12)


def test_bad_variable():
    with pytest.raises(ps.PhaseSpaceError):
        ps.derivative_operator(small_nvt(ensemble="NVE"), "s")


# ---------------------------------------------------------------- grid scan

def test_fd_scan_double_decreases_with_h():
    rows = ps.fd_convergence_scan([0.4, 0.2, 0.1], [2])
    errs = [r["error"] for r in rows]
    assert errs[0] > errs[1] > errs[2]
    # fourth order: halving h divides the error by about 16
    assert errs[1] / errs[2] == pytest.approx(16, rel=0.1)


def test_fd_scan_error_below_model():
    for r in ps.fd_convergence_scan([0.05], [1, 2, 3], precision="mp", points=16):
        assert r["error"] <= r["model"]


def test_fd_scan_rejects_unknown_precision():
    with pytest.raises(ps.PhaseSpaceError):
        ps.fd_convergence_scan([0.1], [1], precision="quad")


def test_fd_error_model_value():
    assert ps.fd_error_model(0.1, 2) == pytest.approx((math.e * 0.05) ** 4)
