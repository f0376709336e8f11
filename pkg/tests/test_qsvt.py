import math

import numpy as np
import pytest
from numpy.polynomial import chebyshev as C
from scipy.linalg import expm

from liouvsim import bea, cost, qsp, qsvt
from conftest import random_hermitian, random_matrix


# ---------------------------------------------------------------- phases

@pytest.mark.parametrize("coef,parity", [([0, 0.5], 1), ([0.1, 0, 0.4], 0), ([0, 0.3, 0, -0.2, 0, 0.1], 1)])
def test_phases_reproduce_polynomial(coef, parity):
    ph = qsp.find_phases(np.array(coef, float), parity)
    x = np.linspace(-1, 1, 51)
    np.testing.assert_allclose(qsp.response(ph, x).real, C.chebval(x, coef), atol=1e-10)


def test_phases_reject_wrong_parity():
    with pytest.raises(qsp.PhaseFindingError):
        qsp.find_phases(np.array([0.1, 0.4]), 1)


def test_reflection_convention_global_factor():
    ph = qsp.find_phases(np.array([0, 0.3, 0, 0.2]), 1)
    pr, g = qsp.to_reflection_convention(ph)
    assert pr.size == ph.size and abs(abs(g) - 1) < 1e-15


# ---------------------------------------------------------------- polynomials

def test_chebyshev_polynomial_metadata():
    p = qsvt.ChebyshevPolynomial.from_coefficients([0, 0.5, 0, 0.25, 0, 0])
    assert p.degree == 3 and p.parity == "odd"
    assert p.sup_bound == pytest.approx(0.75)
    assert p.even_part().parity == "even" and p.odd_part().degree == 3


@pytest.mark.parametrize("tau,eps", [(0.5, 1e-3), (5.0, 1e-6), (20.0, 1e-9)])
def test_approx_exp_accuracy(tau, eps):
    c, s = qsvt.approx_exp(tau, eps)
    x = np.linspace(-1, 1, 2001)
    assert np.max(np.abs(np.exp(-1j * tau * x) - (c(x) - 1j * s(x)))) <= eps
    assert c.parity == "even" and s.parity == "odd"


def test_approx_exp_degree_scaling():
    # degree grows like e*tau/2 + log(1/eps) up to constants
    degs = [qsvt.approx_exp(t, 1e-6)[0].degree for t in (10, 20, 40)]
    assert degs[0] < degs[1] < degs[2]
    assert degs[2] <= 6 * 40 + 9 * math.log(12 / 1e-6)


@pytest.mark.parametrize("gamma,xi", [(0.2, 1e-3), (0.5, 1e-2), (0.05, 1e-4)])
def test_approx_sign(gamma, xi):
    s = qsvt.approx_sign(gamma, xi)
    x = np.linspace(-1, 1, 20001)
    out = np.abs(x) >= gamma
    assert s.parity == "odd"
    assert np.max(np.abs(s(x))) <= 1 + 1e-12
    assert np.max(np.abs(s(x[out]) - np.sign(x[out]))) <= xi


def test_approx_sign_rejects_bad_input():
    with pytest.raises(qsvt.PolynomialError):
        qsvt.approx_sign(1.5, 0.1)


# ---------------------------------------------------------------- transforms

@pytest.mark.parametrize("coef", [[0, 0.5], [0, 0, 0.5], [0.1, 0.2, 0.15], [0, 0.3, 0, -0.15]])
def test_eigen_transform_faithful_matches_semantic(rng, coef):
    h = random_hermitian(rng, 4, 0.9)
    be = bea.dilate(h, 1.0)
    p = qsvt.ChebyshevPolynomial.from_coefficients(coef)
    f = qsvt.eigen_transform(be, p)
    s = qsvt.eigen_transform(be, p, mode="semantic")
    assert f.is_unitary(1e-10)
    assert np.linalg.norm(f.block() - p.of_matrix(h), 2) < 1e-9
    assert np.linalg.norm(s.block() - p.of_matrix(h), 2) < 1e-12


def test_eigen_transform_requires_half_bound(rng):
    be = bea.dilate(random_hermitian(rng, 3, 0.5), 1.0)
    with pytest.raises(qsvt.PolynomialError, match="1/2"):
        qsvt.eigen_transform(be, qsvt.ChebyshevPolynomial.from_coefficients([0, 0.9]))


def test_qsvt_on_lcu_encoding(rng):
    h1, h2 = random_hermitian(rng, 3, 1.0), random_hermitian(rng, 3, 1.0)
    be = bea.linear_combination([0.5, 0.5], [bea.dilate(h1, 1.0), bea.dilate(h2, 1.0)])
    a = be.encoded() / be.alpha
    p = qsvt.ChebyshevPolynomial.from_coefficients([0, 0.3, 0, 0.1])
    assert np.linalg.norm(qsvt.eigen_transform(be, p).block() - p.of_matrix(a), 2) < 1e-9


def test_oblivious_amplification_of_half_unitary(rng):
    h = random_hermitian(rng, 4, 1.0)
    u = expm(-1j * h)
    half = bea.rescaled(bea.dilate(u, 1.0), 2.0)
    amp = qsvt.oblivious_amplification(half)
    assert amp.alpha == 1.0
    assert np.linalg.norm(amp.block() - u, 2) < 1e-12


# ---------------------------------------------------------------- simulation

@pytest.mark.parametrize("t", [0.7, -2.0, 5.0])
@pytest.mark.parametrize("eps", [1e-3, 1e-6])
def test_ham_sim(rng, t, eps):
    h = random_hermitian(rng, 4, 0.9)
    hs = qsvt.ham_sim(bea.dilate(h, 1.0), t, eps)
    assert np.linalg.norm(hs.block() - expm(-1j * t * h), 2) <= eps
    assert hs.info["queries_used"] <= hs.info["query_bound"] == cost.hamsim_cost(1.0, t, eps)
    assert hs.is_unitary(1e-10)


def test_ham_sim_zero_time_and_semantic(rng):
    h = random_hermitian(rng, 3, 0.5)
    be = bea.dilate(h, 1.0)
    assert np.allclose(qsvt.ham_sim(be, 0.0, 1e-3).block(), np.eye(3))
    s = qsvt.ham_sim(be, 1.2, 1e-3, mode="semantic")
    assert np.linalg.norm(s.block() - expm(-1.2j * h), 2) < 1e-10


def test_ham_sim_rejects_inaccurate_input(rng):
    be = bea.dilate(random_hermitian(rng, 3, 0.5), 1.0).with_(epsilon=1e-2)
    with pytest.raises(bea.BlockEncodingError):
        qsvt.ham_sim(be, 1.0, 1e-3)
    with pytest.raises(qsvt.PolynomialError):
        qsvt.ham_sim(be.with_(epsilon=0), 1.0, 2.0)


def test_angleless_identity_transform(rng):
    h = random_hermitian(rng, 4, 0.9)
    dfe = qsvt.angleless_encode(lambda x: x, 2)
    at = qsvt.angleless_transform(bea.dilate(h, 1.0), dfe, e_d=qsvt.laurent_truncation_error(lambda x: x, 2))
    assert at.alpha == pytest.approx(math.sqrt(2))
    assert np.linalg.norm(at.encoded() - h, 2) < 1e-10
    assert at.is_unitary(1e-10)


def test_angleless_encode_validation():
    with pytest.raises(qsvt.PolynomialError):
        qsvt.angleless_encode(lambda x: x, 3)
    with pytest.raises(qsvt.PolynomialError):
        qsvt.angleless_encode(lambda x: 2 * x, 2)


def test_laurent_truncation_error_decreases():
    f = lambda x: np.exp(-3j * x)
    errs = [qsvt.laurent_truncation_error(f, D) for D in (2, 4, 8, 16)]
    assert all(a > b for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 1e-10


@pytest.mark.parametrize("eps", [1e-3, 1e-6])
def test_angleless_ham_sim(rng, eps):
    h = random_hermitian(rng, 4, 0.8)
    hs = qsvt.angleless_ham_sim(bea.dilate(h, 1.0), 1.3, eps)
    assert np.linalg.norm(hs.block() - expm(-1.3j * h), 2) <= eps
    assert hs.info["queries_used"] <= hs.info["query_bound"]


def test_nonhermitian_block_is_hermitized_for_angleless(rng):
    h = random_hermitian(rng, 2, 0.6)
    be = bea.linear_combination([1.0], [bea.dilate(h, 1.0)])  # lcu corner is Hermitian, unitary is not
    hs = qsvt.angleless_ham_sim(be, 0.5, 1e-4)
    assert np.linalg.norm(hs.block() - expm(-0.5j * h), 2) <= 1e-4
