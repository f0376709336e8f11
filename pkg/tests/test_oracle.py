import math

import numpy as np
import pytest
from scipy.linalg import expm

from liouvsim import oracle
from conftest import random_hermitian


def test_expm_and_eig_agree(rng):
    L = random_hermitian(rng, 6)
    r = rng.normal(size=6) + 0j
    a = oracle.expm_evolve(L, r, 0.7)
    np.testing.assert_allclose(a, oracle.expm_evolve(L, r, 0.7, method="eig"), atol=1e-12)
    np.testing.assert_allclose(a, oracle.Propagator(L).evolve(r, 0.7), atol=1e-12)
    assert oracle.Propagator(L).evolve(r, np.array([0.1, 0.7])).shape == (2, 6)


def test_spectrum_and_gap():
    e, v = oracle.ground_truth_spectrum(np.diag([3.0, -1.0, 0.5]))
    np.testing.assert_allclose(e, [-1, 0.5, 3])
    assert oracle.spectral_gap(np.diag([3.0, -1.0, 0.5])) == pytest.approx(1.5)


def test_fd_gradient():
    assert oracle.fd_gradient(math.sin, 0.3, 1e-4) == pytest.approx(math.cos(0.3), abs=1e-8)
    assert oracle.fd_gradient(math.exp, 0.0, 1e-2, richardson=True) == pytest.approx(1.0, abs=1e-8)


def test_lambda_points():
    np.testing.assert_allclose(oracle.lambda_points(4), [0, 0.25, 0.5, 0.75])
    with pytest.raises(ValueError):
        oracle.lambda_points(0)


def test_delta_f_two_level():
    # [TRIVIAL] two microstates: exact -T ln(Z_B/Z_A); the Riemann sum converges to it
    ea, eb = np.array([0.0, 1.0]), np.array([0.5, 0.2])
    exact = -(math.log(math.exp(-0.5) + math.exp(-0.2)) - math.log(1 + math.exp(-1)))
    assert oracle.exact_delta_f((ea, eb), 1.0) == pytest.approx(exact)
    assert oracle.boltzmann_delta_f((ea, eb), 2000, 1.0) == pytest.approx(exact, abs=1e-3)


def test_constant_shift_delta_f():
    e = np.linspace(0, 2, 9)
    assert oracle.boltzmann_delta_f((e, e + 0.3), 3, 0.8) == pytest.approx(0.3)
    assert oracle.exact_delta_f((e, e + 0.3), 0.8) == pytest.approx(0.3)


def test_dynamic_delta_f_and_bound(rng):
    La, Lb = random_hermitian(rng, 5), random_hermitian(rng, 5)
    dh = rng.normal(size=5)
    r0 = rng.normal(size=5) + 0j
    r0 /= np.linalg.norm(r0)
    avg, vals = oracle.dynamic_delta_f(La, Lb, dh, r0, 1.0, 4)
    ra = expm(-1j * La) @ r0
    assert vals[0] == pytest.approx(np.real(np.vdot(ra, dh * ra)))
    fine, _ = oracle.dynamic_delta_f(La, Lb, dh, r0, 1.0, 64)
    assert abs(avg - fine) <= oracle.riemann_bound(La, Lb, dh, 1.0, 4)


def test_electronic_oracle_hellmann_feynman():
    pos = [0.4, 1.3]
    hf = oracle.hellmann_feynman(5, 4.0, [1, 1], pos, 0)
    fd = oracle.fd_gradient(lambda a: oracle.ground_energy(5, 4.0, [1, 1], [a, 1.3]), 0.4, 1e-4)
    assert hf == pytest.approx(fd, abs=1e-7)
