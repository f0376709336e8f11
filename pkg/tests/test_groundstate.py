import numpy as np
import pytest

from liouvsim import bea
from liouvsim import groundstate as gs
from conftest import random_hermitian


def test_config_validation():
    with pytest.raises(ValueError):
        gs.GroundStateConfig(0, -1, 0.5)
    with pytest.raises(ValueError):
        gs.GroundStateConfig(0, 1, 0.0)
    cfg = gs.GroundStateConfig(0.0, 1.0, 0.5)
    with pytest.raises(gs.GroundStateError):
        cfg.check_spectrum(np.array([-0.2, 0.9]))
    cfg.check_spectrum(np.array([-0.6, 0.6]))


def test_reflector_two_level():
    # [TRIVIAL] H = diag(-1, 1), mu = 0, gamma = 2 -> diag(1, -1)
    r = gs.reflector(bea.dilate(np.diag([-1.0, 1.0]), 1.0), gs.GroundStateConfig(0, 2, 0.6), 1e-3)
    np.testing.assert_allclose(r.encoded(), np.diag([1, -1]), atol=2e-3)


def test_reflector_three_level():
    # [DERIVED] eigenvalues {-0.9, -0.1, 0.5}, mu=-0.5, gamma=0.8
    rng = np.random.default_rng(2)
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    h = q @ np.diag([-0.9, -0.1, 0.5]) @ q.T
    r = gs.reflector(bea.dilate(h, 1.0), gs.GroundStateConfig(-0.5, 0.8, 0.6), 1e-3)
    ref = q @ np.diag([1, -1, -1]) @ q.T
    assert np.linalg.norm(r.encoded() - ref, 2) <= r.epsilon + 1e-3


def test_reflector_robust_to_perturbation():
    rng = np.random.default_rng(3)
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    h = q @ np.diag([-0.9, -0.1, 0.5]) @ q.T
    e = random_hermitian(rng, 3, 0.8 / 8)
    pert = bea.dilate(h + e, 1.2).with_(epsilon=0.1)
    r = gs.reflector(pert, gs.GroundStateConfig(-0.5, 0.8, 0.6), 1e-3)
    w, v = np.linalg.eigh(h + e)
    ref = v @ np.diag([1, -1, -1]) @ v.conj().T
    assert np.linalg.norm(r.encoded() - ref, 2) < 2e-3


def test_reflector_rejects_large_encoding_error():
    be = bea.dilate(np.diag([-1.0, 1.0]), 1.0).with_(epsilon=0.6)
    with pytest.raises(gs.GroundStateError):
        gs.reflector(be, gs.GroundStateConfig(0, 2, 0.6), 1e-3)


@pytest.mark.parametrize("delta", [0.3, 0.6, 0.9, 1.0])
def test_prepare_random_hamiltonian(delta):
    rng = np.random.default_rng(int(delta * 10))
    h = random_hermitian(rng, 4, 1.0)
    e, v = np.linalg.eigh(h)
    cfg = gs.GroundStateConfig((e[0] + e[1]) / 2, (e[1] - e[0]) / 2 * 0.99, delta, 1e-4)
    orc = gs.InitialStateOracle.planted([v[:, 0]], delta, seed=1)
    assert orc.overlaps([v[:, 0]])[0] == pytest.approx(delta)
    r = gs.prepare_ground_state(bea.dilate(h, 1.2), cfg, orc)
    assert r.fidelities([v[:, 0]])[0] >= 1 - 1e-4
    assert r.rounds <= cfg.round_cap
    assert r.report["queries_I"] == 2 * r.rounds + 1


def test_overlap_below_delta_is_rejected():
    h = np.diag([-1.0, 0.0, 1.0])
    cfg = gs.GroundStateConfig(-0.5, 0.9, 0.9, 1e-4)
    orc = gs.InitialStateOracle.planted([np.eye(3)[0]], 0.3, seed=0)
    with pytest.raises(gs.GroundStateError, match="overlap"):
        gs.prepare_ground_state(bea.dilate(h, 1.0), cfg, orc)


def test_superposed_requires_matching_blocks():
    orc = gs.InitialStateOracle(np.eye(2)[:1])
    with pytest.raises(gs.GroundStateError):
        gs.prepare_ground_state_superposed(bea.dilate(np.eye(4) * 0.1, 1.0), gs.GroundStateConfig(0, 1, 0.5), orc)


def test_oracle_requires_normalized_states():
    with pytest.raises(ValueError):
        gs.InitialStateOracle([[1.0, 1.0]])


def test_query_estimate_monotone():
    a = gs.gsp_query_estimate(10, 0.5, 0.2, 1e-4)
    assert a < gs.gsp_query_estimate(10, 0.25, 0.2, 1e-4)
    assert a < gs.gsp_query_estimate(10, 0.5, 0.2, 1e-6)
