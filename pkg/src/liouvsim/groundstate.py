"""Robust ground-state preparation by a sign-polynomial reflector and amplitude amplification.

The reflector ``R = sum_{E_k <= mu} |k><k| - sum_{E_k > mu} |k><k|`` is built as
``-S((H - mu)/(lambda + |mu|))`` with ``S`` an odd sign approximation applied by
QSVT.  Amplification uses Grover iterations ``-S_init S_good`` where the good
subspace is flagged by the reflector.  An extra rotation qubit lowers the
initial success amplitude so that an integer number of rounds lands exactly on
the good state; the amplitude itself is read off the reflector expectation.

Everything works on a register ``|x>`` of independent blocks (one electronic
Hamiltonian per nuclear configuration); a plain Hamiltonian is the one-block case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import bea, qsvt


class GroundStateError(RuntimeError):
    pass


@dataclass(frozen=True)
class GroundStateConfig:
    mu: float
    gamma: float
    delta: float
    eps_prep: float = 1e-4

    def __post_init__(self) -> None:
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if not 0 < self.delta <= 1:
            raise ValueError("delta must lie in (0, 1]")
        if not 0 < self.eps_prep < 1:
            raise ValueError("eps_prep must lie in (0, 1)")

    def check_spectrum(self, eigenvalues: np.ndarray) -> None:
        """``E_0 <= mu - gamma/2`` and ``E_1 >= mu + gamma/2``."""
        e = np.sort(np.asarray(eigenvalues))
        if e[0] > self.mu - self.gamma / 2 + 1e-12 or (e.size > 1 and e[1] < self.mu + self.gamma / 2 - 1e-12):
            raise GroundStateError(f"gap hypothesis fails: E0={e[0]:.6g}, E1={e[1]:.6g}, "
                                   f"mu={self.mu:.6g}, gamma={self.gamma:.6g}")

    @property
    def round_cap(self) -> int:
        return math.ceil(math.pi / (4 * math.asin(self.delta))) + 1


class InitialStateOracle:
    """``U_I |x>|0> = |x>|phi_init(x)>`` for a list of per-configuration states."""

    def __init__(self, states: Sequence[np.ndarray] | np.ndarray) -> None:
        s = np.atleast_2d(np.asarray(states, dtype=complex))
        norms = np.linalg.norm(s, axis=1)
        if np.any(np.abs(norms - 1) > 1e-10):
            raise ValueError("initial states must be normalized")
        self.states = s

    @property
    def n_blocks(self) -> int:
        return self.states.shape[0]

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def unitary(self, x: int = 0) -> np.ndarray:
        return bea.unitary_with_first_column(self.states[x])

    def overlaps(self, ground_states: Sequence[np.ndarray]) -> np.ndarray:
        return np.array([abs(np.vdot(g, s)) for g, s in zip(ground_states, self.states)])

    @classmethod
    def planted(cls, ground_states: Sequence[np.ndarray], delta: float, seed: int = 0) -> "InitialStateOracle":
        """``delta psi_0 + sqrt(1 - delta^2) psi_perp`` with a random orthogonal ``psi_perp``."""
        rng = np.random.default_rng(seed)
        out = []
        for g in ground_states:
            g = np.asarray(g, dtype=complex)
            g = g / np.linalg.norm(g)
            r = rng.normal(size=g.size) + 1j * rng.normal(size=g.size)
            r -= np.vdot(g, r) * g
            if np.linalg.norm(r) < 1e-12 or g.size == 1:
                out.append(g)
                continue
            r /= np.linalg.norm(r)
            out.append(delta * g + math.sqrt(1 - delta * delta) * r)
        return cls(out)


# ---------------------------------------------------------------------------
# reflector
# ---------------------------------------------------------------------------


def _quantize_down(v: float, steps_per_octave: int = 4) -> float:
    """Round down onto a geometric grid so that sign polynomials (and phases) are reused."""
    return 2.0 ** (math.floor(math.log2(v) * steps_per_octave) / steps_per_octave)


def reflector(be_H: bea.BlockEncoding, cfg: GroundStateConfig, xi: float) -> bea.BlockEncoding:
    """``(1, ., D sqrt(eps_H/lambda) + xi)`` encoding of the reflection about ``mu``."""
    if be_H.epsilon > cfg.gamma / 4 * (1 + 1e-12):
        raise GroundStateError(f"encoding error {be_H.epsilon:.3e} exceeds gamma/4 = {cfg.gamma / 4:.3e}")
    n = be_H.target_dim
    lam = be_H.alpha
    if cfg.mu != 0:
        shifted = bea.linear_combination([1.0, -cfg.mu], [be_H, bea.identity(n)], label="H - mu")
    else:
        shifted = be_H
    # eigenvalues of the encoded operator stay gamma/4 away from mu
    gap = _quantize_down(cfg.gamma / (4 * shifted.alpha))
    if gap >= 1:
        gap = 0.5
    # keep |S| strictly below 1: the phase solve is ill-conditioned at |S| = 1
    xq = _quantize_down(xi, 2)
    poly = qsvt.approx_sign(gap, xq / 2).scaled(1 - xq / 2)
    sgn = qsvt.qsvt_real(shifted, poly, label="sign")
    d = sgn.info["degree"]
    eps = d * math.sqrt(be_H.epsilon / lam) + xi
    out = bea.with_phase(sgn, -1.0)
    return out.with_(epsilon=eps, label="reflector",
                     info={"degree": d, "gap_used": gap, "shift_alpha": shifted.alpha})


# ---------------------------------------------------------------------------
# amplitude amplification
# ---------------------------------------------------------------------------


@dataclass
class PreparationResult:
    """Output of a (superposed) ground-state preparation.

    ``vectors[x, a, :]`` is the electronic component of block ``x`` on the
    ancilla branch ``a`` (rotation qubit ⊗ reflector ancilla); branch 0 is the
    flagged success branch.
    """
    vectors: np.ndarray
    rounds: int
    overlaps_estimated: np.ndarray
    report: dict = field(default_factory=dict)

    def success_states(self) -> np.ndarray:
        return self.vectors[:, 0, :]

    def fidelities(self, ground_states: Sequence[np.ndarray]) -> np.ndarray:
        return np.array([abs(np.vdot(g, v)) ** 2 for g, v in zip(ground_states, self.success_states())])


def _default_xi(cfg: GroundStateConfig) -> float:
    # each reflector call leaks about 2 xi of probability out of the flagged branch
    return min(1e-2, cfg.eps_prep / (4 * (cfg.round_cap + 1)))


def prepare_ground_state_superposed(be_Hctrl: bea.BlockEncoding, cfg: GroundStateConfig,
                                    oracle: InitialStateOracle, xi: float | None = None,
                                    strict: bool = True) -> PreparationResult:
    """Prepare ``|x>|psi_0(x)>`` for every block of a block-diagonal Hamiltonian encoding.

    One common round count serves all blocks; the rotation angle is set per
    block.  With ``strict`` an estimated overlap below ``delta`` raises.
    """
    nx, B = oracle.n_blocks, oracle.dim
    if be_Hctrl.target_dim != nx * B:
        raise GroundStateError(f"encoding acts on {be_Hctrl.target_dim}, oracle covers {nx} x {B}")
    xi = _default_xi(cfg) if xi is None else xi
    R = reflector(be_Hctrl, cfg, xi)
    a = R.ancilla_dim
    m = a * nx * B
    phi = oracle.states  # (nx, B)

    # overlap proxy: <phi| R |phi> = 2 |<psi_0|phi>|^2 - 1, read per block
    flat = phi.reshape(-1)
    rphi = R.apply_block(flat[:, None])[:, 0].reshape(nx, B)
    proxy = np.real(np.einsum("xb,xb->x", np.conj(phi), rphi))
    sin_theta = np.sqrt(np.clip((1 + proxy) / 2, 0.0, 1.0))
    # the proxy is off by at most the reflector error
    floor = math.sqrt(max(cfg.delta ** 2 - R.epsilon / 2, 0.0)) - 1e-12
    if strict and np.any(sin_theta < floor):
        bad = int(np.argmin(sin_theta))
        raise GroundStateError(f"estimated overlap {sin_theta[bad]:.4g} below delta={cfg.delta} at block {bad}")
    theta = np.arcsin(np.clip(sin_theta, 1e-300, 1.0))
    theta_min = float(theta.min())
    if theta_min >= math.pi / 2 - 1e-9:
        k = 0
    else:
        k = max(0, math.ceil(math.pi / (4 * theta_min) - 0.5))
    if k > cfg.round_cap:
        raise GroundStateError(f"{k} rounds needed, cap is {cfg.round_cap}; overlap too small")
    target = math.pi / (2 * (2 * k + 1))
    cos_beta = np.where(theta >= math.pi / 2 - 1e-9, 1.0,
                        np.clip(math.sin(target) / np.maximum(sin_theta, 1e-300), 0.0, 1.0))
    sin_beta = np.sqrt(1 - cos_beta ** 2)

    # |a_x> = |phi_x> (cos b |0> + sin b |1>)_rot |0>_anc ; layout (rot, anc, x, b)
    start = np.zeros((2, a, nx, B), dtype=complex)
    start[0, 0] = cos_beta[:, None] * phi
    start[1, 0] = sin_beta[:, None] * phi
    ref = start.copy()

    def s_init(v: np.ndarray) -> np.ndarray:
        # I - 2 |a_x><a_x| on every block
        ov = np.einsum("rcxb,rcxb->x", np.conj(ref), v)
        return v - 2 * ref * ov[None, None, :, None]

    def s_good(v: np.ndarray) -> np.ndarray:
        out = v.copy()
        out[0] = -R.apply(v[0].reshape(m, 1))[:, 0].reshape(a, nx, B)
        return out

    v = start
    for _ in range(k):
        v = -s_init(s_good(v))
    vectors = v.reshape(2 * a, nx, B).transpose(1, 0, 2)
    report = {
        "rounds": k,
        "round_cap": cfg.round_cap,
        "reflector_degree": R.info["degree"],
        "queries_H": R.info["degree"] * (k + 1),
        "queries_I": 2 * k + 1,
        "xi": xi,
        "reflector_epsilon": R.epsilon,
        "overlap_min": float(sin_theta.min()),
    }
    return PreparationResult(vectors, k, sin_theta, report)


def prepare_ground_state(be_H: bea.BlockEncoding, cfg: GroundStateConfig,
                         oracle: InitialStateOracle, xi: float | None = None,
                         strict: bool = True) -> PreparationResult:
    """Single-Hamiltonian preparation (the one-block case)."""
    if oracle.n_blocks != 1:
        raise GroundStateError("use prepare_ground_state_superposed for several blocks")
    return prepare_ground_state_superposed(be_H, cfg, oracle, xi=xi, strict=strict)


def gsp_query_estimate(lam: float, delta: float, gamma: float, eps_prep: float) -> float:
    """``(lambda / (delta gamma)) log(1 / (delta eps_prep))`` with unit constants."""
    return lam / (delta * gamma) * math.log(1 / (delta * eps_prep))
