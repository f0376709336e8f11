"""Plane-wave electronic structure at toy scale.

One-dimensional cell of length ``Omega = B * h_el`` with wave numbers
``kappa_b = 2 pi b / Omega`` for ``b = -(B-1)/2 .. (B-1)/2``.  The external
potential couples ``|b>`` and ``|c>`` through
``-(4 pi Z / Omega) e^{i kappa_{c-b} x} / kappa_{b-c}^2``; its ``nu = b - c``
diagonals are written as averages of two signed cyclic shifts (the wrapped
entries cancel), which turns the Hamiltonian and the force operator into
linear combinations of unitaries.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import bea
from ._config import check_dim
from .phasespace import PhaseSpaceSpec

FAITHFUL = "faithful"
EXACT = "exact"


class ElectronicError(ValueError):
    pass


@dataclass(frozen=True)
class ElectronicSpec:
    n_electrons: int = 1
    n_planewaves: int = 3
    h_el: float = 1.0
    spatial_dim: int = 1
    mode: str = FAITHFUL
    # ground-state data; None derives them from the dense spectrum over the grid
    mu: float | None = None
    gamma: float | None = None
    delta: float = 0.6
    eps_prep: float = 1e-6

    def __post_init__(self) -> None:
        if self.n_electrons < 1:
            raise ElectronicError("need at least one electron")
        if self.spatial_dim != 1:
            raise ElectronicError("only the one-dimensional plane-wave model is implemented")
        if self.n_planewaves < 3 or self.n_planewaves % 2 == 0:
            raise ElectronicError("n_planewaves must be odd and >= 3")
        if self.h_el <= 0:
            raise ElectronicError("h_el must be positive")
        if self.mode not in (FAITHFUL, EXACT):
            raise ElectronicError(f"mode must be faithful or exact, got {self.mode!r}")
        if not 0 < self.delta <= 1:
            raise ElectronicError("delta must lie in (0, 1]")

    @property
    def omega(self) -> float:
        return self.n_planewaves * self.h_el ** self.spatial_dim

    @property
    def indices(self) -> np.ndarray:
        half = (self.n_planewaves - 1) // 2
        return np.arange(-half, half + 1)

    @property
    def wavenumbers(self) -> np.ndarray:
        return 2 * np.pi * self.indices / self.omega

    @property
    def dim(self) -> int:
        return self.n_planewaves ** self.n_electrons


# ---------------------------------------------------------------------------
# dense matrices
# ---------------------------------------------------------------------------


def _differences(B: int) -> list[int]:
    return [nu for nu in range(-(B - 1), B) if nu != 0]


def truncated_shift(B: int, nu: int) -> np.ndarray:
    """``sum_{c, c+nu in G} |c+nu><c|``."""
    return np.eye(B, k=-nu)


def signed_shift(B: int, nu: int, ell: int) -> np.ndarray:
    """Cyclic shift by ``nu``; wrapped entries carry ``(-1)^ell``."""
    m = np.zeros((B, B))
    for c in range(B):
        t = c + nu
        if 0 <= t < B:
            m[t, c] = 1.0
        else:
            m[t % B, c] = -1.0 if ell else 1.0
    return m


def _single_particle(espec: ElectronicSpec, charges: Sequence[float], positions: Sequence[float]) -> np.ndarray:
    B = espec.n_planewaves
    k = espec.wavenumbers
    h = np.diag(k ** 2 / 2).astype(complex)
    for z, x in zip(charges, positions):
        for nu in _differences(B):
            kn = 2 * np.pi * nu / espec.omega
            h += -(4 * np.pi * z / espec.omega) * np.exp(-1j * kn * x) / kn ** 2 * truncated_shift(B, nu)
    return h


def _two_body(espec: ElectronicSpec) -> np.ndarray:
    """``(2 pi / Omega) sum_{i != j} sum_nu |b+nu><b|_i |c-nu><c|_j / kappa_nu^2`` inside the cube."""
    B, ne = espec.n_planewaves, espec.n_electrons
    dim = B ** ne
    out = np.zeros((dim, dim), dtype=complex)
    eye = np.eye(B)
    for i, j in itertools.permutations(range(ne), 2):
        for nu in _differences(B):
            kn = 2 * np.pi * nu / espec.omega
            ops = [eye] * ne
            ops[i] = truncated_shift(B, nu)
            ops[j] = truncated_shift(B, -nu)
            term = ops[0]
            for o in ops[1:]:
                term = np.kron(term, o)
            out += (2 * np.pi / espec.omega) / kn ** 2 * term
    return out


def _per_electron(espec: ElectronicSpec, single: np.ndarray) -> np.ndarray:
    B, ne = espec.n_planewaves, espec.n_electrons
    out = np.zeros((B ** ne, B ** ne), dtype=complex)
    for i in range(ne):
        ops = [np.eye(B)] * ne
        ops[i] = single
        term = ops[0]
        for o in ops[1:]:
            term = np.kron(term, o)
        out += term
    return out


def electronic_matrix(espec: ElectronicSpec, charges: Sequence[float], positions: Sequence[float]) -> np.ndarray:
    """Dense ``H_el`` for nuclei of ``charges`` at ``positions``."""
    check_dim(espec.dim, "electronic Hamiltonian")
    h = _per_electron(espec, _single_particle(espec, charges, positions))
    if espec.n_electrons > 1:
        h = h + _two_body(espec)
    return h


def force_matrix(espec: ElectronicSpec, charge: float, position: float) -> np.ndarray:
    """``dH_el / dx_n`` (only the nucleus' own external term depends on ``x_n``)."""
    B = espec.n_planewaves
    f = np.zeros((B, B), dtype=complex)
    for nu in _differences(B):
        kn = 2 * np.pi * nu / espec.omega
        f += (4 * np.pi * charge / espec.omega) * 1j * kn * np.exp(-1j * kn * position) / kn ** 2 \
            * truncated_shift(B, nu)
    return _per_electron(espec, f)


# ---------------------------------------------------------------------------
# scaling factors
# ---------------------------------------------------------------------------


def _external_l1(espec: ElectronicSpec, charge: float) -> float:
    return sum(4 * np.pi * charge / espec.omega / (2 * np.pi * nu / espec.omega) ** 2
               for nu in _differences(espec.n_planewaves))


def _two_body_l1(espec: ElectronicSpec) -> float:
    ne = espec.n_electrons
    if ne < 2:
        return 0.0
    per = sum((2 * np.pi / espec.omega) / (2 * np.pi * nu / espec.omega) ** 2
              for nu in _differences(espec.n_planewaves))
    return ne * (ne - 1) * per


def hamiltonian_alpha(espec: ElectronicSpec, charges: Sequence[float]) -> float:
    """Exact ``l1`` norm of the LCU: kinetic peak plus all external and pair weights."""
    kin = espec.n_electrons * float(np.max(espec.wavenumbers ** 2) / 2)
    ext = espec.n_electrons * sum(_external_l1(espec, z) for z in charges)
    return kin + ext + _two_body_l1(espec)


def force_alpha(espec: ElectronicSpec, charge: float) -> float:
    """``tau_n``: sum over ``nu`` of ``4 pi Z |kappa_nu| / (Omega kappa_nu^2)`` per electron."""
    B = espec.n_planewaves
    per = sum(4 * np.pi * charge / espec.omega / abs(2 * np.pi * nu / espec.omega)
              for nu in _differences(B))
    return espec.n_electrons * per


def printed_lambda_bound(espec: ElectronicSpec, charges: Sequence[float]) -> float:
    """Order-of-magnitude expression ``N_e/h^2 + N N_e Z_max / h + N_e^2 / h`` with unit constants."""
    ne, h = espec.n_electrons, espec.h_el
    zmax = max(charges) if len(charges) else 0.0
    return ne / h ** 2 + len(charges) * ne * zmax / h + ne ** 2 / h


# ---------------------------------------------------------------------------
# block encodings
# ---------------------------------------------------------------------------


def _position_values(pspec: PhaseSpaceSpec) -> np.ndarray:
    """All nuclear configurations, shape ``(g_x^N, N)`` in register order."""
    vals = pspec.values("x")
    return np.array(list(itertools.product(vals, repeat=pspec.N * pspec.spatial_dim)))


def _signed_terms(espec: ElectronicSpec, charges: Sequence[float], positions: np.ndarray,
                  derivative: bool):
    """Weights, phases (per configuration) and shift matrices of the external LCU.

    ``positions`` has shape ``(n_config, N)``.  Each ``(n, nu, ell)`` term is
    ``weight * phase[x] * signed_shift(nu, ell)``.
    """
    B = espec.n_planewaves
    terms = []
    for n, z in enumerate(charges):
        if z == 0:
            continue
        for nu in _differences(B):
            kn = 2 * np.pi * nu / espec.omega
            ph = np.exp(-1j * kn * positions[:, n])
            if derivative:
                w = 2 * np.pi * z / espec.omega / abs(kn)
                ph = 1j * np.sign(kn) * ph
            else:
                w = 2 * np.pi * z / espec.omega / kn ** 2
                ph = -ph
            for ell in (0, 1):
                terms.append((n, w, ph, signed_shift(B, nu, ell)))
    return terms


def _controlled_unitary(phases: np.ndarray, shift: np.ndarray, label: str) -> bea.BlockEncoding:
    """``sum_x phase[x] |x><x| ⊗ shift`` as a (1, 1, 0) encoding."""
    nx, B = phases.size, shift.shape[0]

    def run(v: np.ndarray, adjoint: bool) -> np.ndarray:
        k = v.shape[1]
        w = v.reshape(nx, B, k)
        if adjoint:
            w = np.einsum("cb,xck->xbk", shift, w) * np.conj(phases)[:, None, None]
        else:
            w = np.einsum("bc,xck->xbk", shift, w) * phases[:, None, None]
        return w.reshape(nx * B, k)

    return bea.BlockEncoding(lambda v: run(v, False), lambda v: run(v, True), alpha=1.0,
                             ancilla_dim=1, target_dim=nx * B, label=label,
                             block_apply=lambda v: run(v, False),
                             block_apply_adjoint=lambda v: run(v, True))


def _assemble(espec: ElectronicSpec, charges: Sequence[float], positions: np.ndarray,
              derivative: bool, only: int | None, label: str) -> bea.BlockEncoding:
    nx = positions.shape[0]
    weights, encs = [], []
    if not derivative:
        kin = espec.wavenumbers ** 2 / 2
        weights.append(1.0)
        encs.append(bea.diagonal_encoding(np.tile(kin, nx), label="kinetic"))
    for n, w, ph, shift in _signed_terms(espec, charges, positions, derivative):
        if only is not None and n != only:
            continue
        weights.append(w)
        encs.append(_controlled_unitary(ph, shift, f"ext[{n}]"))
    if not encs:
        return bea.diagonal_encoding(np.zeros(nx * espec.n_planewaves), alpha=1.0, label=label)
    return bea.linear_combination(weights, encs, label=label)


def electronic_hamiltonian(espec: ElectronicSpec, charges: Sequence[float],
                           positions: Sequence[float]) -> tuple[np.ndarray, bea.BlockEncoding]:
    """Dense ``H_el(x)`` and its block encoding (``alpha`` = exact ``l1`` norm)."""
    h = electronic_matrix(espec, charges, positions)
    alpha = hamiltonian_alpha(espec, charges)
    if espec.n_electrons > 1:
        return h, bea.dilate(h, alpha, label="H_el")
    pos = np.asarray(positions, dtype=float).reshape(1, -1)
    be = _assemble(espec, charges, pos, False, None, "H_el")
    return h, be.with_(info={"lambda": alpha})


def controlled_electronic_hamiltonian(espec: ElectronicSpec, pspec: PhaseSpaceSpec) -> bea.BlockEncoding:
    """``sum_x |x><x| ⊗ H_el(x)`` over every nuclear grid configuration."""
    if espec.n_electrons > 1:
        raise ElectronicError("position-controlled encodings are implemented for one electron")
    pos = _position_values(pspec)
    check_dim(pos.shape[0] * espec.dim, "controlled electronic Hamiltonian")
    be = _assemble(espec, pspec.charges, pos, False, None, "H_el^ctrl")
    return be.with_(info={"lambda": be.alpha, "n_config": pos.shape[0]})


def controlled_electronic_dense(espec: ElectronicSpec, pspec: PhaseSpaceSpec) -> list[np.ndarray]:
    return [electronic_matrix(espec, pspec.charges, x) for x in _position_values(pspec)]


def force_operator(espec: ElectronicSpec, charges: Sequence[float], positions: Sequence[float],
                   n: int, j: int = 0) -> tuple[np.ndarray, bea.BlockEncoding]:
    """Dense ``dH_el/dx_{n,j}`` and its LCU encoding with scaling ``tau_n``."""
    if j != 0:
        raise ElectronicError("one spatial dimension only")
    f = force_matrix(espec, charges[n], positions[n])
    tau = force_alpha(espec, charges[n])
    if charges[n] == 0:
        return f, bea.diagonal_encoding(np.zeros(f.shape[0]), alpha=1.0, label="force")
    if espec.n_electrons > 1:
        return f, bea.dilate(f, tau, label="force")
    pos = np.asarray(positions, dtype=float).reshape(1, -1)
    be = _assemble(espec, charges, pos, True, n, "force")
    return f, be.with_(info={"tau": tau})


def controlled_force_operator(espec: ElectronicSpec, pspec: PhaseSpaceSpec, n: int) -> bea.BlockEncoding:
    pos = _position_values(pspec)
    if pspec.charges[n] == 0:
        return bea.diagonal_encoding(np.zeros(pos.shape[0] * espec.dim), alpha=1.0, label="force^ctrl")
    be = _assemble(espec, pspec.charges, pos, True, n, "force^ctrl")
    return be.with_(info={"tau": be.alpha})


# ---------------------------------------------------------------------------
# ground-state driven diagonals
# ---------------------------------------------------------------------------


@dataclass
class PreparedStates:
    """Per-configuration electronic states, possibly with GSP ancilla components.

    ``vectors`` has shape ``(n_config, n_anc, B)``; ancilla index 0 is the
    success branch.
    """
    vectors: np.ndarray
    mode: str
    eps_prep: float
    report: dict


def gap_data(espec: ElectronicSpec, pspec: PhaseSpaceSpec) -> tuple[float, float]:
    """Global ``(mu, gamma)``: mid-gap over the grid and half the worst gap."""
    if espec.mu is not None and espec.gamma is not None:
        return espec.mu, espec.gamma
    e0s, e1s = [], []
    for h in controlled_electronic_dense(espec, pspec):
        e = np.linalg.eigvalsh(h)
        e0s.append(e[0])
        e1s.append(e[1])
    lo, hi = max(e0s), min(e1s)
    if hi <= lo:
        raise ElectronicError("no common spectral gap over the nuclear grid")
    mu = espec.mu if espec.mu is not None else (lo + hi) / 2
    gamma = espec.gamma if espec.gamma is not None else (hi - lo) / 2
    return float(mu), float(gamma)


def prepare_states(espec: ElectronicSpec, pspec: PhaseSpaceSpec, eps_prep: float | None = None,
                   mode: str | None = None, seed: int = 0) -> PreparedStates:
    """Electronic ground states for every configuration (faithful GSP or dense)."""
    from . import groundstate as gs

    mode = mode or espec.mode
    eps_prep = espec.eps_prep if eps_prep is None else eps_prep
    return _prepare_cached(espec, pspec, float(eps_prep), mode, seed, gs)


_STATE_CACHE: dict = {}


def _prepare_cached(espec, pspec, eps_prep, mode, seed, gs) -> PreparedStates:
    key = (espec, pspec.N, pspec.spatial_dim, pspec.g_x, pspec.h_x, pspec.origin_x, pspec.charges,
           eps_prep, mode, seed)
    if key in _STATE_CACHE:
        return _STATE_CACHE[key]
    mats = controlled_electronic_dense(espec, pspec)
    nx, B = len(mats), espec.dim
    if mode == EXACT:
        vecs = np.zeros((nx, 1, B), dtype=complex)
        for i, h in enumerate(mats):
            vecs[i, 0] = np.linalg.eigh(h)[1][:, 0]
        out = PreparedStates(vecs, EXACT, 0.0, {})
    else:
        mu, gamma = gap_data(espec, pspec)
        cfg = gs.GroundStateConfig(mu=mu, gamma=gamma, delta=espec.delta, eps_prep=eps_prep)
        oracle = gs.InitialStateOracle.planted([np.linalg.eigh(h)[1][:, 0] for h in mats],
                                               espec.delta, seed=seed)
        be = controlled_electronic_hamiltonian(espec, pspec)
        res = gs.prepare_ground_state_superposed(be, cfg, oracle)
        out = PreparedStates(res.vectors, FAITHFUL, eps_prep, res.report)
    _STATE_CACHE[key] = out
    return out


def _expectations(states: PreparedStates, be: bea.BlockEncoding, B: int) -> np.ndarray:
    """``<Phi_x| (A_x ⊗ I_anc) |Phi_x>`` with ``A_x`` the (unscaled) corner of ``be``."""
    nx, na, _ = states.vectors.shape
    v = states.vectors.transpose(0, 2, 1).reshape(nx * B, na)
    av = be.apply_block(v)
    per = np.conj(v) * av
    return np.real(per.reshape(nx, B, na).sum(axis=(1, 2)))


def d_el(espec: ElectronicSpec, pspec: PhaseSpaceSpec, n: int, j: int = 0, eps_de: float = 1e-3,
         mode: str | None = None, seed: int = 0) -> bea.BlockEncoding:
    """Diagonal ``(tau_n, ., eps_de)`` encoding of the Hellmann-Feynman force on ``x_{n,j}``.

    The electronic register is prepared in the ground state, the force operator
    is applied and the preparation undone; the resulting corner
    ``<Phi_x|F/tau|Phi_x>`` is diagonal in the position register and is cached
    as a diagonal encoding.  The preparation error follows the split
    ``2 tau sqrt(2 eps_prep) + eps_force`` with ``eps_force = eps_de / 2``.
    """
    force = controlled_force_operator(espec, pspec, n)
    tau = force_alpha(espec, pspec.charges[n])
    nx = _position_values(pspec).shape[0]
    if tau == 0:
        be = bea.diagonal_encoding(np.zeros(nx), alpha=1.0, label="D_el")
        return be.with_(info={"tau": 0.0, "values": np.zeros(nx)})
    eps_prep = (eps_de / (4 * tau)) ** 2 / 2
    states = prepare_states(espec, pspec, eps_prep, mode, seed)
    vals = tau * _expectations(states, force, espec.dim)
    be = bea.diagonal_encoding(vals, alpha=tau, label="D_el")
    declared = 0.0 if states.mode == EXACT else 2 * tau * math.sqrt(2 * eps_prep) + force.epsilon
    return be.with_(epsilon=declared, info={"tau": tau, "values": vals, "eps_prep": eps_prep,
                                            "gsp": states.report})


def h_gse(espec: ElectronicSpec, pspec: PhaseSpaceSpec, eps_gse: float = 1e-3,
          mode: str | None = None, seed: int = 0) -> bea.BlockEncoding:
    """Diagonal ``(lambda, ., eps_gse)`` encoding of ``E_0(x)`` over the position register."""
    hbe = controlled_electronic_hamiltonian(espec, pspec)
    lam = hbe.alpha
    eps_prep = (eps_gse / (4 * lam)) ** 2 / 2
    states = prepare_states(espec, pspec, eps_prep, mode, seed)
    vals = lam * _expectations(states, hbe, espec.dim)
    be = bea.diagonal_encoding(vals, alpha=lam, label="H_gse")
    declared = 0.0 if states.mode == EXACT else 2 * lam * math.sqrt(2 * eps_prep) + hbe.epsilon
    return be.with_(epsilon=declared, info={"lambda": lam, "values": vals, "eps_prep": eps_prep,
                                            "gsp": states.report})


@lru_cache(maxsize=64)
def _ground_energy_cached(espec: ElectronicSpec, charges: tuple, positions: tuple) -> float:
    return float(np.linalg.eigvalsh(electronic_matrix(espec, charges, positions))[0])


def ground_energy(espec: ElectronicSpec, charges: Sequence[float], positions: Sequence[float]) -> float:
    return _ground_energy_cached(espec, tuple(float(z) for z in charges), tuple(float(x) for x in positions))
