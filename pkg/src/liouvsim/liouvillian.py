"""Full Liouvillian assembly and KvN-state evolution."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import bea, qsvt
from . import electronic as el
from . import phasespace as ps
from .phasespace import KvNState, Layout, PhaseSpaceSpec

QSVT = "qsvt"
ANGLELESS = "angleless"


class LiouvillianError(ValueError):
    pass


def _lift_positions(pspec: PhaseSpaceSpec, values: np.ndarray) -> np.ndarray:
    """Broadcast a function of the position registers to the full layout."""
    lay = Layout.of(pspec)
    npos = pspec.N * pspec.spatial_dim
    shape = lay.dims[:npos] + (1,) * (len(lay.dims) - npos)
    return np.broadcast_to(np.asarray(values).reshape(shape), lay.dims).ravel()


def electronic_liouvillian(espec: el.ElectronicSpec, pspec: PhaseSpaceSpec, eps_de: float = 1e-3,
                           mode: str | None = None, seed: int = 0) -> bea.BlockEncoding | None:
    """``L_el = i sum_{n,j} D^el_{n,j} ⊗ D_{p'_{n,j}}``; ``None`` when every force vanishes.

    The select weights are ``tau_n * alpha(D_p)``; since ``tau_n`` is
    proportional to ``Z_n`` this is the charge-weighted preparation state.
    """
    terms, weights, forces = [], [], {}
    for n in range(pspec.N):
        for j in range(pspec.spatial_dim):
            d = el.d_el(espec, pspec, n, j, eps_de=eps_de, mode=mode, seed=seed)
            vals = d.info["values"]
            forces[(n, j)] = vals
            if np.max(np.abs(vals)) <= 1e-14:
                continue
            diag = bea.diagonal_encoding(_lift_positions(pspec, vals), alpha=d.alpha, label="D_el")
            diag = diag.with_(epsilon=d.epsilon)
            terms.append(bea.product(diag, ps.derivative_encoding(pspec, "p", n, j), label=f"Lel[{n}{j}]"))
            weights.append(1j)
    if not terms:
        return None
    be = bea.linear_combination(weights, terms, label="L_el")
    return be.with_(info={"forces": forces, "alpha_el": be.alpha})


def electronic_liouvillian_dense(pspec: PhaseSpaceSpec, forces: dict) -> sp.csr_matrix:
    lay = Layout.of(pspec)
    out = sp.csr_matrix((lay.size, lay.size), dtype=complex)
    for (n, j), vals in forces.items():
        out = out + 1j * (sp.diags(_lift_positions(pspec, vals)) @ ps.derivative_operator(pspec, "p", n, j))
    return out


@dataclass
class Liouvillian:
    """A full Liouvillian encoding together with its parts and a sparse reference."""
    encoding: bea.BlockEncoding
    spec: PhaseSpaceSpec
    alpha_nvt: float
    alpha_el: float
    forces: dict = field(default_factory=dict)

    @property
    def layout(self) -> Layout:
        return Layout.of(self.spec)

    def dense(self) -> sp.csr_matrix:
        """Sparse ``L_cl + L_el`` assembled from Kronecker products (not from the encoding)."""
        out = ps.classical_liouvillian_dense(self.spec)
        if self.forces:
            out = out + electronic_liouvillian_dense(self.spec, self.forces)
        return out


def full_liouvillian(espec: el.ElectronicSpec | None, pspec: PhaseSpaceSpec, eps_de: float = 1e-3,
                     mode: str | None = None, seed: int = 0) -> Liouvillian:
    """``L = L_cl + L_el`` with ``alpha_L = alpha_NVT + alpha_el``."""
    lcl = ps.classical_liouvillian(pspec)
    lel = electronic_liouvillian(espec, pspec, eps_de, mode, seed) if espec is not None else None
    forces = {} if lel is None else lel.info["forces"]
    alpha_nvt = lcl.info.get("alpha_nvt", lcl.alpha)
    if lel is None:
        return Liouvillian(lcl.with_(label="L"), pspec, alpha_nvt, 0.0, forces)
    if alpha_nvt == 0:
        return Liouvillian(lel.with_(label="L"), pspec, 0.0, lel.alpha, forces)
    be = bea.linear_combination([1.0, 1.0], [lcl, lel], label="L")
    return Liouvillian(be, pspec, alpha_nvt, lel.alpha, forces)


def nve_liouvillian(espec: el.ElectronicSpec | None, pspec: PhaseSpaceSpec, **kw) -> Liouvillian:
    """Microcanonical variant: drops the bath registers and the ``s`` factors."""
    return full_liouvillian(espec, pspec.with_(ensemble=ps.NVE), **kw)


# ---------------------------------------------------------------------------
# evolution
# ---------------------------------------------------------------------------


@dataclass
class EvolutionResult:
    state: KvNState
    success_probability: float
    queries: int
    query_bound: int
    epsilon: float
    engine: str
    mode: str

    @property
    def norm(self) -> float:
        return self.state.norm


def evolution_operator(L_be: bea.BlockEncoding, t: float, eps: float, engine: str = QSVT,
                       mode: str = qsvt.FAITHFUL) -> bea.BlockEncoding:
    if engine == QSVT:
        return qsvt.ham_sim(L_be, t, eps, mode)
    if engine == ANGLELESS:
        return qsvt.angleless_ham_sim(L_be, t, eps, mode)
    raise LiouvillianError(f"unknown engine {engine!r}")


def evolve(L, rho0: KvNState, t: float, eps: float, engine: str = QSVT,
           mode: str = qsvt.FAITHFUL, check_norm: bool = True) -> EvolutionResult:
    """Project ``U(t) |0>_anc |rho0>`` onto the zero ancilla branch.

    ``L`` is a :class:`Liouvillian` or a bare encoding.  The returned state is
    not renormalized; its norm is the square root of the success probability.
    Pass ``check_norm=False`` to chain evolutions on such projected states.
    """
    be = L.encoding if isinstance(L, Liouvillian) else L
    if check_norm and abs(rho0.norm - 1) > 1e-10:
        raise LiouvillianError(f"initial state has norm {rho0.norm}")
    if be.target_dim != rho0.amplitudes.size:
        raise LiouvillianError("state and Liouvillian act on different layouts")
    u = evolution_operator(be, t, eps, engine, mode)
    out = u.apply_block(rho0.amplitudes[:, None])[:, 0]
    return EvolutionResult(rho0.replace_amplitudes(out), float(np.vdot(out, out).real),
                           int(u.info.get("queries_used", 0)), int(u.info.get("query_bound", 0)),
                           float(u.epsilon), engine, mode)
