"""Brute-force classical references.

Nothing here reuses the operator-assembly code of the emulated algorithms:
Liouvillians, electronic Hamiltonians and microstate energies are rebuilt with
explicit loops over grid points and basis pairs, then handled with dense
linear algebra.
"""

from __future__ import annotations

import itertools
import math
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import eigh, expm
from scipy.special import logsumexp

from . import kernels
from ._config import check_dim


# ---------------------------------------------------------------------------
# generic dense tools
# ---------------------------------------------------------------------------


def expm_evolve(L: np.ndarray, rho0: np.ndarray, t: float, method: str = "expm") -> np.ndarray:
    """``exp(-i L t) rho0`` by scaling and squaring (``expm``) or eigendecomposition (``eig``)."""
    L = np.asarray(L.toarray() if hasattr(L, "toarray") else L, dtype=complex)
    rho0 = np.asarray(rho0, dtype=complex)
    check_dim(L.shape[0], "dense evolution")
    if t == 0:
        return rho0.copy()
    if method == "expm":
        return expm(-1j * t * L) @ rho0
    if method == "eig":
        if np.allclose(L, L.conj().T, atol=1e-12):
            w, v = eigh(L)
            return v @ (np.exp(-1j * t * w) * (v.conj().T @ rho0))
        w, v = np.linalg.eig(L)
        return v @ (np.exp(-1j * t * w) * np.linalg.solve(v, rho0))
    raise ValueError(f"unknown method {method!r}")


class Propagator:
    """Cached eigendecomposition of a Hermitian generator for many evolution times."""

    def __init__(self, L) -> None:
        L = np.asarray(L.toarray() if hasattr(L, "toarray") else L, dtype=complex)
        check_dim(L.shape[0], "dense propagator")
        self.w, self.v = eigh((L + L.conj().T) / 2)

    def evolve(self, rho0: np.ndarray, t: float | np.ndarray) -> np.ndarray:
        c = self.v.conj().T @ rho0
        ts = np.atleast_1d(t)
        out = (np.exp(-1j * np.outer(ts, self.w)) * c) @ self.v.T
        return out[0] if np.ndim(t) == 0 else out


def ground_truth_spectrum(H: np.ndarray, check: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and eigenvectors (columns) of a Hermitian matrix."""
    H = np.asarray(H, dtype=complex)
    check_dim(H.shape[0], "dense eigensolver")
    e, v = eigh((H + H.conj().T) / 2)
    if check:
        res = float(np.max(np.linalg.norm(H @ v - v * e, axis=0))) if e.size else 0.0
        if res > 1e-10 * max(1.0, float(np.max(np.abs(e)))):
            raise ArithmeticError(f"eigen-residual {res:.3e} too large")
    return e, v


def spectral_gap(H: np.ndarray) -> float:
    e, _ = ground_truth_spectrum(H)
    return float(e[1] - e[0])


def fd_gradient(f: Callable[[float], float], x: float, step: float, richardson: bool = False) -> float:
    """Central difference ``(f(x+h) - f(x-h)) / 2h``; optionally one Richardson step."""
    d1 = (f(x + step) - f(x - step)) / (2 * step)
    if not richardson:
        return float(d1)
    d2 = (f(x + step / 2) - f(x - step / 2)) / step
    return float((4 * d2 - d1) / 3)


# ---------------------------------------------------------------------------
# Boltzmann averages and free energies
# ---------------------------------------------------------------------------


def lambda_points(n_lambda: int) -> np.ndarray:
    """Left Riemann nodes ``k / N`` for ``k = 0..N-1``."""
    if n_lambda < 1:
        raise ValueError("need at least one interpolation point")
    return np.arange(n_lambda) / n_lambda


def boltzmann_delta_f(energies: tuple[np.ndarray, np.ndarray], n_lambda: int, T: float) -> float:
    """``(1/N) sum_Lambda <E_B - E_A>_Lambda`` with weights ``exp(-E_Lambda / T)``."""
    ea, eb = (np.asarray(e, dtype=float).ravel() for e in energies)
    de = eb - ea
    vals = [kernels.boltzmann_average((1 - lam) * ea + lam * eb, de, T) for lam in lambda_points(n_lambda)]
    return float(np.mean(vals))


def exact_delta_f(energies: tuple[np.ndarray, np.ndarray], T: float) -> float:
    """``-T ln(Z_B / Z_A)`` over the same microstates."""
    ea, eb = (np.asarray(e, dtype=float).ravel() for e in energies)
    return float(-T * (logsumexp(-eb / T) - logsumexp(-ea / T)))


def dynamic_delta_f(L_a, L_b, delta_h: np.ndarray, rho0: np.ndarray, t: float,
                    n_lambda: int) -> tuple[float, np.ndarray]:
    """Riemann sum of ``<rho_Lambda| dH |rho_Lambda>`` with ``rho_Lambda = exp(-i L_Lambda t) rho0``.

    ``delta_h`` is the diagonal (or dense matrix) of ``H_B - H_A``.  Returns the
    average and the per-node expectations.
    """
    La = np.asarray(L_a.toarray() if hasattr(L_a, "toarray") else L_a)
    Lb = np.asarray(L_b.toarray() if hasattr(L_b, "toarray") else L_b)
    dh = np.asarray(delta_h)
    vals = []
    for lam in lambda_points(n_lambda):
        r = Propagator((1 - lam) * La + lam * Lb).evolve(rho0, t)
        hv = dh * r if dh.ndim == 1 else dh @ r
        vals.append(float(np.real(np.vdot(r, hv))))
    vals = np.asarray(vals)
    return float(vals.mean()), vals


def riemann_bound(L_a, L_b, delta_h: np.ndarray, t: float, n_lambda: int) -> float:
    """``‖L_B - L_A‖ ‖H_B - H_A‖ t / N`` with dense spectral norms."""
    La = np.asarray(L_a.toarray() if hasattr(L_a, "toarray") else L_a)
    Lb = np.asarray(L_b.toarray() if hasattr(L_b, "toarray") else L_b)
    dh = np.asarray(delta_h)
    ndh = float(np.max(np.abs(dh))) if dh.ndim == 1 else float(np.linalg.norm(dh, 2))
    return float(np.linalg.norm(Lb - La, 2)) * ndh * abs(t) / n_lambda


# ---------------------------------------------------------------------------
# brute-force model assembly
# ---------------------------------------------------------------------------


def _values(g: int, h: float, origin: float) -> list[float]:
    return [(k - origin) * h for k in range(g)]


def _origin(spec, var: str) -> float:
    o = getattr(spec, f"origin_{var}")
    if o is not None:
        return float(o)
    g = getattr(spec, f"g_{var}")
    return (g - 1) / 2 if var in ("p", "ps") else 0.0


def _registers(spec) -> list[tuple[str, int, int]]:
    regs = [("x", n, j) for n in range(spec.N) for j in range(spec.spatial_dim)]
    regs += [("p", n, j) for n in range(spec.N) for j in range(spec.spatial_dim)]
    if spec.ensemble == "NVT":
        regs += [("s", 0, 0), ("ps", 0, 0)]
    return regs


def _grid_states(spec):
    """Yield ``(flat index, {register: value})`` over every phase-space grid point."""
    regs = _registers(spec)
    axes = [_values(getattr(spec, f"g_{r[0]}"), getattr(spec, f"h_{r[0]}"), _origin(spec, r[0]))
            for r in regs]
    for flat, combo in enumerate(itertools.product(*axes)):
        yield flat, dict(zip(regs, combo))


def _central_weights(d: int) -> list[float]:
    """First-derivative weights from the closed form ``(-1)^{k+1} (d!)^2 / (k (d-k)! (d+k)!)``."""
    out = []
    for k in range(-d, d + 1):
        if k == 0:
            out.append(0.0)
        else:
            a = abs(k)
            c = (-1) ** (a + 1) * math.factorial(d) ** 2 / (a * math.factorial(d - a) * math.factorial(d + a))
            out.append(c if k > 0 else -c)
    return out


def microstate_energies(pspec, e0: Callable[[Sequence[float]], float] | None = None,
                        include_bath: bool = False) -> np.ndarray:
    """``H_kin + H_pot (+ E_0(x))`` at every grid point by explicit loops.

    ``e0`` maps the tuple of nuclear coordinates (ordered ``n`` then ``j``) to
    the electronic ground energy.
    """
    N, dim = pspec.N, pspec.spatial_dim
    out = []
    for _, st in _grid_states(pspec):
        sfac = (st[("s", 0, 0)] + pspec.s_min) ** 2 if pspec.ensemble == "NVT" else 1.0
        kin = sum(st[("p", n, j)] ** 2 / (2 * pspec.masses[n] * sfac) for n in range(N) for j in range(dim))
        pot = 0.0
        for n in range(N):
            for m in range(n + 1, N):
                r2 = sum((st[("x", n, j)] - st[("x", m, j)]) ** 2 for j in range(dim))
                pot += pspec.charges[n] * pspec.charges[m] / math.sqrt(r2 + pspec.delta ** 2)
            if pspec.well_charge:
                r2 = sum((st[("x", n, j)] - pspec.well_center) ** 2 for j in range(dim))
                pot -= pspec.charges[n] * pspec.well_charge / math.sqrt(r2 + pspec.delta ** 2)
        e = kin + pot
        if e0 is not None:
            e += e0(tuple(st[("x", n, j)] for n in range(N) for j in range(dim)))
        if include_bath and pspec.ensemble == "NVT":
            e += st[("ps", 0, 0)] ** 2 / (2 * pspec.Q) + pspec.N_f * pspec.T * math.log(st[("s", 0, 0)] + pspec.s_min)
        out.append(e)
    return np.asarray(out)


def liouvillian_bruteforce(pspec, electronic_force: Callable | None = None) -> np.ndarray:
    """Dense classical (+ electronic) Liouvillian from a loop over grid points.

    Matrix elements follow ``L rho = -i sum (dH/dp d_x rho - dH/dx d_p rho)``
    with periodic central differences; ``electronic_force(xs, n, j)`` returns
    the Born-Oppenheimer derivative ``dE_0/dx_{n,j}`` added to ``dH/dx``.
    """
    regs = _registers(pspec)
    sizes = [getattr(pspec, f"g_{r[0]}") for r in regs]
    dim_total = int(np.prod(sizes))
    check_dim(dim_total, "brute-force Liouvillian")
    strides = np.cumprod([1] + sizes[::-1])[::-1][1:]
    N, dim = pspec.N, pspec.spatial_dim
    L = np.zeros((dim_total, dim_total), dtype=complex)
    idx_of = {r: i for i, r in enumerate(regs)}

    def neighbours(flat: int, reg, k: int) -> int:
        i = idx_of[reg]
        g = sizes[i]
        cur = (flat // strides[i]) % g
        return flat + (((cur + k) % g) - cur) * strides[i]

    nvt = pspec.ensemble == "NVT"
    for flat, st in _grid_states(pspec):
        s = st[("s", 0, 0)] + pspec.s_min if nvt else 1.0
        xs = tuple(st[("x", n, j)] for n in range(N) for j in range(dim))
        pairs = []
        for n in range(N):
            for j in range(dim):
                v = st[("p", n, j)] / (pspec.masses[n] * s * s)
                f = 0.0
                for m in range(N):
                    if m != n:
                        r2 = sum((st[("x", n, jj)] - st[("x", m, jj)]) ** 2 for jj in range(dim))
                        f -= pspec.charges[n] * pspec.charges[m] * (st[("x", n, j)] - st[("x", m, j)]) / (r2 + pspec.delta ** 2) ** 1.5
                if pspec.well_charge:
                    r2 = sum((st[("x", n, jj)] - pspec.well_center) ** 2 for jj in range(dim))
                    f += pspec.charges[n] * pspec.well_charge * (st[("x", n, j)] - pspec.well_center) / (r2 + pspec.delta ** 2) ** 1.5
                if electronic_force is not None:
                    f += electronic_force(xs, n, j)
                pairs.append((("x", n, j), -1j * v))
                pairs.append((("p", n, j), 1j * f))
        if nvt:
            kin2 = sum(st[("p", n, j)] ** 2 / pspec.masses[n] for n in range(N) for j in range(dim))
            dHds = -kin2 / s ** 3 + pspec.N_f * pspec.T / s
            pairs.append((("s", 0, 0), -1j * st[("ps", 0, 0)] / pspec.Q))
            pairs.append((("ps", 0, 0), 1j * dHds))
        for reg, w in pairs:
            if w == 0:
                continue
            g, h, d = (getattr(pspec, f"{a}_{reg[0]}") for a in ("g", "h", "d"))
            for k, c in zip(range(-d, d + 1), _central_weights(d)):
                if c:
                    # (D f)_i = sum_k c_k f_{i+k} / h acting after the diagonal factor
                    # the weight never depends on the register being shifted
                    L[flat, neighbours(flat, reg, k)] += w * c / h
    return L


# ---------------------------------------------------------------------------
# electronic structure, term by term
# ---------------------------------------------------------------------------


def plane_wave_indices(B: int) -> list[int]:
    half = (B - 1) // 2
    return list(range(-half, half + 1))


def electronic_matrix(B: int, omega: float, charges: Sequence[float], positions: Sequence[float]) -> np.ndarray:
    """1D single-electron plane-wave Hamiltonian from explicit double loops."""
    idx = plane_wave_indices(B)
    H = np.zeros((B, B), dtype=complex)
    for a, b in enumerate(idx):
        for c_i, c in enumerate(idx):
            kb = 2 * math.pi * b / omega
            if b == c:
                H[a, c_i] = kb * kb / 2
                continue
            kdiff = 2 * math.pi * (c - b) / omega
            k2 = (2 * math.pi * (b - c) / omega) ** 2
            for z, x in zip(charges, positions):
                H[a, c_i] += -(4 * math.pi / omega) * z * np.exp(1j * kdiff * x) / k2
    return H


def electronic_force_matrix(B: int, omega: float, charge: float, position: float) -> np.ndarray:
    """``d H / d x_n`` from the same double loop differentiated by hand."""
    idx = plane_wave_indices(B)
    F = np.zeros((B, B), dtype=complex)
    for a, b in enumerate(idx):
        for c_i, c in enumerate(idx):
            if b == c:
                continue
            kdiff = 2 * math.pi * (c - b) / omega
            k2 = (2 * math.pi * (b - c) / omega) ** 2
            F[a, c_i] = -(4 * math.pi / omega) * charge * 1j * kdiff * np.exp(1j * kdiff * position) / k2
    return F


def ground_energy(B: int, omega: float, charges: Sequence[float], positions: Sequence[float]) -> float:
    return float(ground_truth_spectrum(electronic_matrix(B, omega, charges, positions))[0][0])


def hellmann_feynman(B: int, omega: float, charges: Sequence[float], positions: Sequence[float],
                     n: int) -> float:
    """``<psi_0| dH/dx_n |psi_0>`` with the dense ground state."""
    e, v = ground_truth_spectrum(electronic_matrix(B, omega, charges, positions))
    psi = v[:, 0]
    F = electronic_force_matrix(B, omega, charges[n], positions[n])
    return float(np.real(np.vdot(psi, F @ psi)))
