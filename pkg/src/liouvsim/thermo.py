"""Alchemical thermodynamic integration over Liouvillian-equilibrated KvN states.

For a pair of systems A and B on a shared phase-space layout the estimate is

    dF ~ (1/N) sum_k < rho_k | H_B - H_A | rho_k >,   rho_k = exp(-i L_k t_eq) rho_0,

with ``L_k = (1 - k/N) L_A + (k/N) L_B``.  The expectation is read from a
Hadamard test on an encoding of ``H_B - H_A`` and refined by amplitude estimation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import bea, oracle, qsvt
from . import electronic as el
from . import phasespace as ps
from .liouvillian import Liouvillian, _lift_positions, evolve, full_liouvillian
from .phasespace import KvNState, Layout, PhaseSpaceSpec

IDEAL = "ideal"
SAMPLED = "sampled"
QAE = "qae"
MODES = (IDEAL, SAMPLED, QAE)


class ThermoError(RuntimeError):
    """A pipeline failure tagged with the stage that raised it."""

    def __init__(self, stage: str, message: str) -> None:
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@dataclass(frozen=True)
class ThermoConfig:
    n_lambda: int = 4
    t_eq: float = 1.0
    eps: float = 0.05
    xi: float = 0.05
    qae_ancillas: int | None = None
    mode: str = IDEAL
    shots: int | None = None

    def __post_init__(self) -> None:
        if self.n_lambda < 1:
            raise ValueError("n_lambda must be at least 1")
        if self.t_eq < 0:
            raise ValueError("t_eq must be non-negative")
        if not 0 < self.xi < 1:
            raise ValueError("xi must lie in (0, 1)")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")

    @property
    def lambdas(self) -> np.ndarray:
        return oracle.lambda_points(self.n_lambda)


@dataclass(frozen=True)
class System:
    pspec: PhaseSpaceSpec
    espec: el.ElectronicSpec | None = None


@dataclass
class AlchemicalPair:
    """Two systems on one phase-space layout.

    Registers are shared one to one; systems that use fewer nuclei must be
    padded with zero-charge nuclei so that the layouts agree.
    """
    a: System
    b: System
    eps_de: float = 1e-6
    eps_gse: float = 1e-3
    mode: str | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        la, lb = Layout.of(self.a.pspec), Layout.of(self.b.pspec)
        if la.dims != lb.dims or self.a.pspec.ensemble != self.b.pspec.ensemble:
            raise ThermoError("pair", f"layouts differ: {la.dims} vs {lb.dims}")
        if [x.variable for x in la.axes] != [x.variable for x in lb.axes]:
            raise ThermoError("pair", "register order differs")

    @property
    def layout(self) -> Layout:
        return Layout.of(self.a.pspec)

    @property
    def spec(self) -> PhaseSpaceSpec:
        return self.a.pspec

    def reversed(self) -> "AlchemicalPair":
        return AlchemicalPair(self.b, self.a, self.eps_de, self.eps_gse, self.mode, self.seed)

    def with_tolerances(self, eps_de: float, eps_gse: float) -> "AlchemicalPair":
        return AlchemicalPair(self.a, self.b, eps_de, eps_gse, self.mode, self.seed)

    @cached_property
    def liouvillians(self) -> tuple[Liouvillian, Liouvillian]:
        return tuple(full_liouvillian(s.espec, s.pspec, self.eps_de, self.mode, self.seed)
                     for s in (self.a, self.b))

    @cached_property
    def hamiltonian_parts(self) -> tuple[dict, dict]:
        return tuple(nuclear_hamiltonian_parts(s, self.eps_gse, self.mode, self.seed) for s in (self.a, self.b))


# ---------------------------------------------------------------------------
# nuclear Hamiltonian and its difference
# ---------------------------------------------------------------------------


def nuclear_hamiltonian_parts(system: System, eps_gse: float = 1e-3, mode: str | None = None,
                              seed: int = 0) -> dict[str, bea.BlockEncoding]:
    """Diagonal encodings of the kinetic, potential and ground-state-energy terms."""
    p = system.pspec
    parts = {"kin": ps.kinetic_hamiltonian(p)}
    pot = ps.potential_values(p).ravel()
    if np.any(pot != 0):
        parts["pot"] = ps.potential_hamiltonian(p)
    if system.espec is not None:
        g = el.h_gse(system.espec, p, eps_gse, mode, seed)
        vals = _lift_positions(p, g.info["values"])
        parts["gse"] = bea.diagonal_encoding(vals, alpha=g.alpha, label="H_gse").with_(
            epsilon=g.epsilon, info=g.info)
    return parts


def nuclear_hamiltonian(system: System, eps_gse: float = 1e-3, mode: str | None = None,
                        seed: int = 0) -> bea.BlockEncoding:
    """``H_kin + H_pot + H_gse`` with ``alpha = alpha_kin + alpha_pot + lambda``."""
    parts = nuclear_hamiltonian_parts(system, eps_gse, mode, seed)
    return _sum(parts, "H_nuc")


def _sum(parts: dict, label: str) -> bea.BlockEncoding:
    terms = list(parts.values())
    if len(terms) == 1:
        return terms[0].with_(label=label)
    return bea.linear_combination([1.0] * len(terms), terms, label=label)


def nuclear_energy_values(system: System) -> np.ndarray:
    """Exact ``H_kin + H_pot + E_0`` at every grid point (dense eigensolver for ``E_0``)."""
    p = system.pspec
    vals = ps.kinetic_values(p).ravel() + ps.potential_values(p).ravel()
    if system.espec is not None:
        pos = el._position_values(p)
        e0 = np.array([el.ground_energy(system.espec, p.charges, x) for x in pos])
        vals = vals + _lift_positions(p, e0)
    return vals


def delta_hamiltonian(pair: AlchemicalPair, cancel_shared: bool = False) -> bea.BlockEncoding:
    """Encoding of ``H_B - H_A`` with ``alpha = alpha_A + alpha_B``.

    With ``cancel_shared`` the terms that coincide in both systems are dropped
    before the difference is taken.
    """
    pa, pb = (dict(d) for d in pair.hamiltonian_parts)
    if cancel_shared:
        for key in list(pa):
            if key in pb and np.array_equal(pa[key].encoded(), pb[key].encoded()):
                del pa[key], pb[key]
        if not pa and not pb:
            zero = bea.diagonal_encoding(np.zeros(pair.layout.size), alpha=1.0, label="dH")
            return zero
    terms, weights = [], []
    for d, w in ((pb, 1.0), (pa, -1.0)):
        if d:
            terms.append(_sum(d, "H"))
            weights.append(w)
    return bea.linear_combination(weights, terms, label="dH")


def delta_hamiltonian_values(pair: AlchemicalPair) -> np.ndarray:
    """Diagonal of ``H_B - H_A`` with exact ground energies."""
    return nuclear_energy_values(pair.b) - nuclear_energy_values(pair.a)


# ---------------------------------------------------------------------------
# superposed equilibration
# ---------------------------------------------------------------------------


def interpolated_liouvillian(pair: AlchemicalPair, lam: float) -> bea.BlockEncoding:
    """``(1 - lam) L_A + lam L_B`` with ``alpha = (1 - lam) alpha_A + lam alpha_B``."""
    if not 0 <= lam <= 1:
        raise ThermoError("interpolate", f"lambda={lam} outside [0, 1]")
    la, lb = pair.liouvillians
    return bea.linear_combination([1 - lam, lam], [la.encoding, lb.encoding], label=f"L[{lam:.4g}]")


def interpolated_dense(pair: AlchemicalPair, lam: float):
    la, lb = pair.liouvillians
    return (1 - lam) * la.dense() + lam * lb.dense()


@dataclass
class SuperposedState:
    """``(1/sqrt N) sum_k |k> |rho_k>``; ``blocks[k]`` holds the projected ``rho_k``."""
    blocks: np.ndarray
    layout: Layout
    lambdas: np.ndarray
    success_probabilities: np.ndarray
    degrees: list
    queries: list
    copied: bool = False

    @property
    def n_lambda(self) -> int:
        return self.blocks.shape[0]

    @property
    def amplitudes(self) -> np.ndarray:
        return self.blocks / math.sqrt(self.n_lambda)

    @property
    def common_degree(self) -> int:
        return max(self.degrees) if self.degrees else 0

    def block_state(self, k: int) -> KvNState:
        b = self.blocks[k]
        if self.copied:
            raise ThermoError("state", "bath register already copied")
        return KvNState(b, self.layout)


def superposed_equilibrate(pair: AlchemicalPair, cfg: ThermoConfig, rho0: KvNState, eps_L: float,
                           engine: str = "qsvt", mode: str = qsvt.FAITHFUL) -> SuperposedState:
    """Evolve every ``Lambda`` block under its own Liouvillian.

    Blocks are independent (the Liouvillian is block diagonal in the
    ``Lambda`` register), so each one is run separately; the circuit's shared
    polynomial length is reported as ``common_degree``.
    """
    blocks, probs, degrees, queries = [], [], [], []
    for k, lam in enumerate(cfg.lambdas):
        try:
            L = interpolated_liouvillian(pair, float(lam))
            r = evolve(L, rho0, cfg.t_eq, eps_L, engine, mode)
        except Exception as exc:  # noqa: BLE001 - re-raised with the block index
            raise ThermoError("equilibrate", f"block {k} (lambda={lam:.4g}): {exc}") from exc
        blocks.append(r.state.amplitudes)
        probs.append(r.success_probability)
        degrees.append(r.queries // 3 if engine == "qsvt" else r.queries)
        queries.append(r.queries)
    return SuperposedState(np.array(blocks), rho0.layout, cfg.lambdas, np.array(probs), degrees, queries)


def duplicate_bath(state: SuperposedState) -> SuperposedState:
    """Copy the ``s`` register into a fresh register in the computational basis.

    ``sum_s c_s |s>|0>  ->  sum_s c_s |s>|s>``; the copy is appended as the last axis.
    """
    lay = state.layout
    if not lay.has("s"):
        warnings.warn("no bath register in NVE mode; state left unchanged", stacklevel=2)
        return state
    if state.copied:
        return state
    ax = lay.index("s") + 1
    g = lay.dims[ax - 1]
    a = state.blocks.reshape((state.n_lambda,) + lay.dims)
    a = np.moveaxis(a, ax, -1)
    out = a[..., :, None] * np.eye(g)
    out = np.moveaxis(out, -2, ax)
    return SuperposedState(out.reshape(state.n_lambda, -1), lay, state.lambdas, state.success_probabilities,
                           state.degrees, state.queries, copied=True)


# ---------------------------------------------------------------------------
# Hadamard test and amplitude estimation
# ---------------------------------------------------------------------------


@dataclass
class HadamardResult:
    probability: float
    exact_probability: float
    imaginary_part: float
    per_lambda: np.ndarray
    shots: int = 0


def hadamard_test(state: SuperposedState, delta_be: bea.BlockEncoding, mode: str = IDEAL,
                  shots: int = 0, rng: np.random.Generator | None = None) -> HadamardResult:
    """Probability of reading 0 on the control: ``(1/2)(Re <psi|U_dH|psi> + 1)``.

    The ``Lambda`` register and the bath copy are spectators; their trace is
    taken by summing over the columns they index.
    """
    n = state.layout.size
    k = state.n_lambda
    cols = state.blocks.reshape(k, n, -1) if state.copied else state.blocks.reshape(k, n, 1)
    per = []
    total = 0j
    for b in cols:
        ub = delta_be.apply_block(b)
        v = np.vdot(b, ub)
        per.append(v.real * delta_be.alpha)
        total += v
    total /= k
    p_exact = 0.5 * (total.real + 1.0)
    if mode == SAMPLED:
        if shots <= 0:
            raise ThermoError("hadamard", "sampled mode needs a positive shot count")
        rng = rng or np.random.default_rng()
        p = rng.binomial(shots, min(max(p_exact, 0.0), 1.0)) / shots
    else:
        p = p_exact
    return HadamardResult(float(p), float(p_exact), float(total.imag), np.array(per), shots)


def qae_required_ancillas(alpha_delta: float, eps_qae: float) -> int:
    return math.ceil(math.log2(2 * math.pi * alpha_delta / eps_qae)) + 2


def grover_matrix(p: float) -> tuple[np.ndarray, np.ndarray]:
    """Grover iterate ``-A S_0 A^dag S_good`` on span{bad, good} and the start vector."""
    theta = math.asin(math.sqrt(min(max(p, 0.0), 1.0)))
    start = np.array([math.cos(theta), math.sin(theta)])
    s_good = np.diag([1.0, -1.0])
    s_start = np.eye(2) - 2 * np.outer(start, start)
    return -s_start @ s_good, start


def qae_distribution(p: float, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact outcome distribution of ``m``-ancilla phase estimation on the Grover iterate.

    Returns ``(probabilities over y, estimates sin^2(pi y / M))``.
    """
    M = 2 ** m
    Q, start = grover_matrix(p)
    w, v = np.linalg.eig(Q)
    phases = np.mod(np.angle(w) / (2 * np.pi), 1.0)
    weights = np.abs(v.conj().T @ start) ** 2
    y = np.arange(M)
    probs = np.zeros(M)
    for ph, wt in zip(phases, weights):
        d = ph - y / M
        num = np.sin(np.pi * M * d)
        den = M * np.sin(np.pi * d)
        with np.errstate(invalid="ignore", divide="ignore"):
            f = np.where(np.abs(den) < 1e-300, 1.0, (num / np.where(den == 0, 1, den)) ** 2)
        f[np.isclose(np.mod(d + 0.5, 1.0) - 0.5, 0.0, atol=1e-15)] = 1.0
        probs += wt * f
    probs /= probs.sum()
    return probs, np.sin(np.pi * y / M) ** 2


def median_repetitions(success: float, xi: float) -> int:
    """Odd ``r`` with ``exp(-2 r (success - 1/2)^2) <= xi`` (Hoeffding on the median)."""
    r = math.ceil(math.log(1 / xi) / (2 * (success - 0.5) ** 2))
    return r + (r % 2 == 0)


@dataclass
class EstimateResult:
    estimate: float
    precision: float
    repetitions: int
    accesses: int
    ancillas: int = 0
    samples: np.ndarray = field(default_factory=lambda: np.zeros(0))


def amplitude_estimate(p: float, alpha_delta: float, eps_qae: float, cfg: ThermoConfig,
                       rng: np.random.Generator | None = None) -> EstimateResult:
    """Estimate ``p`` to ``eps_qae / (2 alpha_delta)`` with confidence ``1 - xi``.

    ``accesses`` counts uses of the Hadamard-test circuit: Grover powers for
    ``qae`` (two circuit calls per iterate) and shots for ``sampled``.
    """
    rng = rng or np.random.default_rng()
    target = eps_qae / (2 * alpha_delta)
    if cfg.mode == IDEAL:
        return EstimateResult(p, 0.0, 1, 0)
    if cfg.mode == SAMPLED:
        # median of means: each mean fails with probability <= 1/4 by Chebyshev
        n = cfg.shots or math.ceil(1 / target ** 2)
        r = median_repetitions(0.75, cfg.xi)
        means = rng.binomial(n, min(max(p, 0.0), 1.0), size=r) / n
        return EstimateResult(float(np.median(means)), 1 / math.sqrt(n), r, r * n, 0, means)
    need = qae_required_ancillas(alpha_delta, eps_qae)
    m = cfg.qae_ancillas if cfg.qae_ancillas is not None else need
    if m < need:
        raise ThermoError("qae", f"{m} ancillas give too coarse a phase grid; need m = {need}")
    M = 2 ** m
    probs, est = qae_distribution(p, m)
    # worst case of 2 pi sqrt(p(1-p))/M + pi^2/M^2, holding with probability >= 8/pi^2 per run
    prec = math.pi / M + math.pi ** 2 / M ** 2
    r = median_repetitions(8 / math.pi ** 2, cfg.xi)
    ys = rng.choice(M, size=r, p=probs)
    samples = est[ys]
    return EstimateResult(float(np.median(samples)), prec, r, r * 2 * (M - 1) + r, m, samples)


# ---------------------------------------------------------------------------
# end to end
# ---------------------------------------------------------------------------


@dataclass
class ThermoResult:
    delta_f: float
    p_hat: float
    p_exact: float
    alpha_delta: float
    ledger: dict
    budget: dict
    n_lambda: int
    t_eq: float
    per_lambda: list
    diagnostics: dict

    @property
    def ledger_total(self) -> float:
        return float(sum(self.ledger.values()))


def error_budget(eps: float, alpha_delta: float) -> dict:
    """``eps/3`` each for discretization and estimation; the rest split evenly between
    the Hamiltonian encoding and the state error ``2 alpha sqrt(2 eps_L)``."""
    third = eps / 3
    eps_L = (third / 2 / (2 * alpha_delta)) ** 2 / 2
    return {"eps_disc": third, "eps_qae": third, "eps_delta": third / 2, "eps_L": eps_L}


def equilibration_drift(pair: AlchemicalPair, cfg: ThermoConfig, rho0: np.ndarray, dh: np.ndarray, samples: int = 5) -> float:
    """Spread of ``<dH>_Lambda`` over the final tenth of ``t_eq`` (dense propagation)."""
    if cfg.t_eq == 0:
        return 0.0
    times = np.linspace(0.9 * cfg.t_eq, cfg.t_eq, samples)
    worst = 0.0
    for lam in cfg.lambdas:
        prop = oracle.Propagator(interpolated_dense(pair, float(lam)).toarray())
        vals = [float(np.real(np.vdot(r, dh * r))) for r in prop.evolve(rho0, times)]
        worst = max(worst, max(vals) - min(vals))
    return worst


def free_energy_difference(pair: AlchemicalPair, cfg: ThermoConfig, rho0: KvNState,
                           engine: str = "qsvt", mode: str = qsvt.FAITHFUL, seed: int = 0,
                           dense_checks: bool = True) -> ThermoResult:
    """Full pipeline: budget, encodings, superposed evolution, bath copy, test, estimate."""
    rng = np.random.default_rng(seed)
    # alpha_delta does not depend on the tolerances, so a provisional pair fixes the budget
    try:
        alpha_delta = delta_hamiltonian(pair).alpha
    except Exception as exc:  # noqa: BLE001
        raise ThermoError("delta_hamiltonian", str(exc)) from exc
    budget = error_budget(cfg.eps, alpha_delta)
    eps_L = budget["eps_L"]
    t = max(cfg.t_eq, 1e-300)
    work = pair.with_tolerances(eps_de=_force_tolerance(pair, eps_L / (2 * t)), eps_gse=budget["eps_delta"] / 2)
    try:
        dH = delta_hamiltonian(work)
    except Exception as exc:  # noqa: BLE001
        raise ThermoError("delta_hamiltonian", str(exc)) from exc
    if dH.epsilon > budget["eps_delta"] * (1 + 1e-9):
        raise ThermoError("delta_hamiltonian", f"encoding error {dH.epsilon:.3e} over budget {budget['eps_delta']:.3e}")

    state = superposed_equilibrate(work, cfg, rho0, eps_L, engine, mode)
    copied = duplicate_bath(state) if work.layout.has("s") else state
    try:
        h = hadamard_test(copied, dH)
    except Exception as exc:  # noqa: BLE001
        raise ThermoError("hadamard", str(exc)) from exc
    est = amplitude_estimate(h.probability, dH.alpha, budget["eps_qae"], cfg, rng)
    delta_f = dH.alpha * (2 * est.estimate - 1)

    diagnostics: dict = {
        "imaginary_part": h.imaginary_part,
        "success_probability_min": float(state.success_probabilities.min()),
        "common_degree": state.common_degree,
        "estimate_repetitions": est.repetitions,
        "estimate_accesses": est.accesses,
        "qae_ancillas": est.ancillas,
    }
    per_lambda = [{"lambda": float(l), "expectation": float(e)} for l, e in zip(cfg.lambdas, h.per_lambda)]
    eps_disc = budget["eps_disc"]
    if dense_checks:
        dh_vals = np.real(np.diag(dH.block())) * dH.alpha if work.layout.size <= 4096 else None
        exact_dh = delta_hamiltonian_values(work)
        la, lb = work.liouvillians
        eps_disc = oracle.riemann_bound(la.dense(), lb.dense(), exact_dh, cfg.t_eq, cfg.n_lambda)
        for k, lam in enumerate(cfg.lambdas):
            ref = oracle.Propagator(interpolated_dense(work, float(lam)).toarray()).evolve(rho0.amplitudes, cfg.t_eq)
            per_lambda[k]["block_fidelity"] = float(abs(np.vdot(ref, state.blocks[k])) ** 2)
        diagnostics["drift"] = equilibration_drift(work, cfg, rho0.amplitudes, exact_dh)
        if dh_vals is not None:
            diagnostics["delta_h_max_error"] = float(np.max(np.abs(dh_vals - exact_dh)))
    ledger = {
        "eps_L": 2 * dH.alpha * math.sqrt(2 * eps_L),
        "eps_delta": float(dH.epsilon),
        "eps_disc": float(eps_disc),
        "eps_qae": 2 * dH.alpha * est.precision,
    }
    return ThermoResult(float(delta_f), est.estimate, h.exact_probability, float(dH.alpha), ledger, budget,
                        cfg.n_lambda, cfg.t_eq, per_lambda, diagnostics)


def _force_tolerance(pair: AlchemicalPair, eps_encoding: float) -> float:
    """Per-force tolerance so that the electronic Liouvillian errors stay within ``eps_encoding``."""
    total = 0.0
    for s in (pair.a, pair.b):
        if s.espec is None:
            continue
        for n in range(s.pspec.N):
            for j in range(s.pspec.spatial_dim):
                total += ps.derivative_encoding(s.pspec, "p", n, j).alpha
    return eps_encoding / total if total else pair.eps_de
