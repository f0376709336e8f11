"""Polynomial transforms of block encodings.

Covers Chebyshev approximations (exponential and sign), eigenvalue transforms
by phased alternating sequences, Hamiltonian simulation with one round of
oblivious amplitude amplification, and the phase-free construction that
replaces QSP angles by a diagonal table of function samples.

Every transform has two modes.  ``faithful`` builds the operator sequence
explicitly; ``semantic`` applies the matrix function to the encoded block by
eigendecomposition and serves as the reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy.linalg import expm
from scipy.special import erfc, erfcinv, ive, jv

from . import bea, cost, qsp
from .bea import BlockEncoding, BlockEncodingError

Mode = str
FAITHFUL = "faithful"
SEMANTIC = "semantic"


class PolynomialError(ValueError):
    pass


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------


def _sup_on_grid(coef: np.ndarray, degree: int) -> float:
    m = max(10 * max(degree, 1), 200)
    grid = np.concatenate([np.cos(np.pi * (np.arange(m) + 0.5) / m), [-1.0, 1.0]])
    return float(np.max(np.abs(C.chebval(grid, coef))))


def _parity_of(coef: np.ndarray, tol: float = 1e-14) -> str:
    odd = np.any(np.abs(coef[1::2]) > tol)
    even = np.any(np.abs(coef[0::2]) > tol)
    if odd and even:
        return "none"
    return "odd" if odd else "even"


@dataclass(frozen=True)
class ChebyshevPolynomial:
    """Real Chebyshev series with parity and a sampled sup-norm bound on [-1, 1]."""

    coefficients: np.ndarray
    parity: str
    sup_bound: float

    @classmethod
    def from_coefficients(cls, coef: Sequence[float] | np.ndarray) -> "ChebyshevPolynomial":
        c = np.atleast_1d(np.asarray(coef, dtype=float)).copy()
        last = np.flatnonzero(np.abs(c) > 0)
        c = c[: last[-1] + 1] if last.size else c[:1]
        return cls(c, _parity_of(c), _sup_on_grid(c, c.size - 1))

    @property
    def degree(self) -> int:
        return self.coefficients.size - 1

    def __call__(self, x):
        return C.chebval(x, self.coefficients)

    def scaled(self, factor: float) -> "ChebyshevPolynomial":
        return ChebyshevPolynomial.from_coefficients(self.coefficients * factor)

    def even_part(self) -> "ChebyshevPolynomial":
        c = self.coefficients.copy()
        c[1::2] = 0.0
        return ChebyshevPolynomial.from_coefficients(c)

    def odd_part(self) -> "ChebyshevPolynomial":
        c = self.coefficients.copy()
        c[0::2] = 0.0
        return ChebyshevPolynomial.from_coefficients(c)

    def of_matrix(self, h: np.ndarray) -> np.ndarray:
        """``p(h)`` for a Hermitian ``h`` with spectrum in [-1, 1]."""
        w, v = np.linalg.eigh((h + h.conj().T) / 2)
        return (v * self(np.clip(w, -1, 1))) @ v.conj().T


def approx_exp(alpha_t: float, eps: float) -> tuple[ChebyshevPolynomial, ChebyshevPolynomial]:
    """Jacobi–Anger truncation of ``exp(-i alpha_t x) = cos part - i sin part``.

    The degree is the smallest ``r`` whose Bessel tail ``2 sum_{k>r} |J_k|``
    is at most ``eps``; the result is then checked on 1000 sample points.
    """
    if not 0 < eps < 1:
        raise PolynomialError(f"eps must lie in (0, 1), got {eps}")
    if alpha_t < 0:
        raise PolynomialError("alpha_t must be non-negative")
    tau = float(alpha_t)
    if tau == 0:
        return (ChebyshevPolynomial.from_coefficients([1.0]),
                ChebyshevPolynomial(np.zeros(2), "odd", 0.0))
    bound = math.ceil(2 * tau + 3 * math.log(48 * (1 + math.sqrt(2)) / eps))
    kmax = bound + 60
    ks = np.arange(kmax + 1)
    j = jv(ks, tau)
    tail = 2 * np.cumsum(np.abs(j[::-1]))[::-1]  # tail[k] = 2 sum_{l>=k} |J_l|
    r = int(np.argmax(tail[1:] <= eps))  # first r with 2 sum_{k>r} |J_k| <= eps
    xs = np.linspace(-1, 1, 1000)
    while True:
        k = ks[: r + 1]
        c_cos = np.where(k % 2 == 0, 2 * j[: r + 1] * (-1.0) ** (k // 2), 0.0)
        c_cos[0] = j[0]
        c_sin = np.where(k % 2 == 1, 2 * j[: r + 1] * (-1.0) ** ((k - 1) // 2), 0.0)
        err = np.max(np.abs(np.exp(-1j * tau * xs) - (C.chebval(xs, c_cos) - 1j * C.chebval(xs, c_sin))))
        if err <= eps or r >= kmax:
            break
        r += 1
    cos_p = ChebyshevPolynomial.from_coefficients(c_cos)
    sin_c = c_sin if r >= 1 else np.zeros(2)
    sin_p = ChebyshevPolynomial(sin_c[: max(2, _last_nonzero(sin_c) + 1)], "odd",
                                _sup_on_grid(sin_c, sin_c.size - 1))
    return cos_p, sin_p


def _last_nonzero(c: np.ndarray) -> int:
    nz = np.flatnonzero(np.abs(c) > 0)
    return int(nz[-1]) if nz.size else 0


def _erf_coefficients(k: float, n: int) -> np.ndarray:
    """Chebyshev coefficients of ``erf(k x)`` up to degree ``n`` (odd terms only)."""
    z = k * k / 2
    c = np.zeros(n + 1)
    jj = np.arange((n + 1) // 2 + 1)
    vals = 2 * k / math.sqrt(math.pi) * (-1.0) ** jj * (ive(jj, z) + ive(jj + 1, z)) / (2 * jj + 1)
    for idx, v in zip(jj, vals):
        deg = 2 * idx + 1
        if deg <= n:
            c[deg] = v
    return c


def approx_sign(gamma: float, xi: float, max_degree: int = 4001) -> ChebyshevPolynomial:
    """Odd polynomial with ``|S| <= 1`` and ``|S - sign| <= xi`` outside ``(-gamma, gamma)``.

    Built from truncations of ``erf(k x)``.  For a few widths ``k`` the lowest
    odd degree passing both conditions on a dense grid is found, and the overall
    lowest is returned, rescaled toward 1 outside the gap and capped at |S| <= 1.
    """
    if not (0 < gamma < 1 and 0 < xi < 1):
        raise PolynomialError("need 0 < gamma < 1 and 0 < xi < 1")
    k_hi = float(erfcinv(xi / 2)) / gamma
    k_lo = float(erfcinv(xi)) / gamma
    n = max_degree if max_degree % 2 else max_degree - 1
    m_out = 1500
    x_out = np.concatenate([np.linspace(gamma, 1, m_out), np.cos(np.linspace(0, np.arccos(gamma), m_out))])
    x_in = np.linspace(0, gamma, 400)
    best: np.ndarray | None = None
    for k in np.linspace(k_lo, k_hi, 6):
        est = int(min(n, 4 * k * math.sqrt(max(math.log(2 / xi), 1.0)) + 21))
        est += 1 - est % 2
        coef = _erf_coefficients(k, est)
        odd = np.arange(1, est + 1, 2)
        tx_out = np.cos(np.outer(np.arccos(x_out), odd))
        tx_in = np.cos(np.outer(np.arccos(x_in), odd))
        part_out = np.cumsum(tx_out * coef[odd], axis=1)
        part_in = np.cumsum(tx_in * coef[odd], axis=1)
        sup = np.maximum(np.max(np.abs(part_out), axis=0), np.max(np.abs(part_in), axis=0))
        lo, hi = np.min(part_out, axis=0), np.max(part_out, axis=0)
        # best rescaling toward 1 on the outer region, capped so that |S| <= 1
        gain = np.minimum(2.0 / np.maximum(lo + hi, 1e-300), 1.0 / sup)
        scale = 1.0 / gain
        err = np.max(np.abs(part_out / scale - 1.0), axis=0)
        ok = np.flatnonzero(err <= 0.999 * xi)
        if ok.size == 0:
            continue
        i = int(ok[0])
        deg = int(odd[i])
        if best is None or deg < best.size - 1:
            cc = coef[: deg + 1] / scale[i]
            best = cc
    if best is None:
        raise PolynomialError(f"no sign polynomial up to degree {max_degree} for gamma={gamma}, xi={xi}")
    # the search grid can miss overshoots between its points; renormalize at the true extrema
    crit = C.chebroots(C.chebder(best))
    crit = crit.real[(np.abs(crit.imag) < 1e-9) & (np.abs(crit.real) <= 1)]
    peak = float(np.max(np.abs(C.chebval(np.concatenate([crit, [-1.0, 1.0]]), best))))
    if peak > 1:
        best = best / (peak * (1 + 1e-12))
    return ChebyshevPolynomial.from_coefficients(best)


# ---------------------------------------------------------------------------
# faithful alternating-phase circuits
# ---------------------------------------------------------------------------


def _phase_op(n: int, phi: float) -> Callable[[np.ndarray], np.ndarray]:
    """``exp(i phi (2 Pi - I))`` where ``Pi`` projects onto ancilla zero."""
    up, down = np.exp(1j * phi), np.exp(-1j * phi)

    def op(v: np.ndarray) -> np.ndarray:
        out = v * down
        out[:n] = v[:n] * up
        return out

    return op


def _alternating_sequence(be: BlockEncoding, phases_r: np.ndarray):
    """Right-to-left operator list of ``e^{i p_0 Z} U^(dag) ... U e^{i p_d Z}``."""
    n = be.target_dim
    d = phases_r.size - 1
    ops = [("phase", phases_r[d])]
    for i in range(1, d + 1):
        ops.append(("U" if i % 2 == 1 else "Ud", None))
        ops.append(("phase", phases_r[d - i]))
    return ops, n


def _run(ops, n: int, be: BlockEncoding, v: np.ndarray, adjoint: bool, conj_phase: bool) -> np.ndarray:
    seq = ops[::-1] if adjoint else ops
    for kind, phi in seq:
        if kind == "phase":
            sgn = -1.0 if conj_phase else 1.0
            if adjoint:
                sgn = -sgn
            v = _phase_op(n, sgn * phi)(v)
        elif (kind == "U") != adjoint:
            v = be.apply(v)
        else:
            v = be.apply_adjoint(v)
    return v


def qsvt_real(be: BlockEncoding, poly: ChebyshevPolynomial, label: str = "qsvt") -> BlockEncoding:
    """``(1, a+1)`` encoding of ``poly(A / alpha)`` for definite-parity ``poly`` with ``|poly| <= 1``.

    Two phase sequences (``Phi`` and ``-Phi``) share every call to ``U`` and are
    averaged by a Hadamard-conjugated control qubit, which extracts the real part.
    """
    if poly.parity == "none":
        raise PolynomialError("qsvt_real needs a polynomial of definite parity")
    if poly.sup_bound > 1 + 1e-12:
        raise PolynomialError(f"|poly| must be <= 1, sampled sup is {poly.sup_bound}")
    parity = 1 if poly.parity == "odd" else 0
    phases_w = qsp.find_phases(poly.coefficients, parity)
    phases_r, factor = qsp.to_reflection_convention(phases_w)
    d = phases_r.size - 1
    ops, n = _alternating_sequence(be, phases_r)
    m = be.total_dim
    s2 = math.sqrt(2)

    def run(v: np.ndarray, adjoint: bool) -> np.ndarray:
        k = v.shape[1]
        v0, v1 = v[:m], v[m:]
        x = np.concatenate([(v0 + v1) / s2, (v0 - v1) / s2], axis=1)
        # the two halves carry Phi and -Phi; signal calls act on both at once
        top = _run_shared(ops, n, be, x, k, adjoint)
        # Re(g P) = (g P + conj(g) conj(P)) / 2; the -Phi half realizes conj(P)
        g = np.conj(factor) if adjoint else factor
        y0, y1 = g * top[:, :k], np.conj(g) * top[:, k:]
        return np.concatenate([(y0 + y1) / s2, (y0 - y1) / s2])

    queries = {"signal": d}
    return BlockEncoding(lambda v: run(v, False), lambda v: run(v, True), alpha=1.0,
                         ancilla_dim=2 * be.ancilla_dim, target_dim=n, epsilon=0.0,
                         queries=queries, label=label,
                         info={"degree": d, "phases": phases_w})


def _run_shared(ops, n: int, be: BlockEncoding, x: np.ndarray, k: int, adjoint: bool) -> np.ndarray:
    seq = ops[::-1] if adjoint else ops
    for kind, phi in seq:
        if kind == "phase":
            p = -phi if adjoint else phi
            up, down = np.exp(1j * p), np.exp(-1j * p)
            out = np.empty_like(x)
            out[:, :k] = x[:, :k] * down
            out[:n, :k] = x[:n, :k] * up
            out[:, k:] = x[:, k:] * up
            out[:n, k:] = x[:n, k:] * down
            x = out
        elif (kind == "U") != adjoint:
            x = be.apply(x)
        else:
            x = be.apply_adjoint(x)
    return x


def _shared_pair(be: BlockEncoding, polys: Sequence[ChebyshevPolynomial], phases: Sequence[complex],
                 label: str) -> BlockEncoding:
    """Equal-weight select between two sequences that share their signal calls."""
    circuits = [qsvt_real(be, p) for p in polys]
    pair = bea.make_state_prep([0.5, 0.5])
    out = bea.lcu_combine(pair, circuits, phases, label=label)
    d = max(c.info["degree"] for c in circuits)
    return out.with_(queries={"signal": d}, info={"degree": d,
                                                  "degrees": [c.info["degree"] for c in circuits]})


def _hermitian_block(be: BlockEncoding) -> np.ndarray:
    b = be.encoded()
    return (b + b.conj().T) / 2


def eigen_transform(be: BlockEncoding, poly: ChebyshevPolynomial, mode: Mode = FAITHFUL,
                    xi: float = 0.0, target: np.ndarray | None = None) -> BlockEncoding:
    """Encode ``poly(A / alpha)``; requires ``|poly| <= 1/2`` on [-1, 1].

    Declared error ``4 D sqrt(eps / alpha) + xi``.  Definite-parity inputs use a
    single sequence (``a+1`` ancilla qubits); otherwise the even and odd parts,
    each doubled, are combined with weights 1/2 (``a+2``).
    """
    if poly.sup_bound > 0.5 + 1e-12:
        raise PolynomialError(f"|poly| must be <= 1/2, sampled sup is {poly.sup_bound:.6g}")
    if target is not None:
        t = np.asarray(target)
        if np.max(np.abs(t - t.conj().T)) > 1e-10:
            raise BlockEncodingError("eigen_transform needs a Hermitian target")
    d = poly.degree
    eps = 4 * d * math.sqrt(be.epsilon / be.alpha) + xi
    if mode == SEMANTIC:
        m = poly.of_matrix(_hermitian_block(be) / be.alpha)
        out = bea.dilate(m, 1.0, label="eigen_transform[semantic]")
        return out.with_(epsilon=eps, info={"degree": d})
    if mode != FAITHFUL:
        raise ValueError(f"unknown mode {mode!r}")
    if poly.parity != "none":
        out = qsvt_real(be, poly, label="eigen_transform")
    else:
        out = _shared_pair(be, [poly.even_part().scaled(2), poly.odd_part().scaled(2)], [1, 1],
                           label="eigen_transform")
    return out.with_(epsilon=eps)


# ---------------------------------------------------------------------------
# amplitude amplification and Hamiltonian simulation
# ---------------------------------------------------------------------------


def oblivious_amplification(be: BlockEncoding, label: str = "oaa") -> BlockEncoding:
    """One round of robust oblivious amplitude amplification.

    Input: an encoding with ``alpha = 2`` of a (near-)unitary ``V``.  Output:
    ``-U R U^dag R U`` whose corner is ``3B - 4 B B^dag B`` with ``B = V/2 + E``,
    giving a ``(1, a, 2e + 6e^2 + 4e^3)`` encoding with ``e = eps_in / 2``.
    """
    if not math.isclose(be.alpha, 2.0, rel_tol=1e-12):
        raise BlockEncodingError("oblivious amplification expects alpha = 2")
    n = be.target_dim
    refl = _phase_op(n, math.pi / 2)  # i (2 Pi - I): the global i's cancel in pairs

    def reflect(v: np.ndarray) -> np.ndarray:
        return -1j * refl(v)

    def fwd(v: np.ndarray) -> np.ndarray:
        v = be.apply(v)
        v = be.apply_adjoint(reflect(v))
        return -be.apply(reflect(v))

    def adj(v: np.ndarray) -> np.ndarray:
        v = be.apply_adjoint(-v)
        v = be.apply(reflect(v))
        return be.apply_adjoint(reflect(v))

    def blk(p: np.ndarray) -> np.ndarray:
        b = be.apply_block(p)
        return 3 * b - 4 * be.apply_block(be.apply_block_adjoint(b))

    def blk_adj(p: np.ndarray) -> np.ndarray:
        b = be.apply_block_adjoint(p)
        return 3 * b - 4 * be.apply_block_adjoint(be.apply_block(b))

    e = be.epsilon / 2
    q = {k: 3 * v for k, v in be.queries.items()}
    return BlockEncoding(fwd, adj, alpha=1.0, ancilla_dim=be.ancilla_dim, target_dim=n,
                         epsilon=2 * e + 6 * e * e + 4 * e**3, queries=q, label=label,
                         block_apply=blk, block_apply_adjoint=blk_adj, info=dict(be.info))


hamsim_query_bound = cost.hamsim_cost


def _check_sim_hypothesis(be: BlockEncoding, t: float, eps: float) -> None:
    if not 0 < eps < 1:
        raise PolynomialError(f"eps must lie in (0, 1), got {eps}")
    if t != 0 and be.epsilon > eps / (2 * abs(t)) * (1 + 1e-12):
        raise BlockEncodingError(
            f"input encoding error {be.epsilon:.3e} exceeds required eps/(2|t|) = {eps / (2 * abs(t)):.3e}")


def _identity_like(be: BlockEncoding, eps: float, info: dict) -> BlockEncoding:
    out = bea.identity(be.target_dim)
    return out.with_(epsilon=0.0, info=info, queries={"signal": 0}, label="identity evolution")


def ham_sim(be: BlockEncoding, t: float, eps: float, mode: Mode = FAITHFUL) -> BlockEncoding:
    """``(1, a+2, eps)`` encoding of ``exp(-i H t)``.

    Requires ``be.epsilon <= eps / (2|t|)``.  The cos and sin parts are
    scaled slightly below 1, selected with weights 1/2 (sharing signal calls)
    and the resulting factor 2 is removed by one round of oblivious
    amplification, so the signal is used ``3 * degree`` times.
    """
    _check_sim_hypothesis(be, t, eps)
    info: dict = {"query_bound": hamsim_query_bound(be.alpha, t, eps)}
    if t == 0:
        info["queries_used"] = 0
        return _identity_like(be, eps, info)
    if mode == SEMANTIC:
        u = expm(-1j * t * _hermitian_block(be))
        info["queries_used"] = 0
        return bea.dilate(u, 1.0, label="ham_sim[semantic]").with_(epsilon=eps, info=info)
    if mode != FAITHFUL:
        raise ValueError(f"unknown mode {mode!r}")
    tau = be.alpha * abs(t)
    sgn = 1.0 if t > 0 else -1.0
    cut = eps / 16
    cos_p, sin_p = approx_exp(tau, cut)
    shrink = (1 - cut) / (1 + cut)
    pair = _shared_pair(be, [cos_p.scaled(shrink), sin_p.scaled(shrink)], [1.0, -1j * sgn],
                        label="cos/sin select")
    half = pair.with_(alpha=2.0, epsilon=2 * (3 * cut))
    out = oblivious_amplification(half, label="ham_sim")
    used = 3 * pair.info["degree"]
    info.update(queries_used=used, degree=pair.info["degree"])
    total = out.epsilon + abs(t) * be.epsilon
    return out.with_(epsilon=max(total, 0.0), info=info, queries={"signal": used})


# ---------------------------------------------------------------------------
# phase-free transforms from a diagonal table of function samples
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiagonalFunctionEncoding:
    """Samples ``f(cos(2 pi k / 4D))`` for ``k`` in ``[4D]``."""

    entries: np.ndarray
    delta: float
    D: int = field(default=0)

    def __post_init__(self):
        if self.entries.size % 4:
            raise PolynomialError("entry count must be 4D")
        if self.D == 0:
            object.__setattr__(self, "D", self.entries.size // 4)


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _vectorize(f: Callable) -> Callable[[np.ndarray], np.ndarray]:
    def g(x: np.ndarray) -> np.ndarray:
        try:
            y = np.asarray(f(x), dtype=complex)
            if y.shape == x.shape:
                return y
        except Exception:
            pass
        return np.array([complex(f(float(v))) for v in x.ravel()]).reshape(x.shape)

    return g


def angleless_encode(f: Callable, D: int, delta: float = 0.0) -> DiagonalFunctionEncoding:
    """Tabulate ``f`` at ``cos(2 pi k / 4D)``; entries are exact at desk scale."""
    if not _is_power_of_two(D):
        raise PolynomialError(f"D must be a power of two, got {D}")
    g = _vectorize(f)
    probe = g(np.linspace(-1, 1, 1001))
    if np.max(np.abs(probe)) > 1 + 1e-12:
        raise PolynomialError("|f| exceeds 1 on [-1, 1]")
    k = np.arange(4 * D)
    entries = g(np.cos(2 * np.pi * k / (4 * D)))
    return DiagonalFunctionEncoding(entries, float(delta), D)


def laurent_truncation_error(f: Callable, D: int, samples: int | None = None) -> float:
    """Sampled sup error of the degree-``D`` Fourier truncation of ``f(cos theta)``.

    An upper bound on the best degree-``D`` Laurent approximation error.
    """
    g = _vectorize(f)
    m = samples or max(64 * D, 4096)
    theta = 2 * np.pi * np.arange(m) / m
    vals = g(np.cos(theta))
    coef = np.fft.fft(vals) / m
    freqs = np.fft.fftfreq(m, 1.0 / m)
    coef[np.abs(freqs) > D] = 0
    approx = np.fft.ifft(coef * m)
    return float(np.max(np.abs(approx - vals)))


def _qft(nk: int) -> np.ndarray:
    k = np.arange(nk)
    return np.exp(2j * np.pi * np.outer(k, k) / nk) / math.sqrt(nk)


def angleless_transform(be: BlockEncoding, dfe: DiagonalFunctionEncoding,
                        e_d: float | None = None) -> BlockEncoding:
    """``(sqrt 2, ., (1+sqrt 2) E_D + sqrt 2 delta)`` encoding of ``f(H / alpha)``.

    Builds ``W = (2|0><0| - I) U_H``, ``V = sum_k W^k ⊗ |k><k|``, the
    ``4D``-point Fourier sandwich around the diagonal table and the
    ``<+_{2D}| ... |+_{4D}>`` projection.  ``U_H`` is made Hermitian first when
    it is not already.
    """
    u_h = be
    if not (be._dense is not None and bea.is_hermitian_unitary(be)):
        u_h = bea.hermitize(be)
    D = dfe.D
    nk = 4 * D
    a, n = u_h.ancilla_dim, u_h.target_dim
    m = a * n
    bdim = 2
    x = dfe.entries
    s = np.sqrt(np.clip(1 - np.abs(x) ** 2, 0, None))
    F = _qft(nk)
    plus4 = np.full(nk, 1 / math.sqrt(nk))
    plus2 = np.zeros(nk)
    plus2[D:3 * D] = 1 / math.sqrt(2 * D)
    prep_r = bea.unitary_with_first_column(plus4)
    prep_l = bea.unitary_with_first_column(plus2)
    circ = F @ np.diag(x) @ F.conj().T  # corner of the Fourier-sandwiched table

    def walk(v: np.ndarray) -> np.ndarray:
        out = u_h.apply(v)
        out[n:] *= -1
        return out

    def walk_inv(v: np.ndarray) -> np.ndarray:
        w = v.copy()
        w[n:] *= -1
        return u_h.apply_adjoint(w)

    def powers(v: np.ndarray, step) -> np.ndarray:
        # v: (nk, m, c) -> out[k] = step^k v[k]
        out = v.copy()
        for j in range(1, nk):
            c = out.shape[2]
            cur = out[j:].transpose(1, 0, 2).reshape(m, -1)
            out[j:] = step(cur).reshape(m, nk - j, c).transpose(1, 0, 2)
        return out

    def table(v: np.ndarray, adjoint: bool) -> np.ndarray:
        # v: (2, nk, rest): dilation of diag(x) on (b, k)
        v0, v1 = v[0], v[1]
        xx = np.conj(x) if adjoint else x
        o0 = xx[:, None] * v0 + s[:, None] * v1
        o1 = s[:, None] * v0 - np.conj(xx)[:, None] * v1
        return np.stack([o0, o1])

    def fwd(v: np.ndarray) -> np.ndarray:
        c = v.shape[1]
        w = v.reshape(bdim, nk, m, c)
        w = np.einsum("kl,blmc->bkmc", prep_r, w)
        w = np.stack([powers(w[b], walk) for b in range(bdim)])
        w = np.einsum("kl,blmc->bkmc", F.conj().T, w)
        w = table(w.reshape(bdim, nk, -1), False).reshape(bdim, nk, m, c)
        w = np.einsum("kl,blmc->bkmc", F, w)
        w = np.stack([powers(w[b], walk_inv) for b in range(bdim)])
        w = np.einsum("kl,blmc->bkmc", prep_l.conj().T, w)
        return w.reshape(-1, c)

    def adj(v: np.ndarray) -> np.ndarray:
        c = v.shape[1]
        w = v.reshape(bdim, nk, m, c)
        w = np.einsum("kl,blmc->bkmc", prep_l, w)
        w = np.stack([powers(w[b], walk) for b in range(bdim)])
        w = np.einsum("kl,blmc->bkmc", F.conj().T, w)
        w = table(w.reshape(bdim, nk, -1), True).reshape(bdim, nk, m, c)
        w = np.einsum("kl,blmc->bkmc", F, w)
        w = np.stack([powers(w[b], walk_inv) for b in range(bdim)])
        w = np.einsum("kl,blmc->bkmc", prep_r.conj().T, w)
        return w.reshape(-1, c)

    def krylov(psi: np.ndarray, step, count: int) -> np.ndarray:
        out = np.empty((count,) + psi.shape, dtype=complex)
        out[0] = psi
        for j in range(1, count):
            out[j] = step(out[j - 1])
        return out

    def horner(z: np.ndarray, lo: int, hi: int, step) -> np.ndarray:
        # sum_{k=lo}^{hi-1} step^k z[k]
        acc = z[hi - 1]
        for k in range(hi - 2, lo - 1, -1):
            acc = step(acc) + z[k]
        for _ in range(lo):
            acc = step(acc)
        return acc

    def blk(p: np.ndarray) -> np.ndarray:
        start = np.zeros((m, p.shape[1]), dtype=complex)
        start[:n] = p
        y = krylov(start, walk, nk) / math.sqrt(nk)
        z = np.einsum("kl,lmc->kmc", circ, y) / math.sqrt(2 * D)
        return horner(z, D, 3 * D, walk_inv)[:n]

    def blk_adj(p: np.ndarray) -> np.ndarray:
        start = np.zeros((m, p.shape[1]), dtype=complex)
        start[:n] = p
        y = np.zeros((nk, m, p.shape[1]), dtype=complex)
        seq = krylov(start, walk, 3 * D)
        y[D:3 * D] = seq[D:3 * D] / math.sqrt(2 * D)
        z = np.einsum("kl,lmc->kmc", circ.conj().T, y) / math.sqrt(nk)
        return horner(z, 0, nk, walk_inv)[:n]

    err = (1 + math.sqrt(2)) * (e_d or 0.0) + math.sqrt(2) * dfe.delta
    return BlockEncoding(fwd, adj, alpha=math.sqrt(2), ancilla_dim=bdim * nk * a, target_dim=n,
                         epsilon=err, queries={"signal": 2 * (nk - 1)}, label="angleless",
                         block_apply=blk, block_apply_adjoint=blk_adj,
                         info={"D": D, "E_D": e_d})


angleless_query_bound = cost.angleless_hamsim_cost


def angleless_degree(alpha_t: float, eps: float, max_D: int = 1024) -> tuple[int, float]:
    """Smallest power-of-two ``D`` whose truncation error meets ``eps / (8 (1 + sqrt 2))``."""
    target = eps / (8 * (1 + math.sqrt(2)))
    f = lambda x: np.exp(-1j * alpha_t * x)
    D = 1
    while True:
        e = laurent_truncation_error(f, D)
        if e <= target or D >= max_D:
            return D, e
        D *= 2


def angleless_ham_sim(be: BlockEncoding, t: float, eps: float, mode: Mode = FAITHFUL) -> BlockEncoding:
    """``(1, a+b+3, eps)`` encoding of ``exp(-i H t)`` without QSP angles.

    The sample table of ``exp(-i alpha t x)`` is transformed, tensored with a
    Hadamard (scaling 2) and amplified once, i.e. three uses of the table circuit.
    """
    _check_sim_hypothesis(be, t, eps)
    info: dict = {"query_bound": angleless_query_bound(be.alpha, t, eps)}
    if t == 0:
        info["queries_used"] = 0
        return _identity_like(be, eps, info)
    if mode == SEMANTIC:
        return ham_sim(be, t, eps, SEMANTIC).with_(info=info)
    tau = be.alpha * t
    D, e_d = angleless_degree(abs(tau), eps)
    dfe = angleless_encode(lambda x: np.exp(-1j * tau * x), D)
    fd = angleless_transform(be, dfe, e_d=e_d)
    half = bea.rescaled(fd, 2.0)
    out = oblivious_amplification(half, label="angleless_ham_sim")
    used = 3 * 2 * (4 * D - 1)
    info.update(queries_used=used, D=D, E_D=e_d)
    return out.with_(epsilon=out.epsilon + abs(t) * be.epsilon, info=info, queries={"signal": used})
