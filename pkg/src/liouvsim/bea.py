"""Block-encoding algebra on explicit (optionally matrix-free) unitaries.

A block encoding stores a unitary ``U`` acting on ``ancilla ⊗ system`` with the
ancilla index outermost, so the encoded block is the top-left
``target_dim × target_dim`` corner of ``U`` and ``alpha * block ≈ A``.

Unitaries are carried as a pair of callables (forward and adjoint action on
column stacks).  Small encodings also keep their dense matrix.  Register sizes
are arbitrary integers; ``ancilla_dim`` plays the role of ``2**a``.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from ._config import check_dim

Action = Callable[[np.ndarray], np.ndarray]

#: floating-point slack used when comparing a measured deviation to a declared error
ATOL = 1e-10

_CLIP = 1e-14


class BlockEncodingError(ValueError):
    """A block-encoding precondition was violated."""


def _as_columns(v: np.ndarray) -> tuple[np.ndarray, bool]:
    v = np.asarray(v, dtype=complex)
    if v.ndim == 1:
        return v[:, None], True
    return v, False


def _merge_queries(*parts: Mapping[str, int], scale: int = 1) -> dict[str, int]:
    total: Counter = Counter()
    for p in parts:
        for k, n in p.items():
            total[k] += n * scale
    return dict(total)


class BlockEncoding:
    """An ``(alpha, ancilla_dim, epsilon)`` block encoding of a square matrix."""

    def __init__(
        self,
        apply: Action,
        apply_adjoint: Action,
        *,
        alpha: float,
        ancilla_dim: int,
        target_dim: int,
        epsilon: float = 0.0,
        queries: Mapping[str, int] | None = None,
        label: str = "",
        dense: np.ndarray | None = None,
        block_apply: Action | None = None,
        block_apply_adjoint: Action | None = None,
        info: Mapping[str, object] | None = None,
    ) -> None:
        if alpha <= 0:
            raise BlockEncodingError(f"alpha must be positive, got {alpha}")
        if ancilla_dim < 1 or target_dim < 1:
            raise BlockEncodingError("register dimensions must be positive")
        check_dim(ancilla_dim * target_dim, label or "block encoding")
        self._apply = apply
        self._apply_adjoint = apply_adjoint
        self.alpha = float(alpha)
        self.ancilla_dim = int(ancilla_dim)
        self.target_dim = int(target_dim)
        self.epsilon = float(epsilon)
        self.queries: dict[str, int] = dict(queries or {})
        self.label = label
        self._dense = dense
        self._block_apply = block_apply
        self._block_apply_adjoint = block_apply_adjoint
        self.info: dict[str, object] = dict(info or {})

    # -- basic properties -------------------------------------------------
    @property
    def total_dim(self) -> int:
        return self.ancilla_dim * self.target_dim

    @property
    def ancilla_qubits(self) -> int:
        """Qubit count ``ceil(log2(ancilla_dim))`` used for cost reporting."""
        return 0 if self.ancilla_dim == 1 else math.ceil(math.log2(self.ancilla_dim))

    def __repr__(self) -> str:
        return (
            f"BlockEncoding({self.label or 'anon'}: alpha={self.alpha:.6g}, "
            f"ancilla_dim={self.ancilla_dim}, target_dim={self.target_dim}, "
            f"epsilon={self.epsilon:.3g})"
        )

    # -- action -------------------------------------------------------------
    def apply(self, v: np.ndarray) -> np.ndarray:
        cols, flat = _as_columns(v)
        if cols.shape[0] != self.total_dim:
            raise BlockEncodingError(f"vector length {cols.shape[0]} != {self.total_dim}")
        out = self._dense @ cols if self._dense is not None else self._apply(cols)
        return out[:, 0] if flat else out

    def apply_adjoint(self, v: np.ndarray) -> np.ndarray:
        cols, flat = _as_columns(v)
        if cols.shape[0] != self.total_dim:
            raise BlockEncodingError(f"vector length {cols.shape[0]} != {self.total_dim}")
        out = self._dense.conj().T @ cols if self._dense is not None else self._apply_adjoint(cols)
        return out[:, 0] if flat else out

    @property
    def unitary(self) -> np.ndarray:
        if self._dense is None:
            self._dense = self._apply(np.eye(self.total_dim, dtype=complex))
        return self._dense

    def block(self) -> np.ndarray:
        """``(<0| ⊗ I) U (|0> ⊗ I)`` without the alpha factor."""
        n = self.target_dim
        if self._dense is not None:
            return self._dense[:n, :n].copy()
        return self.apply_block(np.eye(n, dtype=complex))

    def apply_block(self, psi: np.ndarray) -> np.ndarray:
        """``<0|U|0> psi`` on the system register (post-selected action, no alpha)."""
        cols, flat = _as_columns(psi)
        n = self.target_dim
        if cols.shape[0] != n:
            raise BlockEncodingError(f"state length {cols.shape[0]} != {n}")
        if self._block_apply is not None and self._dense is None:
            out = self._block_apply(cols)
        else:
            full = np.zeros((self.total_dim, cols.shape[1]), dtype=complex)
            full[:n] = cols
            out = self.apply(full)[:n]
        return out[:, 0] if flat else out

    def apply_block_adjoint(self, psi: np.ndarray) -> np.ndarray:
        cols, flat = _as_columns(psi)
        n = self.target_dim
        if cols.shape[0] != n:
            raise BlockEncodingError(f"state length {cols.shape[0]} != {n}")
        if self._block_apply_adjoint is not None and self._dense is None:
            out = self._block_apply_adjoint(cols)
        else:
            full = np.zeros((self.total_dim, cols.shape[1]), dtype=complex)
            full[:n] = cols
            out = self.apply_adjoint(full)[:n]
        return out[:, 0] if flat else out

    def encoded(self) -> np.ndarray:
        """The matrix this encoding represents, ``alpha * block``."""
        return self.alpha * self.block()

    def embed_state(self, psi: np.ndarray) -> np.ndarray:
        """``|0>_anc ⊗ psi`` as a vector on the full space."""
        out = np.zeros(self.total_dim, dtype=complex)
        out[: self.target_dim] = psi
        return out

    def with_(self, **changes) -> "BlockEncoding":
        kw = dict(
            alpha=self.alpha,
            ancilla_dim=self.ancilla_dim,
            target_dim=self.target_dim,
            epsilon=self.epsilon,
            queries=self.queries,
            label=self.label,
            dense=self._dense,
            block_apply=self._block_apply,
            block_apply_adjoint=self._block_apply_adjoint,
            info=self.info,
        )
        kw.update(changes)
        return BlockEncoding(self._apply, self._apply_adjoint, **kw)

    def densify(self) -> "BlockEncoding":
        """Materialize the unitary once so later applications are single matmuls."""
        u = self.unitary
        return self.with_(dense=u)

    def is_unitary(self, tol: float = 1e-12) -> bool:
        u = self.unitary
        return float(np.linalg.norm(u.conj().T @ u - np.eye(self.total_dim), 2)) <= tol


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------


def from_dense(u: np.ndarray, *, alpha: float, ancilla_dim: int, epsilon: float = 0.0,
               label: str = "", queries: Mapping[str, int] | None = None) -> BlockEncoding:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1] or u.shape[0] % ancilla_dim:
        raise BlockEncodingError(f"bad unitary shape {u.shape} for ancilla_dim {ancilla_dim}")
    return BlockEncoding(
        lambda v: u @ v,
        lambda v: u.conj().T @ v,
        alpha=alpha,
        ancilla_dim=ancilla_dim,
        target_dim=u.shape[0] // ancilla_dim,
        epsilon=epsilon,
        label=label,
        dense=u,
        queries=queries,
    )


def from_unitary(u: np.ndarray, label: str = "") -> BlockEncoding:
    """A unitary is a ``(1, 1, 0)`` encoding of itself."""
    return from_dense(u, alpha=1.0, ancilla_dim=1, label=label)


def identity(n: int) -> BlockEncoding:
    return from_unitary(np.eye(n, dtype=complex), label="identity")


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    w = np.where(w < _CLIP, 0.0, w)
    return (v * np.sqrt(w)) @ v.conj().T


def dilate(target: np.ndarray, alpha: float, label: str = "dilation") -> BlockEncoding:
    """Exact encoding of ``target`` by unitary completion with one ancilla qubit."""
    a = np.asarray(target, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise BlockEncodingError(f"target must be square, got shape {a.shape}")
    if alpha <= 0:
        raise BlockEncodingError(f"alpha must be positive, got {alpha}")
    norm = float(np.linalg.norm(a, 2)) if a.size else 0.0
    if norm > alpha * (1 + 1e-12):
        raise BlockEncodingError(f"‖target‖ = {norm:.12g} exceeds alpha = {alpha:.12g}")
    n = a.shape[0]
    check_dim(2 * n, label)
    x = a / alpha
    eye = np.eye(n)
    left = _psd_sqrt(eye - x @ x.conj().T)
    right = _psd_sqrt(eye - x.conj().T @ x)
    u = np.block([[x, left], [right, -x.conj().T]])
    return from_dense(u, alpha=alpha, ancilla_dim=2, label=label)


def diagonal_encoding(values: np.ndarray, alpha: float | None = None,
                      label: str = "diagonal") -> BlockEncoding:
    """Matrix-free dilation of ``diag(values)``; identical to :func:`dilate` on diagonals."""
    vals = np.asarray(values, dtype=complex).ravel()
    peak = float(np.max(np.abs(vals))) if vals.size else 0.0
    if alpha is None:
        alpha = peak if peak > 0 else 1.0
    if peak > alpha * (1 + 1e-12):
        raise BlockEncodingError(f"max |entry| = {peak:.12g} exceeds alpha = {alpha:.12g}")
    x = vals / alpha
    s = np.sqrt(np.clip(1.0 - np.abs(x) ** 2, 0.0, None))
    n = vals.size

    def fwd(v: np.ndarray) -> np.ndarray:
        v0, v1 = v[:n], v[n:]
        return np.concatenate([x[:, None] * v0 + s[:, None] * v1,
                               s[:, None] * v0 - np.conj(x)[:, None] * v1])

    def adj(v: np.ndarray) -> np.ndarray:
        v0, v1 = v[:n], v[n:]
        return np.concatenate([np.conj(x)[:, None] * v0 + s[:, None] * v1,
                               s[:, None] * v0 - x[:, None] * v1])

    return BlockEncoding(fwd, adj, alpha=alpha, ancilla_dim=2, target_dim=n, label=label)


def verify_contract(be: BlockEncoding, target: np.ndarray) -> float:
    """Spectral-norm deviation ``‖target - alpha <0|U|0>‖``."""
    t = np.asarray(target, dtype=complex)
    if t.shape != (be.target_dim, be.target_dim):
        raise BlockEncodingError(f"target shape {t.shape} does not match target_dim {be.target_dim}")
    return float(np.linalg.norm(t - be.encoded(), 2))


# ---------------------------------------------------------------------------
# state preparation pairs
# ---------------------------------------------------------------------------


def unitary_with_first_column(v: np.ndarray) -> np.ndarray:
    """A Householder-based unitary whose first column is the unit vector ``v``."""
    v = np.asarray(v, dtype=complex).ravel()
    v = v / np.linalg.norm(v)
    phase = v[0] / abs(v[0]) if abs(v[0]) > 1e-300 else 1.0
    w = v * np.conj(phase)
    e0 = np.zeros_like(w)
    e0[0] = 1.0
    u = e0 - w
    nu = np.linalg.norm(u)
    h = np.eye(v.size, dtype=complex)
    if nu > 1e-15:
        u = u / nu
        h -= 2.0 * np.outer(u, u.conj())
    return phase * h


@dataclass(frozen=True)
class StatePrepPair:
    """``(P_L, P_R)`` with ``sum_j |y_j - beta c_j^* d_j| <= eps_sp``."""

    left_unitary: np.ndarray
    right_unitary: np.ndarray
    beta: float
    eps_sp: float
    weights: np.ndarray

    @property
    def dim(self) -> int:
        return self.left_unitary.shape[0]

    def prep_error(self) -> float:
        """Measured ``sum_j |y_j - beta c_j^* d_j|`` over the full ancilla space."""
        c = self.left_unitary[:, 0]
        d = self.right_unitary[:, 0]
        y = np.zeros(self.dim)
        y[: self.weights.size] = self.weights
        return float(np.sum(np.abs(y - self.beta * np.conj(c) * d)))


def make_state_prep(weights: Sequence[float] | np.ndarray, eps_sp: float = 0.0,
                    dim: int | None = None) -> StatePrepPair:
    """Prepare amplitudes ``sqrt(y_j / beta)``; one unitary serves as both halves."""
    y = np.asarray(weights, dtype=float).ravel()
    if y.size == 0 or np.any(y < 0) or not np.any(y > 0):
        raise BlockEncodingError("weights must be non-negative with at least one positive entry")
    if eps_sp < 0:
        raise BlockEncodingError("eps_sp must be non-negative")
    dim = y.size if dim is None else dim
    if dim < y.size:
        raise BlockEncodingError(f"ancilla dimension {dim} smaller than weight count {y.size}")
    beta = float(y.sum())
    amp = np.zeros(dim, dtype=complex)
    amp[: y.size] = np.sqrt(y / beta)
    u = unitary_with_first_column(amp)
    return StatePrepPair(u, u, beta, float(eps_sp), y)


# ---------------------------------------------------------------------------
# combinators
# ---------------------------------------------------------------------------


def pad_ancilla(be: BlockEncoding, ancilla_dim: int) -> BlockEncoding:
    """Enlarge the ancilla space by a direct sum with the identity."""
    if ancilla_dim == be.ancilla_dim:
        return be
    if ancilla_dim < be.ancilla_dim:
        raise BlockEncodingError("cannot shrink an ancilla register")
    cut = be.total_dim

    def fwd(v: np.ndarray) -> np.ndarray:
        out = v.copy()
        out[:cut] = be.apply(v[:cut])
        return out

    def adj(v: np.ndarray) -> np.ndarray:
        out = v.copy()
        out[:cut] = be.apply_adjoint(v[:cut])
        return out

    return BlockEncoding(fwd, adj, alpha=be.alpha, ancilla_dim=ancilla_dim,
                         target_dim=be.target_dim, epsilon=be.epsilon,
                         queries=be.queries, label=be.label,
                         block_apply=be.apply_block, block_apply_adjoint=be.apply_block_adjoint)


def normalized(be: BlockEncoding) -> BlockEncoding:
    """Reinterpret as a ``(1, a, eps/alpha)`` encoding of ``A / alpha``."""
    return be.with_(alpha=1.0, epsilon=be.epsilon / be.alpha)


def with_phase(be: BlockEncoding, phase: complex) -> BlockEncoding:
    """Encoding of ``phase * A`` obtained from the globally rephased unitary."""
    ph = complex(phase)
    if abs(abs(ph) - 1) > 1e-12:
        raise BlockEncodingError("phase must have unit modulus")
    dense = None if be._dense is None else ph * be._dense
    return BlockEncoding(lambda v: ph * be.apply(v), lambda v: np.conj(ph) * be.apply_adjoint(v),
                         alpha=be.alpha, ancilla_dim=be.ancilla_dim, target_dim=be.target_dim,
                         epsilon=be.epsilon, queries=be.queries, label=be.label, dense=dense,
                         block_apply=lambda p: ph * be.apply_block(p),
                         block_apply_adjoint=lambda p: np.conj(ph) * be.apply_block_adjoint(p))


def dagger(be: BlockEncoding) -> BlockEncoding:
    """Encoding of ``A^dagger`` from ``U^dagger``."""
    dense = None if be._dense is None else be._dense.conj().T
    return BlockEncoding(be.apply_adjoint, be.apply, alpha=be.alpha, ancilla_dim=be.ancilla_dim,
                         target_dim=be.target_dim, epsilon=be.epsilon, queries=be.queries,
                         label=f"{be.label}^dag", dense=dense,
                         block_apply=be.apply_block_adjoint, block_apply_adjoint=be.apply_block)


def lcu_combine(pair: StatePrepPair, terms: Sequence[BlockEncoding],
                phases: Sequence[complex] | None = None, label: str = "lcu") -> BlockEncoding:
    """``P_L^dag · SELECT · P_R`` encoding ``sum_j y_j phase_j A_j``.

    All terms must share ``target_dim`` and ``alpha``.  The declared error is
    ``alpha * eps_sp + sum_j y_j eps_j``, which never exceeds the textbook
    ``alpha * eps_sp + beta * max_j eps_j``.
    """
    if not terms:
        raise BlockEncodingError("need at least one term")
    if len(terms) > pair.weights.size:
        raise BlockEncodingError(f"{len(terms)} terms but only {pair.weights.size} weights")
    n = terms[0].target_dim
    alpha = terms[0].alpha
    for t in terms:
        if t.target_dim != n:
            raise BlockEncodingError("terms act on different target dimensions")
        if not math.isclose(t.alpha, alpha, rel_tol=1e-12):
            raise BlockEncodingError("terms must share a common alpha; normalize first")
    phases = [1.0] * len(terms) if phases is None else [complex(p) for p in phases]
    a = max(t.ancilla_dim for t in terms)
    padded = [pad_ancilla(t, a) for t in terms]
    b = pair.dim
    inner = a * n
    check_dim(b * inner, label)
    pl, pr = pair.left_unitary, pair.right_unitary

    def select(v: np.ndarray, adjoint: bool) -> np.ndarray:
        out = v.copy()
        for j, t in enumerate(padded):
            if adjoint:
                out[j] = np.conj(phases[j]) * t.apply_adjoint(v[j])
            else:
                out[j] = phases[j] * t.apply(v[j])
        return out

    def fwd(v: np.ndarray) -> np.ndarray:
        k = v.shape[1]
        w = (pr @ v.reshape(b, inner * k)).reshape(b, inner, k)
        w = select(w, False)
        return (pl.conj().T @ w.reshape(b, inner * k)).reshape(b * inner, k)

    def adj(v: np.ndarray) -> np.ndarray:
        k = v.shape[1]
        w = (pl @ v.reshape(b, inner * k)).reshape(b, inner, k)
        w = select(w, True)
        return (pr.conj().T @ w.reshape(b, inner * k)).reshape(b * inner, k)

    coef = np.conj(pl[: len(terms), 0]) * pr[: len(terms), 0] * np.asarray(phases)

    def blk(p: np.ndarray, adjoint: bool) -> np.ndarray:
        out = np.zeros_like(p)
        for c, t in zip(coef, terms):
            if abs(c) > 0:
                out += np.conj(c) * t.apply_block_adjoint(p) if adjoint else c * t.apply_block(p)
        return out

    y = pair.weights[: len(terms)]
    eps = alpha * pair.eps_sp + float(sum(w * t.epsilon for w, t in zip(y, terms)))
    queries = _merge_queries(*(t.queries for t in terms))
    return BlockEncoding(fwd, adj, alpha=alpha * pair.beta, ancilla_dim=b * a, target_dim=n,
                         epsilon=eps, queries=queries, label=label,
                         block_apply=lambda p: blk(p, False),
                         block_apply_adjoint=lambda p: blk(p, True))


def linear_combination(weights: Sequence[complex], terms: Sequence[BlockEncoding],
                       label: str = "lcu") -> BlockEncoding:
    """LCU of encodings with arbitrary scalings and complex weights.

    Each term is normalized to scaling 1 and its alpha folded into the
    state-preparation weights, so the result has ``alpha = sum |w_j| alpha_j``.
    """
    weights = [complex(w) for w in weights]
    keep = [(w, t) for w, t in zip(weights, terms) if abs(w) > 0]
    if not keep:
        raise BlockEncodingError("all weights vanish")
    mags = [abs(w) * t.alpha for w, t in keep]
    phases = [w / abs(w) for w, _ in keep]
    pair = make_state_prep(mags)
    return lcu_combine(pair, [normalized(t) for _, t in keep], phases, label=label)


def product(be_a: BlockEncoding, be_b: BlockEncoding, label: str = "product") -> BlockEncoding:
    """``(I_b ⊗ U_A)(I_a ⊗ U_B)`` encoding ``A B``; ancilla layout ``(anc_B, anc_A)``."""
    if be_a.target_dim != be_b.target_dim:
        raise BlockEncodingError("product of encodings with different target dimensions")
    n, aa, ab = be_a.target_dim, be_a.ancilla_dim, be_b.ancilla_dim
    check_dim(n * aa * ab, label)

    def apply_b(v: np.ndarray, adjoint: bool) -> np.ndarray:
        k = v.shape[1]
        w = v.reshape(ab, aa, n, k).transpose(0, 2, 1, 3).reshape(ab * n, aa * k)
        w = be_b.apply_adjoint(w) if adjoint else be_b.apply(w)
        return w.reshape(ab, n, aa, k).transpose(0, 2, 1, 3).reshape(-1, k)

    def apply_a(v: np.ndarray, adjoint: bool) -> np.ndarray:
        k = v.shape[1]
        w = v.reshape(ab, aa * n, k).transpose(1, 0, 2).reshape(aa * n, ab * k)
        w = be_a.apply_adjoint(w) if adjoint else be_a.apply(w)
        return w.reshape(aa * n, ab, k).transpose(1, 0, 2).reshape(-1, k)

    eps = be_a.alpha * be_b.epsilon + be_b.alpha * be_a.epsilon
    return BlockEncoding(
        lambda v: apply_a(apply_b(v, False), False),
        lambda v: apply_b(apply_a(v, True), True),
        alpha=be_a.alpha * be_b.alpha, ancilla_dim=aa * ab, target_dim=n, epsilon=eps,
        queries=_merge_queries(be_a.queries, be_b.queries), label=label,
        block_apply=lambda p: be_a.apply_block(be_b.apply_block(p)),
        block_apply_adjoint=lambda p: be_b.apply_block_adjoint(be_a.apply_block_adjoint(p)),
    )


def on_registers(be: BlockEncoding, dims: Sequence[int], axes: Sequence[int],
                 label: str | None = None) -> BlockEncoding:
    """Extend ``be`` to a multi-register system, acting on ``axes`` (in that order)."""
    dims = tuple(int(d) for d in dims)
    axes = tuple(int(a) for a in axes)
    if sorted(set(axes)) != sorted(axes) or any(a < 0 or a >= len(dims) for a in axes):
        raise BlockEncodingError(f"bad register axes {axes} for dims {dims}")
    sub = int(np.prod([dims[a] for a in axes]))
    if sub != be.target_dim:
        raise BlockEncodingError(f"registers {axes} have size {sub}, encoding acts on {be.target_dim}")
    rest_axes = [i for i in range(len(dims)) if i not in axes]
    full = int(np.prod(dims))
    if not rest_axes:
        return be
    a = be.ancilla_dim
    rest = full // sub
    perm = [0] + [1 + i for i in axes] + [1 + i for i in rest_axes]
    inv = np.argsort(perm)
    check_dim(a * full, label or be.label)

    def run(v: np.ndarray, adjoint: bool, anc: int, op) -> np.ndarray:
        k = v.shape[1]
        w = v.reshape((anc,) + dims + (k,)).transpose(perm + [len(dims) + 1])
        shape = w.shape
        w = op(w.reshape(anc * sub, rest * k))
        w = w.reshape(shape).transpose(list(inv) + [len(dims) + 1])
        return w.reshape(anc * full, k)

    return BlockEncoding(lambda v: run(v, False, a, be.apply),
                         lambda v: run(v, True, a, be.apply_adjoint), alpha=be.alpha,
                         ancilla_dim=a, target_dim=full, epsilon=be.epsilon, queries=be.queries,
                         label=label or be.label,
                         block_apply=lambda p: run(p, False, 1, be.apply_block),
                         block_apply_adjoint=lambda p: run(p, True, 1, be.apply_block_adjoint))


def kron(be_a: BlockEncoding, be_b: BlockEncoding, label: str = "kron") -> BlockEncoding:
    """Encoding of ``A ⊗ B`` as a product of the two register-extended encodings."""
    dims = (be_a.target_dim, be_b.target_dim)
    return product(on_registers(be_a, dims, [0]), on_registers(be_b, dims, [1]), label=label)


def rescaled(be: BlockEncoding, alpha: float) -> BlockEncoding:
    """The same target with a larger scaling factor (one extra ancilla qubit)."""
    if alpha < be.alpha * (1 - 1e-12):
        raise BlockEncodingError(f"cannot lower alpha from {be.alpha} to {alpha}")
    if math.isclose(alpha, be.alpha, rel_tol=1e-14):
        return be
    shrink = diagonal_encoding(np.full(be.target_dim, be.alpha / alpha), alpha=1.0)
    out = product(be, shrink, label=be.label)
    return out.with_(alpha=alpha, epsilon=be.epsilon * alpha / be.alpha)


def hermitize(be: BlockEncoding) -> BlockEncoding:
    """Hermitian unitary encoding of a Hermitian target.

    Uses ``(H ⊗ I)(|0><1| ⊗ U + |1><0| ⊗ U^dag)(H ⊗ I)``, whose corner is
    ``(A + A^dag) / (2 alpha)``.  Needed wherever a qubitization walk is formed.
    """
    m = be.total_dim

    def run(v: np.ndarray) -> np.ndarray:
        v0, v1 = v[:m], v[m:]
        p, q = (v0 + v1) / math.sqrt(2), (v0 - v1) / math.sqrt(2)
        top, bottom = be.apply(q), be.apply_adjoint(p)
        return np.concatenate([(top + bottom) / math.sqrt(2), (top - bottom) / math.sqrt(2)])

    def blk(p: np.ndarray) -> np.ndarray:
        return (be.apply_block(p) + be.apply_block_adjoint(p)) / 2

    return BlockEncoding(run, run, alpha=be.alpha, ancilla_dim=2 * be.ancilla_dim,
                         target_dim=be.target_dim, epsilon=be.epsilon,
                         queries=_merge_queries(be.queries, scale=1), label=f"herm({be.label})",
                         block_apply=blk, block_apply_adjoint=blk)


def is_hermitian_unitary(be: BlockEncoding, tol: float = 1e-10) -> bool:
    u = be.unitary
    return float(np.max(np.abs(u - u.conj().T))) <= tol
