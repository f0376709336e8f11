"""Discretized nuclear phase space and the classical Liouvillian.

The state vector is laid out as ``[x registers | p' registers | s | p_s]`` with
one register per (nucleus, Cartesian component).  A register of size ``g`` and
spacing ``h`` holds the values ``(k - origin) * h`` for ``k = 0..g-1``; all
shifts wrap periodically.  The bath coordinate enters every denominator as
``s + s_min`` and ``k_B = 1``.
"""

from __future__ import annotations

import decimal
import math
from dataclasses import dataclass, field, fields, replace
from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from . import bea, kernels
from ._config import check_dim

NVT = "NVT"
NVE = "NVE"


class PhaseSpaceError(ValueError):
    pass


@dataclass(frozen=True)
class PhaseSpaceSpec:
    N: int = 1
    spatial_dim: int = 1
    g_x: int = 8
    h_x: float = 1.0
    d_x: int = 1
    g_p: int = 8
    h_p: float = 1.0
    d_p: int = 1
    g_s: int = 4
    h_s: float = 0.5
    d_s: int = 1
    g_ps: int = 4
    h_ps: float = 0.5
    d_ps: int = 1
    masses: tuple[float, ...] = (1.0,)
    charges: tuple[float, ...] = (1.0,)
    delta: float = 1.0
    Q: float = 1.0
    T: float = 1.0
    N_f: float = 1.0
    s_min: float = 0.5
    ensemble: str = NVT
    # optional fixed attracting charge acting on every nucleus
    well_charge: float = 0.0
    well_center: float = 0.0
    # index offsets; None selects 0 for x and s and the grid centre for momenta
    origin_x: float | None = None
    origin_p: float | None = None
    origin_s: float | None = None
    origin_ps: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "masses", tuple(float(m) for m in np.atleast_1d(self.masses)))
        object.__setattr__(self, "charges", tuple(float(z) for z in np.atleast_1d(self.charges)))
        object.__setattr__(self, "ensemble", str(self.ensemble).upper())
        self.validate()

    def validate(self) -> None:
        if self.N < 1:
            raise PhaseSpaceError("need at least one nucleus")
        if self.spatial_dim not in (1, 3):
            raise PhaseSpaceError(f"spatial_dim must be 1 or 3, got {self.spatial_dim}")
        if self.ensemble not in (NVT, NVE):
            raise PhaseSpaceError(f"ensemble must be NVT or NVE, got {self.ensemble}")
        if len(self.masses) != self.N or len(self.charges) != self.N:
            raise PhaseSpaceError("masses and charges need one entry per nucleus")
        if min(self.masses) <= 0:
            raise PhaseSpaceError("masses must be positive")
        if min(self.charges) < 0:
            raise PhaseSpaceError("charges must be non-negative")
        if self.delta <= 0:
            raise PhaseSpaceError("Coulomb softening must be positive")
        names = ["x", "p"] + (["s", "ps"] if self.ensemble == NVT else [])
        for v in names:
            g, h, d = self.grid(v)
            if g < 3 or h <= 0 or not 1 <= d <= (g - 1) // 2:
                raise PhaseSpaceError(f"bad grid for {v}: g={g}, h={h}, d={d}")
        if self.ensemble == NVT:
            if self.Q <= 0 or self.T <= 0 or self.N_f <= 0:
                raise PhaseSpaceError("Q, T and N_f must be positive")
            if np.min(self.values("s")) + self.s_min <= 0:
                raise PhaseSpaceError("shifted s grid must be strictly positive")

    @property
    def is_nvt(self) -> bool:
        return self.ensemble == NVT

    def grid(self, variable: str) -> tuple[int, float, int]:
        return (getattr(self, f"g_{variable}"), getattr(self, f"h_{variable}"),
                getattr(self, f"d_{variable}"))

    def origin(self, variable: str) -> float:
        o = getattr(self, f"origin_{variable}")
        if o is not None:
            return float(o)
        g = getattr(self, f"g_{variable}")
        return (g - 1) / 2 if variable in ("p", "ps") else 0.0

    def values(self, variable: str) -> np.ndarray:
        g, h, _ = self.grid(variable)
        return (np.arange(g) - self.origin(variable)) * h

    def with_(self, **changes) -> "PhaseSpaceSpec":
        return replace(self, **changes)

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


@dataclass(frozen=True)
class Axis:
    variable: str
    n: int
    j: int
    size: int


@dataclass(frozen=True)
class Layout:
    axes: tuple[Axis, ...]

    @classmethod
    def of(cls, spec: PhaseSpaceSpec) -> "Layout":
        axes = []
        for var, g in (("x", spec.g_x), ("p", spec.g_p)):
            for n in range(spec.N):
                for j in range(spec.spatial_dim):
                    axes.append(Axis(var, n, j, g))
        if spec.is_nvt:
            axes.append(Axis("s", 0, 0, spec.g_s))
            axes.append(Axis("ps", 0, 0, spec.g_ps))
        return cls(tuple(axes))

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(a.size for a in self.axes)

    @property
    def size(self) -> int:
        return int(np.prod(self.dims))

    def index(self, variable: str, n: int = 0, j: int = 0) -> int:
        for i, a in enumerate(self.axes):
            if (a.variable, a.n, a.j) == (variable, n, j):
                return i
        raise PhaseSpaceError(f"no register for {variable}[{n},{j}]")

    def has(self, variable: str) -> bool:
        return any(a.variable == variable for a in self.axes)


def mesh(spec: PhaseSpaceSpec, variable: str, n: int = 0, j: int = 0) -> np.ndarray:
    """Grid values of one register broadcast against the full layout."""
    lay = Layout.of(spec)
    ax = lay.index(variable, n, j)
    shape = [1] * len(lay.dims)
    shape[ax] = lay.dims[ax]
    return spec.values(variable).reshape(shape)


@dataclass
class KvNState:
    amplitudes: np.ndarray
    layout: Layout

    def __post_init__(self) -> None:
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).ravel()
        if self.amplitudes.size != self.layout.size:
            raise PhaseSpaceError(f"{self.amplitudes.size} amplitudes for layout of size {self.layout.size}")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def density(self) -> np.ndarray:
        return (np.abs(self.amplitudes) ** 2).reshape(self.layout.dims)

    def marginal(self, variable: str, n: int = 0, j: int = 0) -> np.ndarray:
        ax = self.layout.index(variable, n, j)
        rho = self.density()
        other = tuple(i for i in range(rho.ndim) if i != ax)
        return rho.sum(axis=other)

    def expectation(self, spec: PhaseSpaceSpec, variable: str, n: int = 0, j: int = 0) -> float:
        m = self.marginal(variable, n, j)
        return float(np.dot(m, spec.values(variable)) / m.sum())

    def replace_amplitudes(self, amplitudes: np.ndarray) -> "KvNState":
        return KvNState(amplitudes, self.layout)

    @classmethod
    def gaussian(cls, spec: PhaseSpaceSpec, centers: dict[str, float],
                 widths: dict[str, float]) -> "KvNState":
        """Normalized ``sqrt`` of a product Gaussian density.

        Keys are register names such as ``"x0"``, ``"p1"``, ``"s"`` or ``"ps"``
        (component suffix ``"x0_2"`` in 3D).  Registers without a width are
        put on the grid point nearest to the centre (default 0).
        """
        lay = Layout.of(spec)
        amp = np.ones(lay.dims)
        for i, a in enumerate(lay.axes):
            key = _axis_key(a, spec.spatial_dim)
            vals = spec.values(a.variable)
            c = float(centers.get(key, 0.0))
            w = widths.get(key)
            if w is None or w <= 0:
                prof = np.zeros(a.size)
                prof[int(np.argmin(np.abs(vals - c)))] = 1.0
            else:
                prof = np.exp(-((vals - c) ** 2) / (4 * w * w))
            shape = [1] * len(lay.dims)
            shape[i] = a.size
            amp = amp * prof.reshape(shape)
        amp = amp.ravel().astype(complex)
        return cls(amp / np.linalg.norm(amp), lay)


def _axis_key(a: Axis, spatial_dim: int) -> str:
    if a.variable in ("s", "ps"):
        return a.variable
    return f"{a.variable}{a.n}" + (f"_{a.j}" if spatial_dim > 1 else "")


# ---------------------------------------------------------------------------
# finite differences
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FDStencil:
    order: int
    coefficients: np.ndarray = field(repr=False)
    exact: tuple = field(default=(), repr=False)

    @property
    def offsets(self) -> np.ndarray:
        return np.arange(-self.order, self.order + 1)

    @property
    def l1(self) -> float:
        return float(np.sum(np.abs(self.coefficients)))


def stencil(d: int) -> FDStencil:
    """Central first-derivative weights on ``2d+1`` points.

    Solves the Vandermonde system ``sum_k c_k k^m = [m == 1]`` exactly in
    rational arithmetic, so the stencil differentiates every polynomial of
    degree ``<= 2d`` without error.
    """
    if d < 1:
        raise PhaseSpaceError("stencil order must be >= 1")
    ks = list(range(-d, d + 1))
    size = len(ks)
    rows = [[Fraction(k) ** m for k in ks] + [Fraction(int(m == 1))] for m in range(size)]
    for col in range(size):
        piv = next(r for r in range(col, size) if rows[r][col] != 0)
        rows[col], rows[piv] = rows[piv], rows[col]
        inv = 1 / rows[col][col]
        rows[col] = [x * inv for x in rows[col]]
        for r in range(size):
            if r != col and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[col])]
    exact = tuple(rows[i][-1] for i in range(size))
    return FDStencil(d, np.array([float(c) for c in exact]), exact)


def derivative_matrix(g: int, h: float, d: int) -> np.ndarray:
    """Periodic circulant ``(D f)_i = (1/h) sum_k c_k f_{i+k}`` on one register."""
    st = stencil(d)
    m = np.zeros((g, g))
    for c, k in zip(st.coefficients, st.offsets):
        for i in range(g):
            m[i, (i + k) % g] += c / h
    return m


def apply_derivative(values: np.ndarray, axis: int, g_h_d: tuple[int, float, int]) -> np.ndarray:
    """Apply the periodic stencil along ``axis`` of a gridded array (compiled kernel)."""
    _, h, d = g_h_d
    st = stencil(d)
    return kernels.stencil_apply(values, axis, st.coefficients, st.offsets, h)


def _check_variable(spec: PhaseSpaceSpec, variable: str) -> None:
    if variable not in ("x", "p", "s", "ps"):
        raise PhaseSpaceError(f"unknown variable {variable!r}")
    if variable in ("s", "ps") and not spec.is_nvt:
        raise PhaseSpaceError(f"{variable} exists only in NVT mode")


def _embed(spec: PhaseSpaceSpec, axis: int, op: sp.spmatrix) -> sp.csr_matrix:
    dims = Layout.of(spec).dims
    out = sp.identity(1, format="csr")
    for i, g in enumerate(dims):
        out = sp.kron(out, op if i == axis else sp.identity(g, format="csr"), format="csr")
    return out


def derivative_operator(spec: PhaseSpaceSpec, variable: str, n: int = 0, j: int = 0,
                        full: bool = True):
    """``D`` for one register; sparse on the full layout, or the ``g x g`` circulant."""
    _check_variable(spec, variable)
    lay = Layout.of(spec)
    axis = lay.index(variable, n, j)
    g, h, d = spec.grid(variable)
    m = derivative_matrix(g, h, d)
    return _embed(spec, axis, sp.csr_matrix(m)) if full else m


# ---------------------------------------------------------------------------
# Hamiltonian pieces and partial derivatives
# ---------------------------------------------------------------------------


def _shifted_s(spec: PhaseSpaceSpec) -> np.ndarray:
    return mesh(spec, "s") + spec.s_min


def _full(spec: PhaseSpaceSpec, a: np.ndarray | float) -> np.ndarray:
    return np.broadcast_to(np.asarray(a, dtype=float), Layout.of(spec).dims).copy()


def kinetic_values(spec: PhaseSpaceSpec) -> np.ndarray:
    """``sum_{n,j} p'^2 / (2 m_n (s+s_min)^2)``; the bath factor is 1 in NVE."""
    total = 0.0
    for n in range(spec.N):
        for j in range(spec.spatial_dim):
            total = total + mesh(spec, "p", n, j) ** 2 / (2 * spec.masses[n])
    if spec.is_nvt:
        total = total / _shifted_s(spec) ** 2
    return _full(spec, total)


def _separation_sq(spec: PhaseSpaceSpec, n: int, m: int):
    return sum((mesh(spec, "x", n, j) - mesh(spec, "x", m, j)) ** 2 for j in range(spec.spatial_dim))


def _well_separation_sq(spec: PhaseSpaceSpec, n: int):
    return sum((mesh(spec, "x", n, j) - spec.well_center) ** 2 for j in range(spec.spatial_dim))


def potential_values(spec: PhaseSpaceSpec) -> np.ndarray:
    """Softened Coulomb repulsion of all nucleus pairs plus the optional well."""
    total = 0.0
    Z = spec.charges
    d2 = spec.delta ** 2
    for n in range(spec.N):
        for m in range(n + 1, spec.N):
            total = total + Z[n] * Z[m] / np.sqrt(_separation_sq(spec, n, m) + d2)
        if spec.well_charge:
            total = total - Z[n] * spec.well_charge / np.sqrt(_well_separation_sq(spec, n) + d2)
    return _full(spec, total)


def bath_values(spec: PhaseSpaceSpec) -> np.ndarray:
    """``p_s^2 / 2Q + N_f T ln(s + s_min)`` (zero in NVE)."""
    if not spec.is_nvt:
        return _full(spec, 0.0)
    return _full(spec, mesh(spec, "ps") ** 2 / (2 * spec.Q)
                 + spec.N_f * spec.T * np.log(_shifted_s(spec)))


def classical_hamiltonian_values(spec: PhaseSpaceSpec) -> np.ndarray:
    return kinetic_values(spec) + potential_values(spec) + bath_values(spec)


@dataclass
class ClassicalPartials:
    """Diagonal entries (over the full layout) of every partial derivative of ``H_cl``."""
    dx: dict[tuple[int, int], np.ndarray]
    dp: dict[tuple[int, int], np.ndarray]
    ds: np.ndarray | None
    dps: np.ndarray | None


def classical_partials(spec: PhaseSpaceSpec) -> ClassicalPartials:
    Z = spec.charges
    d2 = spec.delta ** 2
    dx, dp = {}, {}
    for n in range(spec.N):
        for j in range(spec.spatial_dim):
            f = 0.0
            for m in range(spec.N):
                if m == n:
                    continue
                r = mesh(spec, "x", n, j) - mesh(spec, "x", m, j)
                f = f - Z[n] * Z[m] * r / (_separation_sq(spec, n, m) + d2) ** 1.5
            if spec.well_charge:
                r = mesh(spec, "x", n, j) - spec.well_center
                f = f + Z[n] * spec.well_charge * r / (_well_separation_sq(spec, n) + d2) ** 1.5
            dx[(n, j)] = _full(spec, f)
            v = mesh(spec, "p", n, j) / spec.masses[n]
            if spec.is_nvt:
                v = v / _shifted_s(spec) ** 2
            dp[(n, j)] = _full(spec, v)
    ds = dps = None
    if spec.is_nvt:
        s = _shifted_s(spec)
        kin = 0.0
        for n in range(spec.N):
            for j in range(spec.spatial_dim):
                kin = kin + mesh(spec, "p", n, j) ** 2 / spec.masses[n]
        ds = _full(spec, -kin / s ** 3 + spec.N_f * spec.T / s)
        dps = _full(spec, mesh(spec, "ps") / spec.Q)
    return ClassicalPartials(dx, dp, ds, dps)


# ---------------------------------------------------------------------------
# block encodings
# ---------------------------------------------------------------------------


def _shift_encoding(dims: Sequence[int], axis: int, k: int) -> bea.BlockEncoding:
    """Unitary ``f(i) -> f(i + k)`` along ``axis`` (a periodic register shift)."""
    n = int(np.prod(dims))

    def run(v: np.ndarray, step: int) -> np.ndarray:
        c = v.shape[1]
        w = v.reshape(tuple(dims) + (c,))
        return np.roll(w, -step, axis=axis).reshape(n, c)

    return bea.BlockEncoding(lambda v: run(v, k), lambda v: run(v, -k), alpha=1.0, ancilla_dim=1,
                             target_dim=n, label=f"shift[{axis}]{k:+d}",
                             block_apply=lambda v: run(v, k),
                             block_apply_adjoint=lambda v: run(v, -k))


def derivative_encoding(spec: PhaseSpaceSpec, variable: str, n: int = 0, j: int = 0) -> bea.BlockEncoding:
    """LCU of periodic shifts encoding ``D`` with ``alpha = sum_k |c_k| / h``."""
    _check_variable(spec, variable)
    lay = Layout.of(spec)
    axis = lay.index(variable, n, j)
    g, h, d = spec.grid(variable)
    st = stencil(d)
    keep = [(c, int(k)) for c, k in zip(st.coefficients, st.offsets) if c != 0]
    pair = bea.make_state_prep([abs(c) / h for c, _ in keep])
    terms = [_shift_encoding(lay.dims, axis, k) for _, k in keep]
    phases = [np.sign(c) for c, _ in keep]
    return bea.lcu_combine(pair, terms, phases, label=f"D_{variable}{n}{j}")


def _diag_times_derivative(spec: PhaseSpaceSpec, diag: np.ndarray, variable: str, n: int, j: int,
                           label: str) -> bea.BlockEncoding:
    d_be = derivative_encoding(spec, variable, n, j)
    f_be = bea.diagonal_encoding(diag.ravel(), label=f"diag[{label}]")
    return bea.product(d_be, f_be, label=label)


def _liouvillian_terms(spec: PhaseSpaceSpec):
    """``(weight, diag, variable, n, j)`` with ``L = sum weight * D_variable diag``."""
    part = classical_partials(spec)
    terms = []
    for n in range(spec.N):
        for j in range(spec.spatial_dim):
            terms.append((-1j, part.dp[(n, j)], "x", n, j))
            terms.append((1j, part.dx[(n, j)], "p", n, j))
    if spec.is_nvt:
        terms.append((-1j, part.dps, "s", 0, 0))
        terms.append((1j, part.ds, "ps", 0, 0))
    return [t for t in terms if np.max(np.abs(t[1])) > 0]


def classical_liouvillian_dense(spec: PhaseSpaceSpec) -> sp.csr_matrix:
    """Sparse assembly of ``L_cl`` straight from Kronecker products."""
    lay = Layout.of(spec)
    check_dim(lay.size, "classical Liouvillian")
    out = sp.csr_matrix((lay.size, lay.size), dtype=complex)
    for w, diag, var, n, j in _liouvillian_terms(spec):
        out = out + w * (derivative_operator(spec, var, n, j) @ sp.diags(diag.ravel()))
    return out


def classical_liouvillian_alpha(spec: PhaseSpaceSpec) -> float:
    """Exact ``l1`` scaling: ``sum_terms max|partial| * sum_k |c_k| / h``."""
    total = 0.0
    for _, diag, var, _, _ in _liouvillian_terms(spec):
        g, h, d = spec.grid(var)
        total += float(np.max(np.abs(diag))) * stencil(d).l1 / h
    return total


def classical_liouvillian(spec: PhaseSpaceSpec, attach_target: bool = False) -> bea.BlockEncoding:
    """Block encoding of the NVT (or NVE) classical Liouvillian.

    Each term ``D_a ⊗ diag(f)`` acts on disjoint registers, so the two factors
    commute and every term is Hermitian after its ``±i`` weight.
    """
    terms = _liouvillian_terms(spec)
    lay = Layout.of(spec)
    if not terms:
        zero = bea.diagonal_encoding(np.zeros(lay.size), alpha=1.0, label="L_cl")
        return zero.with_(info={"alpha_nvt": 0.0})
    encs = [_diag_times_derivative(spec, diag, var, n, j, f"{var}{n}{j}")
            for _, diag, var, n, j in terms]
    be = bea.linear_combination([w for w, *_ in terms], encs, label="L_cl")
    info = {"alpha_nvt": be.alpha, "layout": lay}
    if attach_target:
        info["target"] = classical_liouvillian_dense(spec)
    return be.with_(info=info)


def kinetic_hamiltonian(spec: PhaseSpaceSpec) -> bea.BlockEncoding:
    vals = kinetic_values(spec).ravel()
    return bea.diagonal_encoding(vals, label="H_kin")


def potential_hamiltonian(spec: PhaseSpaceSpec) -> bea.BlockEncoding:
    vals = potential_values(spec).ravel()
    alpha = float(np.max(np.abs(vals))) or 1.0
    return bea.diagonal_encoding(vals, alpha=alpha, label="H_pot")


def grid_point_count(spec: PhaseSpaceSpec) -> int:
    return Layout.of(spec).size


def fd_error_model(h: float, d: int, wavenumber: float = 1.0) -> float:
    """``(e k h / 2)^{2d}`` scaling of the central-difference error."""
    return (math.e * wavenumber * h / 2) ** (2 * d)


def fd_convergence_scan(hs: Sequence[float], ds: Sequence[int], wavenumber: float = 1.0, points: int = 64,
                        precision: str = "double", dps: int = 40) -> list[dict]:
    """Sampled derivative error of the periodic stencil on ``sin(k x)``.

    ``k`` is adjusted so that the sine is periodic on the grid.  With
    ``precision="mp"`` samples and weights are evaluated in ``dps``-digit
    decimal arithmetic so that round-off does not mask high-order errors.  ``model`` is
    ``k^{2d+1} (e h / 2)^{2d}``, the derivative-weighted bound.
    """
    rows = []
    for d in ds:
        st = stencil(int(d))
        for h in hs:
            g = max(int(round(2 * math.pi / (wavenumber * h))), 2 * d + 1)
            k = 2 * math.pi / (g * h)
            if precision == "double":
                xg = np.arange(g) * h
                deriv = apply_derivative(np.sin(k * xg).astype(complex)[:, None], 0, (g, h, d))[:, 0].real
                err = float(np.max(np.abs(deriv - k * np.cos(k * xg))))
            elif precision == "mp":
                with decimal.localcontext() as ctx:
                    ctx.prec = dps
                    two_pi = 2 * _dec_pi()
                    hd = decimal.Decimal(h)
                    kd = two_pi / (g * hd)
                    coef = [decimal.Decimal(c.numerator) / c.denominator for c in st.exact]
                    err = decimal.Decimal(0)
                    for i in np.linspace(0, g - 1, min(points, g)).astype(int):
                        acc = sum(c * _dec_sin(two_pi * ((int(i) + int(o)) % g) / g) for c, o in zip(coef, st.offsets))
                        err = max(err, abs(acc / hd - kd * _dec_cos(two_pi * int(i) / g)))
                    err = float(err)
            else:
                raise PhaseSpaceError(f"unknown precision {precision!r}")
            rows.append({"d": int(d), "h": float(h), "wavenumber": k, "error": err,
                         "model": k ** (2 * d + 1) * (math.e * h / 2) ** (2 * d)})
    return rows


def _dec_pi() -> decimal.Decimal:
    """Pi to the current decimal precision (series from the ``decimal`` docs)."""
    decimal.getcontext().prec += 2
    three = decimal.Decimal(3)
    lasts, t, s, n, na, d, da = 0, three, 3, 1, 0, 0, 24
    while s != lasts:
        lasts = s
        n, na = n + na, na + 8
        d, da = d + da, da + 32
        t = (t * n) / d
        s += t
    decimal.getcontext().prec -= 2
    return +s


def _dec_series(x: decimal.Decimal, start: int) -> decimal.Decimal:
    # Taylor series of cos (start=0) or sin (start=1)
    decimal.getcontext().prec += 2
    term = x if start else decimal.Decimal(1)
    total, i, sign, fact, num = term, start, 1, 1, term
    lasts = None
    while total != lasts:
        lasts = total
        i += 2
        fact *= i * (i - 1)
        num *= x * x
        sign *= -1
        total += num / fact * sign
    decimal.getcontext().prec -= 2
    return +total


def _dec_sin(x: decimal.Decimal) -> decimal.Decimal:
    return _dec_series(x, 1)


def _dec_cos(x: decimal.Decimal) -> decimal.Decimal:
    return _dec_series(x, 0)


def fd_order_slope(rows: Sequence[dict]) -> tuple[float, float]:
    """Least-squares slope of ``log(error)`` against ``d`` and the model's slope at the same ``h`` and ``k``."""
    d = np.array([r["d"] for r in rows], dtype=float)
    le = np.log([r["error"] for r in rows])
    slope = float(np.polyfit(d, le, 1)[0])
    k, h = rows[0]["wavenumber"], rows[0]["h"]
    return slope, -2 * math.log(2 / (math.e * k * h))
