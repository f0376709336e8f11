"""Classical phase finding for symmetric quantum signal processing.

Convention: ``U(x) = e^{i p_0 Z} prod_j [W(x) e^{i p_j Z}]`` with
``W(x) = [[x, i sqrt(1-x^2)], [i sqrt(1-x^2), x]]``; the target is
``Re <0|U(x)|0>``.  Phases are symmetric (``p_j = p_{d-j}``), so only the first
half is solved for.  The solver is a Newton iteration started from
``(pi/4, 0, ..., 0, pi/4)`` with an analytic Jacobian built from prefix and
suffix products, followed by a residual check on a dense grid.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from numpy.polynomial import chebyshev as C

MAX_DEGREE = 2048
TOL = 1e-10


class PhaseFindingError(RuntimeError):
    pass


def _signal(x: np.ndarray) -> np.ndarray:
    s = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    w = np.empty((x.size, 2, 2), dtype=complex)
    w[:, 0, 0] = x
    w[:, 1, 1] = x
    w[:, 0, 1] = 1j * s
    w[:, 1, 0] = 1j * s
    return w


def _rot(phi: float) -> np.ndarray:
    return np.array([np.exp(1j * phi), np.exp(-1j * phi)])


def expand(reduced: np.ndarray, degree: int) -> np.ndarray:
    """Full symmetric phase vector of length ``degree + 1``."""
    r = np.asarray(reduced, dtype=float)
    if degree % 2:
        return np.concatenate([r, r[::-1]])
    return np.concatenate([r, r[-2::-1]])


def response(phases: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``<0|U(x)|0>`` for every point of ``x`` (complex)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    w = _signal(x)
    acc = np.broadcast_to(np.diag(_rot(phases[0])), (x.size, 2, 2)).copy()
    for p in phases[1:]:
        acc = acc @ w
        acc = acc * _rot(p)[None, None, :]
    return acc[:, 0, 0]


def _residual_and_jacobian(reduced: np.ndarray, degree: int, x: np.ndarray,
                           target: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    phases = expand(reduced, degree)
    w = _signal(x)
    m = x.size
    # prefix[j] = e^{ip0 Z} W e^{ip1 Z} ... W e^{ipj Z}
    prefix = np.empty((degree + 1, m, 2, 2), dtype=complex)
    prefix[0] = np.diag(_rot(phases[0]))
    for j in range(1, degree + 1):
        prefix[j] = (prefix[j - 1] @ w) * _rot(phases[j])[None, None, :]
    # suffix[j] = prod_{l>j} W e^{ipl Z}
    suffix = np.empty_like(prefix)
    suffix[degree] = np.eye(2)
    for j in range(degree - 1, -1, -1):
        suffix[j] = (w * _rot(phases[j + 1])[None, None, :]) @ suffix[j + 1]
    value = prefix[degree][:, 0, 0].real
    # d/dp_j <0|U|0> = i (P00 S00 - P01 S10)
    dfull = (1j * (prefix[:, :, 0, 0] * suffix[:, :, 0, 0]
                   - prefix[:, :, 0, 1] * suffix[:, :, 1, 0])).real.T
    k = reduced.size
    jac = np.zeros((m, k))
    for j in range(degree + 1):
        jac[:, min(j, degree - j)] += dfull[:, j]
    return value - target, jac


def _nodes(k: int) -> np.ndarray:
    return np.cos((2 * np.arange(1, k + 1) - 1) * np.pi / (4 * k))


@lru_cache(maxsize=256)
def _solve_cached(coef_key: tuple[float, ...], degree: int) -> tuple[float, ...]:
    coef = np.asarray(coef_key)
    k = degree // 2 + 1
    x = _nodes(k)
    target = C.chebval(x, coef)
    reduced = np.zeros(k)
    reduced[0] = np.pi / 4
    res, jac = _residual_and_jacobian(reduced, degree, x, target)
    err = np.max(np.abs(res))
    for _ in range(200):
        if err < 1e-14:
            break
        step = np.linalg.lstsq(jac, res, rcond=None)[0]
        t = 1.0
        while True:
            trial = reduced - t * step
            res_t, jac_t = _residual_and_jacobian(trial, degree, x, target)
            err_t = np.max(np.abs(res_t))
            if err_t < err or t < 1e-4:
                break
            t /= 2
        if err_t >= err:
            break
        reduced, res, jac, err = trial, res_t, jac_t, err_t
    return tuple(expand(reduced, degree))


def find_phases(coef: np.ndarray, parity: int) -> np.ndarray:
    """Symmetric phases realizing the real Chebyshev series ``coef``.

    ``parity`` is 0 or 1 and fixes the number of signal calls to the parity of
    the degree.  The reconstruction is checked to ``TOL`` on a dense grid.
    """
    coef = np.asarray(coef, dtype=float)
    degree = len(coef) - 1
    if degree % 2 != parity:
        coef = np.concatenate([coef, [0.0]])
        degree += 1
    if degree > MAX_DEGREE:
        raise PhaseFindingError(f"degree {degree} above cap {MAX_DEGREE}")
    wrong = coef[(1 - parity)::2]
    if np.any(np.abs(wrong) > 1e-12):
        raise PhaseFindingError("polynomial parity does not match the requested parity")
    clean = coef.copy()
    clean[(1 - parity)::2] = 0.0
    phases = np.asarray(_solve_cached(tuple(np.round(clean, 15)), degree))
    grid = np.cos(np.linspace(0, np.pi, 4 * degree + 21))
    err = float(np.max(np.abs(response(phases, grid).real - C.chebval(grid, clean))))
    if not np.isfinite(err) or err > TOL:
        raise PhaseFindingError(f"phase solve did not converge (max error {err:.3e}, degree {degree})")
    return phases


def to_reflection_convention(phases: np.ndarray) -> tuple[np.ndarray, complex]:
    """Rewrite ``W``-convention phases for the reflection ``[[x, s], [s, -x]]``.

    Returns the new phases and the global factor ``g`` such that
    ``P_W(x) = g * P_R(x)``.
    """
    p = np.asarray(phases, dtype=float).copy()
    d = p.size - 1
    if d == 0:
        return p, 1.0
    p[0] -= np.pi / 4
    p[-1] -= np.pi / 4
    p[1:-1] -= np.pi / 2
    return p, 1j**d
