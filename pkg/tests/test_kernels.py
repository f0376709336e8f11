import importlib
import os
import subprocess
import sys

import numpy as np
import pytest

from liouvsim import _fdcore_py, kernels

try:
    from liouvsim import _fdcore
except ImportError:  # pragma: no cover - build without a compiler
    _fdcore = None

needs_ext = pytest.mark.skipif(_fdcore is None, reason="compiled kernels not built")


@needs_ext
def test_backends_agree_on_stencil():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(3, 11, 4)) + 1j * rng.normal(size=(3, 11, 4))
    coef = np.array([-1 / 60, 3 / 20, -3 / 4, 0, 3 / 4, -3 / 20, 1 / 60])
    offs = np.arange(-3, 4, dtype=np.int64)
    np.testing.assert_allclose(_fdcore.stencil_apply(a, coef, offs, 2.0),
                               _fdcore_py.stencil_apply(a, coef, offs, 2.0), atol=1e-13)


@needs_ext
def test_backends_agree_on_boltzmann():
    rng = np.random.default_rng(4)
    e, o = rng.normal(size=500) * 30, rng.normal(size=500)
    assert _fdcore.boltzmann_average(e, o, 0.7) == pytest.approx(_fdcore_py.boltzmann_average(e, o, 0.7), rel=1e-12)


def test_stencil_apply_any_axis():
    rng = np.random.default_rng(5)
    v = rng.normal(size=(4, 5, 6))
    coef, offs = np.array([-0.5, 0, 0.5]), np.array([-1, 0, 1])
    out = kernels.stencil_apply(v, 1, coef, offs, 0.5)
    ref = (np.roll(v, -1, axis=1) - np.roll(v, 1, axis=1)) / 2 / 0.5
    np.testing.assert_allclose(out, ref, atol=1e-13)


def test_boltzmann_average_trivial():
    # [TRIVIAL] equal energies give the plain mean; large spread picks the minimum
    assert kernels.boltzmann_average(np.zeros(4), np.arange(4.0), 1.0) == pytest.approx(1.5)
    assert kernels.boltzmann_average(np.array([0.0, 1e4]), np.array([2.0, 7.0]), 1.0) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        kernels.boltzmann_average(np.zeros(2), np.zeros(2), 0.0)


def test_pure_python_switch():
    code = "from liouvsim import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, LIOUVSIM_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
    assert kernels.BACKEND in ("cython", "python")
