"""Compiled vs NumPy kernels on phase-space sized arrays.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from liouvsim import _fdcore_py as py
from liouvsim.phasespace import stencil

try:
    from liouvsim import _fdcore as cy
except ImportError:  # extension not built
    cy = None


def cases(rng):
    for shape in [(1, 64, 64), (64, 16, 64), (256, 32, 256)]:
        a = rng.normal(size=shape) + 1j * rng.normal(size=shape)
        yield f"stencil {shape}", "stencil_apply", a
    for n in (10_000, 1_000_000):
        yield f"boltzmann n={n}", "boltzmann_average", (rng.normal(size=n), rng.normal(size=n))


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    st = stencil(3)
    coef, offs = st.coefficients, st.offsets.astype(np.int64)
    print(f"{'case':28s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speedup':>8s}  max|diff|")
    for name, fn, data in cases(rng):
        if fn == "stencil_apply":
            calls = {m: (lambda m=m: m.stencil_apply(data, coef, offs, 2.0)) for m in (py, cy) if m}
        else:
            calls = {m: (lambda m=m: m.boltzmann_average(data[0], data[1], 0.7)) for m in (py, cy) if m}
        t = {m: min(timeit.repeat(f, number=1, repeat=args.repeat)) * 1e3 for m, f in calls.items()}
        if cy is None:
            print(f"{name:28s} {t[py]:12.3f} {'n/a':>12s}")
            continue
        diff = np.max(np.abs(np.asarray(calls[py]()) - np.asarray(calls[cy]())))
        print(f"{name:28s} {t[py]:12.3f} {t[cy]:12.3f} {t[py] / t[cy]:8.2f}  {diff:.1e}")


if __name__ == "__main__":
    main()
