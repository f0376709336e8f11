import numpy as np
import pytest


def random_hermitian(rng, n, norm=None):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    h = (a + a.conj().T) / 2
    if norm is not None:
        h *= norm / np.linalg.norm(h, 2)
    return h


def random_matrix(rng, n, norm=None):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    if norm is not None:
        a *= norm / np.linalg.norm(a, 2)
    return a


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def toy_pair(charges=(1.0, 2.0), masses=(1.0, 1.0), well=0.0, electronic=True, **grid):
    """The one-nucleus 1D alchemical pair (NVT, g_x=g_p=6, g_s=g_ps=4, B=3)."""
    from liouvsim import electronic as el
    from liouvsim import phasespace as ps
    from liouvsim import thermo as th

    base = dict(N=1, ensemble="NVT", g_x=6, g_p=6, g_s=4, g_ps=4, h_x=0.25, h_p=0.5,
                d_x=1, d_p=1, d_s=1, d_ps=1, T=1.0, Q=1.0, well_charge=well, well_center=0.75)
    base.update(grid)
    es = el.ElectronicSpec(n_planewaves=3, h_el=0.5, mode="exact") if electronic else None
    sys_ = [th.System(ps.PhaseSpaceSpec(charges=(z,), masses=(m,), **base), es) for z, m in zip(charges, masses)]
    return th.AlchemicalPair(*sys_)


def toy_state(pair):
    from liouvsim import phasespace as ps

    return ps.KvNState.gaussian(pair.spec, {"x0": 0.5, "p0": 0.0, "s": 1.0, "ps": 0.0},
                                {"x0": 0.4, "p0": 0.6, "s": 0.4, "ps": 0.6})
