"""Block-encoded Liouvillian molecular dynamics and alchemical free energies, emulated with dense linear algebra."""

from . import bea, cost, electronic, groundstate, kernels, liouvillian, oracle, phasespace, qsvt, thermo
from ._config import DimensionCapError, max_dim
from .bea import BlockEncoding, verify_contract
from .kernels import BACKEND
from .liouvillian import evolve, full_liouvillian
from .phasespace import KvNState, PhaseSpaceSpec

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BlockEncoding",
    "DimensionCapError",
    "KvNState",
    "PhaseSpaceSpec",
    "bea",
    "cost",
    "electronic",
    "evolve",
    "full_liouvillian",
    "groundstate",
    "kernels",
    "liouvillian",
    "max_dim",
    "oracle",
    "phasespace",
    "qsvt",
    "thermo",
    "verify_contract",
]
