"""Minimal-setting verification protocols for bipartite pure states and two-qubit gates."""

from . import canon2q, efmis, gateprotocol, idsets, matkernel, prodgeom, simulator, stateverify
from .errors import QVKError

__all__ = [
    "QVKError",
    "canon2q",
    "efmis",
    "gateprotocol",
    "idsets",
    "matkernel",
    "prodgeom",
    "simulator",
    "stateverify",
]
__version__ = "0.1.0"
