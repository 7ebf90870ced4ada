"""Intertwining-operator partners of (possibly non-self-adjoint) matrices.

Submodules: ``linalg`` (dense primitives), ``intertwine`` (partner
construction and its certificates), ``riesz`` (Riesz bases, frames and
pseudo-hermiticity), ``models`` (oscillator, quons, pseudo-bosons) and
``cli``.
"""

from .errors import IntertwiningError
from .intertwine import EigenFamily, IntertwinePair, build_partners, map_eigenfamily
from .linalg import Tolerances
from .models import make_oscillator, make_pseudoboson, make_quon
from .riesz import RieszBasis, build_riesz

__version__ = "0.1.0"

__all__ = [
    "EigenFamily",
    "IntertwinePair",
    "IntertwiningError",
    "RieszBasis",
    "Tolerances",
    "build_partners",
    "build_riesz",
    "make_oscillator",
    "make_pseudoboson",
    "make_quon",
    "map_eigenfamily",
]
