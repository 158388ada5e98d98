"""Perfect function transfer and path interference in engineered boson chains."""

from .fock import Capped, FixedTotal, MaxTotal, enumerate_basis
from .functions import MonomialFunction, parse_function
from .interference import PathLattice, interference_factor, run_interference
from .model import ChainSpec, Displacement, DownConversion, Squeezing
from .transfer import (
    mirror_target,
    run_dressed_transfer,
    run_repulsion_transfer,
    run_transfer,
    signature,
)

__version__ = "0.1.0"

__all__ = [
    "Capped",
    "ChainSpec",
    "Displacement",
    "DownConversion",
    "FixedTotal",
    "MaxTotal",
    "MonomialFunction",
    "PathLattice",
    "Squeezing",
    "enumerate_basis",
    "interference_factor",
    "mirror_target",
    "parse_function",
    "run_dressed_transfer",
    "run_interference",
    "run_repulsion_transfer",
    "run_transfer",
    "signature",
]
