"""Effective operators of Z-problems and their network applications."""

from __future__ import annotations

from . import blockop, formats, hodge, lattice, network, numkit, verify, zproblem
from .errors import (
    ComputationError,
    ConditionViolation,
    ConnectivityError,
    DimensionError,
    EffopError,
    HypothesisViolation,
    InputError,
    NumericalFailure,
    ParseError,
    PreconditionError,
    UnsolvableError,
)
from .numkit import DEFAULT_TOLERANCES, Subspace, Tolerances

__version__ = "0.1.0"

__all__ = [
    "blockop",
    "formats",
    "verify",
    "hodge",
    "lattice",
    "network",
    "numkit",
    "zproblem",
    "Subspace",
    "Tolerances",
    "DEFAULT_TOLERANCES",
    "EffopError",
    "InputError",
    "DimensionError",
    "ParseError",
    "ComputationError",
    "NumericalFailure",
    "HypothesisViolation",
    "ConditionViolation",
    "UnsolvableError",
    "ConnectivityError",
    "PreconditionError",
]
