"""Finite-truncation laboratory for semicrossed products of operator algebras."""

__version__ = "0.1.0"

from .errors import (ConfigError, InsufficientWindow, InvalidAlgebra, InvalidParameter,
                     LabelError, LabError, NotInAlgebra, Unsupported, UnknownName)
from .fock import TruncatedFock, enumerate_basis
from .linops import Operator, SpanBasis, compare_spans, nullspace
from .dynamics import DynSystem, RowOperator, gallery

__all__ = [
    "__version__", "ConfigError", "InsufficientWindow", "InvalidAlgebra", "InvalidParameter",
    "LabelError", "LabError", "NotInAlgebra", "Unsupported", "UnknownName",
    "TruncatedFock", "enumerate_basis", "Operator", "SpanBasis", "compare_spans", "nullspace",
    "DynSystem", "RowOperator", "gallery",
]
