"""Numerical toolkit for nonlinear stochastic time-fractional diffusion equations on the line."""

from .errors import AccuracyError, DivergenceError, DomainError, FracSPDEError, UnsupportedDistributionError
from .green import FractionalIndex, GreenKind
from .specfun import EvalPolicy, mainardi, mittag_leffler

__all__ = [
    "AccuracyError",
    "DivergenceError",
    "DomainError",
    "EvalPolicy",
    "FracSPDEError",
    "FractionalIndex",
    "GreenKind",
    "UnsupportedDistributionError",
    "mainardi",
    "mittag_leffler",
]
