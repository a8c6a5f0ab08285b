"""Entropies, Fisher information and weighted variance bounds for the Beta posterior of binary trials."""
from .errors import (
    ConvergenceError,
    DegenerateInformationError,
    DomainError,
    UnsupportedCombinationError,
    WentBetaError,
)
from .models import PosteriorSpec, RegimeRule, Standardization, WeightSpec
from .oracle import QuadratureConfig, QuadratureResult

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "DegenerateInformationError",
    "DomainError",
    "UnsupportedCombinationError",
    "WentBetaError",
    "PosteriorSpec",
    "RegimeRule",
    "Standardization",
    "WeightSpec",
    "QuadratureConfig",
    "QuadratureResult",
]
