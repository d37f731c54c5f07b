"""Spectral truncated-GP regression with a squared-exponential kernel under Gaussian design."""

from .errors import ConditioningError, ConfigError, DimensionError, StarvationError
from .spectrum import KernelSpec, SpectralBasis, eigenfunction_matrix, eigenvalue, make_basis
from .tgp import DesignSample, TgpPosterior, build_design, posterior

__version__ = "0.1.0"

__all__ = [
    "ConditioningError",
    "ConfigError",
    "DesignSample",
    "DimensionError",
    "KernelSpec",
    "SpectralBasis",
    "StarvationError",
    "TgpPosterior",
    "build_design",
    "eigenfunction_matrix",
    "eigenvalue",
    "make_basis",
    "posterior",
]
