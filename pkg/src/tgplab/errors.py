"""Exception types raised by tgplab."""

import numpy as np


class DimensionError(ValueError):
    """Array shapes are incompatible with the requested operation."""


class ConditioningError(np.linalg.LinAlgError):
    """A positive-definite factorization failed even after jitter."""


class ConfigError(ValueError):
    """Invalid experiment configuration (unknown key, bad type or value)."""


class StarvationError(RuntimeError):
    """Rejection sampling accepted too few proposals to be useful."""
