"""Replica-symmetric limits, AMP and exact finite-n oracles for low-rank matrix estimation."""

from ._rslimits import *  # noqa: F401,F403
from ._rslimits import DEFAULT_QUAD_ORDER, DomainError, NumericalError, SizeError  # noqa: F401

__version__ = "0.1.0"
