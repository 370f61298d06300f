"""Gaussian cMERA states of free bosons and Dirac fermions in one and two
spatial dimensions: characteristic functions, position-space correlators,
entanglement entropy and the fits used to read off exponents and central
charges."""

__version__ = "0.1.0"

from .correlators import TheoryConfig  # noqa: E402,F401
from .profiles import Channel, SpectralProfile, State, Theory  # noqa: E402,F401
