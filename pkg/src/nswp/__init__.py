"""Driven harmonic oscillator toolkit.

Splits the Hamiltonian into a state-preserving part and a linear state-changing
part, builds the exact nonspreading wave packet, and checks it against a
split-operator solution of the time-dependent Schroedinger equation.
"""

__version__ = "0.1.0"

from .oscillator import (  # noqa: E402
    Grid,
    ObservableSet,
    OscillatorParams,
    WaveFunction,
    build_grid,
    eigenstate,
    inner_product,
    l2_distance,
    observables,
    peak_position,
)
from .pulse import ConstantPulse, SineSquaredPulse, TabulatedPulse, ZeroPulse  # noqa: E402
