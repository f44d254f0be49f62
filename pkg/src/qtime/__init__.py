"""Time observables for quantum wavepackets: flux-weighted passage-time
moments in the time and energy representations, dwell times across
piecewise-constant barriers, photon passage times, the Hamiltonian-form
time operator, and periodic time for discrete spectra.
"""

__version__ = "0.1.0"

from .errors import (HermiticityError, NumericalGuardError, PreconditionError, QTimeError,
                     ZeroFluxError)
from .numerics import Grid1D, Series
from .wavepacket import ENERGY, MOMENTUM, NATURAL, PhysicalConstants, SpectralAmplitude, gaussian_spectrum

__all__ = [
    "__version__", "QTimeError", "PreconditionError", "ZeroFluxError", "NumericalGuardError",
    "HermiticityError", "Grid1D", "Series", "ENERGY", "MOMENTUM", "NATURAL", "PhysicalConstants",
    "SpectralAmplitude", "gaussian_spectrum",
]
