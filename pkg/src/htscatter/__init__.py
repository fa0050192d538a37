"""Hamiltonian-truncation simulation of two-particle scattering in a 1+1D quartic scalar theory."""

from .basis import ModelParams, TruncatedBasis, TruncationSpec, enumerate_basis
from .evolution import RampSchedule, adiabatic_prepare, exact_evolve, ramp_down, trotter_evolve
from .hamiltonian import HamiltonianParts, HermitianOperator, assemble
from .observables import occupation_histogram, separation_density
from .wavepackets import WavepacketSpec, two_packet_state

__version__ = "0.1.0"

__all__ = [
    "HamiltonianParts",
    "HermitianOperator",
    "ModelParams",
    "RampSchedule",
    "TruncatedBasis",
    "TruncationSpec",
    "WavepacketSpec",
    "adiabatic_prepare",
    "assemble",
    "enumerate_basis",
    "exact_evolve",
    "occupation_histogram",
    "ramp_down",
    "separation_density",
    "trotter_evolve",
    "two_packet_state",
]
