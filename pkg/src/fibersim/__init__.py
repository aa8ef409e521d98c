"""Simulation and inverse design of trapped particles coupled through a nanofiber."""
from .model import ChainConfig, ChainGeometry, OscillatorParams, PumpSpectrum, UnitSystem, load_config
from .fockspace import DensityMatrix, FockSpace, FockStateVector, partial_trace, von_neumann_entropy
from .hamiltonian import (ModeSpaceHamiltonian, build_full_hamiltonian, build_rwa_hamiltonian,
                          coupling_matrix, mode_space_hamiltonian, sector_eigenenergies)
from .dynamics import NumericalGuardError, evolve, evolve_many, extract_two_qubit_gate
from .coulombmap import DesignError, TargetCoulombSystem, design_line_spectrum, design_planar_spectrum
from .readout import state_dependent_intensity
from .regime import PhysicalParams, cesium_d2, regime_report

__version__ = "0.1.0"
