"""Spectra, exceptional points and geometric phases of the asymmetric quantum Rabi model."""
__version__ = "0.1.0"

from .model import BlockIndex, ModelParams, ParameterError, nearest_bias_index, rescaled_energy, validate
from .exactdiag import SpectrumResult, TruncationConfig, build_hamiltonian, converged_spectrum, level_gap
from .adiabatic import aa_eigenpair, aa_tunneling, laguerre, spectrum_aa
from .constraints import constraint_poly, juddian_roots, kbar, normalized_constraint
from .gaa import effective_hamiltonian, gaa_eigenpair, gaa_tunneling, locate_cis, spectrum_gaa
from .berry import berry_phase, berry_phase_wilson, rectangle_loop, winding_number
