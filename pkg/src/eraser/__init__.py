"""Entanglement restoration by spectral filtering in two-crystal SPDC."""
from .entanglement import EntanglementReport, concurrence, report, von_neumann_entropy
from .measurement import AngleSet, chsh_fixed, chsh_max, correlation, simulate_counts, standard_tomography_set
from .qstate import DensityMatrix, bell_phi_plus, density, eig_hermitian, tensor, validate
from .spdc import FilterScenario, WavePacketSpec, coherence_gaussian, fit_effective_width, predict, rho_from_coherence

__version__ = "0.1.0"
