"""Exact matrix-product ground states of a frustrated two-leg spin-1/2 ladder.

Entanglement entropies, correlation and entanglement lengths, ground-state
fidelity and its curvature, with brute-force small-ring oracles.
"""
from .entanglement import entanglement_length, s_pair, s_single, von_neumann, xi_closed
from .fidelity import alpha_asymptotic, chi_f, d_of_u, d_tilde, fidelity_closed, fidelity_closed_tilde
from .model import couplings, local_hamiltonian
from .mps import build_state, g_matrix, overlap_closed_form
from .transfer import correlation_length, rho_pair_tdl, rho_single_tdl, spin_correlation

__version__ = "0.1.0"

__all__ = [
    "alpha_asymptotic",
    "build_state",
    "chi_f",
    "correlation_length",
    "couplings",
    "d_of_u",
    "d_tilde",
    "entanglement_length",
    "fidelity_closed",
    "fidelity_closed_tilde",
    "g_matrix",
    "local_hamiltonian",
    "overlap_closed_form",
    "rho_pair_tdl",
    "rho_single_tdl",
    "s_pair",
    "s_single",
    "spin_correlation",
    "von_neumann",
    "xi_closed",
]
