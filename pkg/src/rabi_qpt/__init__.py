"""Fidelity susceptibility and finite-frequency scaling of the quantum Rabi model."""

from .model import ModelParams, Truncation, build_h0, build_h1, build_hamiltonian, parity_operator
from .eigensolve import SpectralDecomposition, deflated_solve, diagonalize_full, ground_pair
from .susceptibility import (
    NoiseSpectrum,
    SusceptibilityValue,
    chi_finite_difference,
    chi_finite_difference_extrapolated,
    chi_resolvent,
    chi_spectral,
    excitation_probability,
    fidelity,
    moment,
    noise_spectrum,
)
from .truncation import ConvergencePolicy, converged_chi
from .scaling import (
    CollapseResult,
    PeakEstimate,
    ScalingFit,
    SusceptibilityCurve,
    derive_dynamical_exponent,
    find_peak,
    fit_adiabatic_dimension,
    optimize_collapse,
    scan_curve,
)

__version__ = "0.1.0"
