"""Fidelity, fidelity susceptibility and generalized adiabatic susceptibilities.

For a ground state |0> of H = H0 + g H1 with excitation gaps D_n = E_n - E_0,

    chi_{2r+2} = sum_{n != 0} |<n|H1|0>|^2 / D_n^(2r+2)

(r = 0 is the fidelity susceptibility chi_F). Three independent routes are
provided: the spectral sum over a full decomposition, the resolvent form
||(H - E0)^-(r+1) Q H1 |0>||^2 built from deflated solves, and the second
derivative of the ground-state overlap (r = 0 only).

H1 conserves parity, so every route works inside the ground parity sector.
This keeps the ground state well separated from its opposite-parity partner,
which becomes exponentially close in energy on the superradiant side.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .eigensolve import SpectralDecomposition, deflated_solve, diagonalize_full, ground_pair
from .errors import RabiError
from .model import (
    ModelParams,
    Truncation,
    build_h0,
    build_h1,
    parity_sector,
    restrict,
)

METHODS = ("spectral-sum", "resolvent", "finite-difference")
DEFAULT_DELTA_G = 1e-4
# Noise-spectrum lines lighter than this fraction of the sum rule are rounding noise.
WEIGHT_CUTOFF = 1e-16


@dataclass(frozen=True)
class SusceptibilityValue:
    order: int
    value: float
    method: str
    n_max: int | None = None

    def __post_init__(self):
        if self.order < 2 or self.order % 2:
            raise ValueError(f"order must be an even integer >= 2, got {self.order}")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")

    @property
    def r(self) -> int:
        return self.order // 2 - 1


@dataclass(frozen=True)
class NoiseSpectrum:
    """Delta-comb spectrum: line i sits at ``omegas[i]`` with ``weights[i]``."""

    omegas: np.ndarray
    weights: np.ndarray

    @property
    def lines(self) -> list[tuple[float, float]]:
        return list(zip(self.omegas.tolist(), self.weights.tolist()))

    def __len__(self):
        return len(self.omegas)


def order_of(r: int) -> int:
    if int(r) != r or r < 0:
        raise ValueError(f"r must be a non-negative integer, got {r!r}")
    return 2 * int(r) + 2


def sector_matrices(params: ModelParams, trunc: Truncation) -> tuple[np.ndarray, np.ndarray]:
    """H(g) and H1 restricted to the ground parity sector."""
    idx = parity_sector(trunc)
    h0 = restrict(build_h0(params.eta, trunc), idx)
    h1 = restrict(build_h1(params.eta, trunc), idx)
    return h0 + params.g * h1, h1


def sector_decomposition(params: ModelParams, trunc: Truncation):
    """Full decomposition of the ground sector, plus the sector's H1."""
    h, h1 = sector_matrices(params, trunc)
    return diagonalize_full(h), h1


def ground_state(params: ModelParams, trunc: Truncation) -> tuple[float, np.ndarray]:
    """Ground energy and state, the state expressed in the full k = 2n+s basis."""
    idx = parity_sector(trunc)
    h, _ = sector_matrices(params, trunc)
    e0, vb = ground_pair(h)
    psi = np.zeros(trunc.dim)
    psi[idx] = vb
    return e0, psi


def _matrix_elements(decomp: SpectralDecomposition, h1: np.ndarray):
    v = decomp.vectors
    amps = v.T @ (h1 @ v[:, 0])
    gaps = decomp.energies[1:] - decomp.energies[0]
    return gaps, amps[1:] ** 2


def chi_spectral(decomp: SpectralDecomposition, h1: np.ndarray, r: int = 0,
                 n_max: int | None = None) -> SusceptibilityValue:
    order = order_of(r)
    gaps, weights = _matrix_elements(decomp, h1)
    live = weights > 0
    if np.any(gaps[live] <= 0):
        raise RabiError("non-positive excitation gap with non-zero weight; spectrum ordering broken")
    value = float(np.sum(weights[live] / gaps[live] ** order))
    return SusceptibilityValue(order, value, "spectral-sum", n_max)


def chi_resolvent(h: np.ndarray, e0: float, psi0: np.ndarray, h1: np.ndarray, r: int = 0,
                  n_max: int | None = None) -> SusceptibilityValue:
    """Resolvent route: r+1 deflated solves applied to Q H1 |psi0>."""
    order = order_of(r)
    x = h1 @ psi0
    x = x - psi0 * (psi0 @ x)
    for _ in range(r + 1):
        x = deflated_solve(h, e0, psi0, x)
    return SusceptibilityValue(order, float(x @ x), "resolvent", n_max)


def _overlap_pair(params: ModelParams, delta_g: float, trunc: Truncation):
    h0, h1 = sector_matrices(ModelParams(params.eta, 0.0), trunc)
    _, a = ground_pair(h0 + params.g * h1)
    _, b = ground_pair(h0 + (params.g + delta_g) * h1)
    return a, b


def fidelity(params: ModelParams, delta_g: float, trunc: Truncation) -> float:
    """|<psi0(g)|psi0(g + delta_g)>| at a common truncation."""
    if delta_g == 0:
        return 1.0
    a, b = _overlap_pair(params, delta_g, trunc)
    return float(min(1.0, abs(a @ b)))


def chi_finite_difference(params: ModelParams, delta_g: float, trunc: Truncation) -> SusceptibilityValue:
    """-2 ln F / delta_g^2 from ground states at g - delta_g/2 and g + delta_g/2.

    Centring the pair on g removes the odd delta_g^3 term of ln F, so the
    error is O(delta_g^2) rather than O(delta_g). 1 - F^2 is taken as the
    squared norm of the orthogonal part of one state against the other;
    subtracting the overlap from 1 would lose every significant digit once
    1 - F drops near machine epsilon.
    """
    if delta_g == 0:
        raise ValueError("delta_g must be non-zero")
    a, b = _overlap_pair(ModelParams(params.eta, params.g - delta_g / 2), delta_g, trunc)
    perp = b - a * (a @ b)
    infid = float(perp @ perp)
    if infid >= 0.19:  # 1 - F < 0.1
        raise ValueError(f"delta_g={delta_g:g} too large: 1 - F^2 = {infid:.3f}")
    value = -math.log1p(-infid) / delta_g**2
    return SusceptibilityValue(2, value, "finite-difference", trunc.n_max)


def chi_finite_difference_extrapolated(params: ModelParams, trunc: Truncation,
                                       delta_g: float = DEFAULT_DELTA_G) -> SusceptibilityValue:
    """Richardson combination of steps delta_g and delta_g/2, cancelling the O(delta_g^2) term."""
    coarse = chi_finite_difference(params, delta_g, trunc).value
    fine = chi_finite_difference(params, delta_g / 2, trunc).value
    return SusceptibilityValue(2, (4 * fine - coarse) / 3, "finite-difference", trunc.n_max)


def noise_spectrum(decomp: SpectralDecomposition, h1: np.ndarray) -> NoiseSpectrum:
    gaps, weights = _matrix_elements(decomp, h1)
    total = weights.sum()
    keep = weights > WEIGHT_CUTOFF * total
    order = np.argsort(gaps[keep], kind="stable")
    return NoiseSpectrum(gaps[keep][order], weights[keep][order])


def ground_variance(decomp: SpectralDecomposition, h1: np.ndarray) -> float:
    """<H1^2> - <H1>^2 in the ground state; the noise-spectrum sum rule."""
    psi = decomp.ground_state
    x = h1 @ psi
    return float(x @ x - (psi @ x) ** 2)


def moment(spectrum: NoiseSpectrum, k: int) -> float:
    """Inverse moment: integral of S(omega)/omega^k, a finite sum for a delta comb."""
    if k <= 0 or k % 2:
        raise ValueError(f"moment order must be a positive even integer, got {k}")
    if len(spectrum) == 0:
        return 0.0
    return float(np.sum(spectrum.weights / spectrum.omegas**k))


def excitation_probability(b: float, chi: SusceptibilityValue, r: int | None = None) -> float:
    """Excitation probability b^2 chi_{2r+2} after a ramp g_c + b t^r / r!.

    Values above 1 mean the perturbative formula is out of range; they are
    clamped to 1 with a warning.
    """
    if r is not None and order_of(r) != chi.order:
        raise ValueError(f"ramp exponent r={r} needs order {order_of(r)}, got {chi.order}")
    p = b * b * chi.value
    if p > 1:
        warnings.warn(f"b^2 chi = {p:.3g} > 1; perturbative excitation formula out of range")
        return 1.0
    return p
