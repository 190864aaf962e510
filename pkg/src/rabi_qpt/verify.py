"""Quick analytic and cross-route self-checks behind ``rabi verify``."""
from __future__ import annotations

import numpy as np

from .eigensolve import diagonalize_full
from .model import ModelParams, Truncation, build_h1, build_hamiltonian, parity_operator
from .scaling import (
    PeakEstimate,
    SusceptibilityCurve,
    default_grid,
    fit_adiabatic_dimension,
    optimize_collapse,
)
from .susceptibility import (
    chi_finite_difference_extrapolated,
    chi_resolvent,
    chi_spectral,
    ground_state,
    ground_variance,
    moment,
    noise_spectrum,
    sector_decomposition,
    sector_matrices,
)
from .eigensolve import ground_pair


def chi_f_at_zero(eta):
    """Only |up,1> couples to the g=0 ground state: weight eta/4, gap 1+eta."""
    return eta / (4 * (1 + eta) ** 2)


def chi_4_at_zero(eta):
    return eta / (4 * (1 + eta) ** 4)


def manufactured_curves(nu=1.5, etas=(300, 400, 500, 600, 700), grid=None, order=2):
    """Curves obeying chi = eta^(2/nu) f(eta^(1/nu) (g - g_m)) exactly, with their peaks.

    f(x) = 1 / (1 + x^2 + 0.2 x^4 / (1 + x^2)) has its maximum f(0) = 1, and
    g_m(eta) = 1 + 0.6 eta^(-2/3) mimics the finite-size drift.
    """
    grid = default_grid() if grid is None else np.asarray(grid)
    curves, peaks = [], []
    for eta in etas:
        gm = 1 + 0.6 * eta ** (-2 / 3)
        x = eta ** (1 / nu) * (grid - gm)
        chi = eta ** (2 / nu) / (1 + x**2 + 0.2 * x**4 / (1 + x**2))
        n = len(grid)
        curves.append(SusceptibilityCurve(float(eta), order, grid.copy(), chi,
                                          np.zeros(n, int), np.ones(n, bool)))
        peaks.append(PeakEstimate(float(eta), order, gm, eta ** (2 / nu)))
    return curves, peaks


def _rel(a, b):
    return abs(a - b) / abs(b)


def run_checks():
    """List of (name, passed, detail)."""
    out = []

    worst = 0.0
    for eta in (300, 700):
        decomp, h1 = sector_decomposition(ModelParams(eta, 0.0), Truncation(64))
        worst = max(worst, _rel(chi_spectral(decomp, h1, 0).value, chi_f_at_zero(eta)),
                    _rel(chi_spectral(decomp, h1, 1).value, chi_4_at_zero(eta)))
    out.append(("analytic g=0 anchor", worst < 1e-10, f"max rel err {worst:.2e}"))

    params, trunc = ModelParams(300, 0.6), Truncation(128)
    decomp, h1 = sector_decomposition(params, trunc)
    spec = chi_spectral(decomp, h1, 0).value
    h, h1b = sector_matrices(params, trunc)
    e0, psi0 = ground_pair(h)
    res = chi_resolvent(h, e0, psi0, h1b, 0).value
    fd = chi_finite_difference_extrapolated(params, trunc).value
    dev = max(_rel(res, spec), _rel(fd, spec))
    out.append(("spectral/resolvent/finite-difference", dev < 1e-6, f"max rel dev {dev:.2e}"))

    trunc = Truncation(60)
    hm = build_hamiltonian(ModelParams(300, 0.9), trunc)
    p = parity_operator(trunc)
    comm = np.max(np.abs(hm @ p - p @ hm)) / np.max(np.abs(hm))
    e_plus = diagonalize_full(hm).energies
    e_minus = diagonalize_full(build_hamiltonian(ModelParams(300, -0.9), trunc)).energies
    sym = np.max(np.abs(e_plus - e_minus)) / np.max(np.abs(e_plus))
    out.append(("parity and g <-> -g symmetry", comm <= 1e-12 and sym < 1e-12,
                f"[H,P] {comm:.1e}, spectra {sym:.1e}"))

    decomp, h1 = sector_decomposition(ModelParams(500, 0.95), Truncation(128))
    spec = noise_spectrum(decomp, h1)
    rule = _rel(spec.weights.sum(), ground_variance(decomp, h1))
    mom = max(_rel(moment(spec, 2), chi_spectral(decomp, h1, 0).value),
              _rel(moment(spec, 4), chi_spectral(decomp, h1, 1).value))
    out.append(("noise spectrum sum rule and moments", rule < 1e-8 and mom < 1e-12,
                f"sum rule {rule:.1e}, moments {mom:.1e}"))

    etas = np.array([300.0, 400, 500, 600, 700])
    fit = fit_adiabatic_dimension([PeakEstimate(e, 2, 1.0, 2 * e**1.5) for e in etas])
    out.append(("power-law fit recovery", abs(fit.mu - 1.5) < 1e-10, f"slope {fit.mu:.12f}"))

    curves, peaks = manufactured_curves(1.5)
    nu = optimize_collapse(curves, peaks).nu
    out.append(("collapse recovery", abs(nu - 1.5) <= 0.01, f"nu {nu:.4f}"))

    e0, _ = ground_state(ModelParams(300, 0.0), Truncation(16))
    out.append(("g=0 ground energy", abs(e0 + 150) < 1e-12, f"E0 {e0:.12f}"))
    return out
