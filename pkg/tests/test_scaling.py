import math

import numpy as np
import pytest

from rabi_qpt.errors import CollapseError, PeakError
from rabi_qpt.scaling import (
    PeakEstimate,
    SusceptibilityCurve,
    collapse_objective,
    default_grid,
    derive_dynamical_exponent,
    find_peak,
    fit_adiabatic_dimension,
    golden_section,
    make_evaluator,
    optimize_collapse,
    scan_curve,
)
from rabi_qpt.susceptibility import chi_resolvent, ground_pair, sector_matrices
from rabi_qpt.model import ModelParams, Truncation
from rabi_qpt.verify import manufactured_curves

ETAS = [300.0, 400.0, 500.0, 600.0, 700.0]


def make_curve(g, chi, eta=300.0, order=2):
    n = len(g)
    return SusceptibilityCurve(eta, order, np.asarray(g, float), np.asarray(chi, float),
                               np.zeros(n, int), np.ones(n, bool))


def test_default_grid():
    g = default_grid()
    assert len(g) == 126 and g[0] == 0.8 and g[-1] == 1.05
    assert np.all(np.diff(g) > 0)


def test_golden_section_quadratic():
    calls = []

    def f(x):
        calls.append(x)
        return (x - 1.37) ** 2

    x, fx = golden_section(f, 1.0, 2.0, 1e-6)
    assert x == pytest.approx(1.37, abs=1e-6) and fx < 1e-12
    assert len(calls) < 40


def test_parabolic_peak_exact():
    def evaluator(g):
        return math.exp(-((g - 0.97) ** 2))

    g = np.linspace(0.9, 1.05, 16)
    peak = find_peak(make_curve(g, [evaluator(x) for x in g]), evaluator)
    assert peak.g_m == pytest.approx(0.97, abs=1e-12)
    assert peak.iterations <= 2
    assert peak.chi_max == pytest.approx(1.0, abs=1e-15)


def test_peak_not_below_grid_maximum():
    def evaluator(g):
        return 1 / (0.01 + (g - 0.9731) ** 2) + 3 * g

    g = np.linspace(0.9, 1.05, 31)
    chi = np.array([evaluator(x) for x in g])
    peak = find_peak(make_curve(g, chi), evaluator)
    assert peak.chi_max >= chi.max()
    assert peak.g_m == pytest.approx(0.9731, abs=2e-3)


def test_peak_errors():
    g = np.linspace(0.8, 1.0, 11)
    with pytest.raises(PeakError):
        find_peak(make_curve(g, np.exp(g)), np.exp)
    bimodal = np.cos(30 * g) + 2
    with pytest.raises(PeakError):
        find_peak(make_curve(g, bimodal), lambda x: np.cos(30 * x) + 2)


def test_fit_exact_power_law():
    peaks = [PeakEstimate(e, 2, 1.0, 2 * e**1.5) for e in ETAS]
    fit = fit_adiabatic_dimension(peaks)
    assert abs(fit.mu - 1.5) < 1e-10
    assert fit.intercept == pytest.approx(math.log(2), abs=1e-10)
    assert fit.r2 == pytest.approx(1.0, abs=1e-12)
    assert np.max(np.abs(fit.residuals)) < 1e-10


def test_fit_errors():
    with pytest.raises(ValueError):
        fit_adiabatic_dimension([PeakEstimate(e, 2, 1.0, e) for e in ETAS[:2]])
    with pytest.raises(ValueError):
        fit_adiabatic_dimension([PeakEstimate(300.0, 2, 1.0, x) for x in (1, 2, 3)])
    with pytest.raises(ValueError):
        fit_adiabatic_dimension([PeakEstimate(e, o, 1.0, e) for e, o in zip(ETAS, (2, 4, 2, 4, 2))])


def test_dynamical_exponent():
    def fit(mu):
        return fit_adiabatic_dimension([PeakEstimate(e, 4, 1.0, e**mu) for e in ETAS])

    assert derive_dynamical_exponent(fit(2.01), 1.49).z == pytest.approx((2.01 - 2 / 1.49) / 2, abs=1e-9)
    assert derive_dynamical_exponent(fit(2.01), 1.49).z == pytest.approx(0.334, abs=1e-3)
    assert derive_dynamical_exponent(fit(2 / 1.4), 1.4).z == pytest.approx(0.0, abs=1e-9)
    assert derive_dynamical_exponent(fit(2.0), 1.5).z == pytest.approx(1 / 3, abs=1e-9)


@pytest.mark.parametrize("nu", [1.3, 1.5, 1.7])
def test_collapse_recovers_planted_exponent(nu):
    curves, peaks = manufactured_curves(nu)
    res = optimize_collapse(curves, peaks)
    assert abs(res.nu - nu) <= 0.01
    assert res.objective < min(res.endpoint_objectives)
    assert len(res.master_x) == sum(len(c.g) for c in curves)


def test_collapse_objective_small_at_planted_nu():
    # residual at the planted nu is only interpolation error across the peak
    curves, peaks = manufactured_curves(1.5)
    best = collapse_objective(1.5, curves, peaks)
    assert best < 0.05 * collapse_objective(1.3, curves, peaks)
    assert best < 0.05 * collapse_objective(1.7, curves, peaks)


def test_collapse_rejects_edge_optimum():
    curves, peaks = manufactured_curves(1.5)
    with pytest.raises(CollapseError):
        optimize_collapse(curves, peaks, interval=(1.6, 2.0))


def test_collapse_no_overlap():
    g = default_grid()
    curves, peaks = manufactured_curves(1.5, grid=g)
    peaks[0] = PeakEstimate(peaks[0].eta, 2, 5.0, peaks[0].chi_max)
    with pytest.raises(CollapseError):
        collapse_objective(1.5, curves, peaks)


def test_wide_fixed_kernel_is_biased():
    # a kernel 5% of the pooled x-range wide smears the peak and drags nu to the edge
    curves, peaks = manufactured_curves(1.5)
    with pytest.raises(CollapseError):
        optimize_collapse(curves, peaks, bandwidth=0.05)


def test_non_converged_points_excluded():
    curves, peaks = manufactured_curves(1.5)
    c = curves[0]
    conv = c.converged.copy()
    conv[10] = False
    chi = c.chi.copy()
    chi[10] = 1e9
    curves[0] = SusceptibilityCurve(c.eta, c.order, c.g, chi, c.n_fock, conv)
    assert abs(optimize_collapse(curves, peaks).nu - 1.5) <= 0.01


def test_scan_curve_small_grid_is_ordered():
    grid = [0.95, 0.2, 0.6]
    curve = scan_curve(300, 0, grid)
    assert curve.g.tolist() == [0.2, 0.6, 0.95]
    assert curve.order == 2 and curve.all_converged and np.all(curve.chi > 0)
    h, h1 = sector_matrices(ModelParams(300, 0.2), Truncation(int(curve.n_fock[0])))
    e0, psi0 = ground_pair(h)
    assert chi_resolvent(h, e0, psi0, h1, 0).value == pytest.approx(curve.chi[0], rel=1e-7)


def test_scan_curve_rejects_window():
    with pytest.raises(ValueError):
        scan_curve(300, 0, [0.5, 1.2])


def test_scan_parallel_matches_serial():
    grid = np.linspace(0.9, 1.04, 8)
    a = scan_curve(400, 1, grid)
    b = scan_curve(400, 1, grid, workers=2)
    assert np.array_equal(a.chi, b.chi) and np.array_equal(a.n_fock, b.n_fock)


@pytest.mark.slow
def test_rabi_curves_shape(rabi_curves):
    by_key = {(c.eta, c.order): c for c in rabi_curves}
    assert len(by_key) == 10
    for c in rabi_curves:
        assert c.all_converged
        find_peak(c, make_evaluator(c.eta, c.order // 2 - 1))  # unimodal, interior maximum
    for order in (2, 4):
        assert by_key[(700.0, order)].chi.max() > by_key[(300.0, order)].chi.max()


@pytest.mark.slow
def test_peaks_approach_critical_point(rabi_analysis):
    # finite-eta shift: g_m - 1 ~ eta^(-2/3), from the superradiant side
    for order in (2, 4):
        peaks = sorted((p for p in rabi_analysis.peaks if p.order == order), key=lambda p: p.eta)
        dist = np.array([abs(p.g_m - 1) for p in peaks])
        assert np.all(np.diff(dist) < 0)
        scaled = dist * np.array([p.eta for p in peaks]) ** (2 / 3)
        assert np.ptp(scaled) / scaled.mean() < 0.02
