"""End-to-end sweep and analysis shared by the CLI and the acceptance tests."""
from __future__ import annotations

import logging
from dataclasses import dataclass

from .files import RunConfig
from .scaling import (
    CollapseResult,
    DynamicalExponent,
    PeakEstimate,
    ScalingFit,
    derive_dynamical_exponent,
    find_peak,
    fit_adiabatic_dimension,
    make_evaluator,
    optimize_collapse,
    scan_curve,
)

log = logging.getLogger(__name__)


@dataclass
class Analysis:
    peaks: list[PeakEstimate]
    fits: dict[int, ScalingFit]
    collapses: dict[int, CollapseResult]
    z: DynamicalExponent | None


def run_scan(config: RunConfig):
    curves = []
    for order in config.r_orders:
        r = order // 2 - 1
        for eta in config.eta_list:
            log.info("scan eta=%g order=%d (%d points)", eta, order, len(config.g_grid))
            curves.append(scan_curve(eta, r, config.g_grid, config.policy, config.workers))
    return curves


def analyze(curves, config: RunConfig) -> Analysis:
    """Peaks, adiabatic dimensions and collapse exponents for every order present.

    z needs the order-4 fit; nu for it comes from the chi_F collapse when that
    order was scanned, otherwise from the order-4 collapse.
    """
    by_order = {}
    for c in curves:
        by_order.setdefault(c.order, []).append(c)
    peaks, fits, collapses = [], {}, {}
    for order, group in sorted(by_order.items()):
        group.sort(key=lambda c: c.eta)
        r = order // 2 - 1
        pk = []
        for c in group:
            pk.append(find_peak(c, make_evaluator(c.eta, r, config.policy)))
            log.info("peak eta=%g order=%d g_m=%.6f chi_max=%.6g", c.eta, order, pk[-1].g_m, pk[-1].chi_max)
        peaks += pk
        if len(group) >= 3:
            fits[order] = fit_adiabatic_dimension(pk)
            collapses[order] = optimize_collapse(group, pk, (config.nu_min, config.nu_max), config.nu_tol)
            log.info("order=%d mu=%.4f nu=%.4f", order, fits[order].mu, collapses[order].nu)
    z = None
    if 4 in fits:
        nu = collapses[2].nu if 2 in collapses else collapses[4].nu
        z = derive_dynamical_exponent(fits[4], nu)
    return Analysis(peaks, fits, collapses, z)
