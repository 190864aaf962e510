"""Finite-size scaling in eta: sweeps, peak location, power-law fits, data collapse.

eta plays the role of system size. Near the critical coupling

    chi_{2r+2}(g_m) ~ eta^mu,   chi(g) = eta^(2/nu + 2zr) f_r((g - g_m) eta^(1/nu))

mu comes from a log-log least-squares fit of peak heights, nu from the best
collapse of the curves onto a single master curve, and z from the order-4
adiabatic dimension together with nu.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from .errors import CollapseError, PeakError
from .model import ModelParams
from .susceptibility import order_of
from .truncation import ConvergencePolicy, converged_chi

G_WINDOW = (0.0, 1.1)
GOLDEN = (math.sqrt(5) - 1) / 2


def default_grid(g_min=0.80, g_max=1.05, step=0.002) -> np.ndarray:
    n = int(round((g_max - g_min) / step)) + 1
    return np.round(g_min + step * np.arange(n), 12)


@dataclass(frozen=True)
class SusceptibilityCurve:
    eta: float
    order: int
    g: np.ndarray
    chi: np.ndarray
    n_fock: np.ndarray
    converged: np.ndarray

    @property
    def all_converged(self) -> bool:
        return bool(np.all(self.converged))

    def usable(self):
        """(g, chi) restricted to converged points."""
        m = np.asarray(self.converged, dtype=bool)
        return self.g[m], self.chi[m]


@dataclass(frozen=True)
class PeakEstimate:
    eta: float
    order: int
    g_m: float
    chi_max: float
    iterations: int = 0
    hwhm: float = float("nan")


@dataclass(frozen=True)
class ScalingFit:
    order: int
    mu: float
    intercept: float
    stderr: float
    r2: float
    log_eta: np.ndarray
    log_chi: np.ndarray
    residuals: np.ndarray


@dataclass(frozen=True)
class CollapseResult:
    order: int
    nu: float
    objective: float
    peaks: tuple[PeakEstimate, ...]
    master_x: np.ndarray
    master_y: np.ndarray
    interval: tuple[float, float]
    tol: float
    endpoint_objectives: tuple[float, float]
    master: str = "bracket"


@dataclass(frozen=True)
class DynamicalExponent:
    z: float
    stderr: float


# --- sweeps -----------------------------------------------------------------

def _point(args):
    eta, g, r, policy, method = args
    res = converged_chi(ModelParams(eta, g), r, policy, method)
    return g, res.chi, res.n_used, res.converged


def scan_curve(eta: float, r: int, g_grid: Sequence[float], policy: ConvergencePolicy | None = None,
               workers: int | None = None, method: str = "spectral-sum") -> SusceptibilityCurve:
    """Converged chi_{2r+2} on every grid point, ordered by g.

    ``workers > 1`` spreads points over processes; the result does not
    depend on it.
    """
    policy = policy or ConvergencePolicy()
    order = order_of(r)
    grid = np.unique(np.asarray(g_grid, dtype=float))
    if grid.size == 0:
        raise ValueError("empty g grid")
    if grid[0] < G_WINDOW[0] or grid[-1] > G_WINDOW[1]:
        raise ValueError(f"g grid must lie inside {G_WINDOW}")
    jobs = [(float(eta), float(g), r, policy, method) for g in grid]
    if workers and workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            rows = list(pool.map(_point, jobs, chunksize=8))
    else:
        rows = [_point(j) for j in jobs]
    rows.sort(key=lambda row: row[0])
    g, chi, n, conv = (np.array(col) for col in zip(*rows))
    return SusceptibilityCurve(float(eta), order, g.astype(float), chi.astype(float),
                               n.astype(int), conv.astype(bool))


def make_evaluator(eta: float, r: int, policy: ConvergencePolicy | None = None,
                   method: str = "spectral-sum") -> Callable[[float], float]:
    """g -> converged chi_{2r+2}(g); raises if the cutoff cap is hit."""
    policy = policy or ConvergencePolicy()

    def evaluate(g):
        return converged_chi(ModelParams(eta, float(g)), r, policy, method, strict=True).chi

    return evaluate


# --- peaks ------------------------------------------------------------------

def _vertex(a, b, c, fa, fb, fc):
    num = (b - a) ** 2 * (fb - fc) - (b - c) ** 2 * (fb - fa)
    den = (b - a) * (fb - fc) - (b - c) * (fb - fa)
    if den == 0:
        return b
    return b - 0.5 * num / den


def _hwhm(g, chi, g_m, chi_max):
    half = 0.5 * chi_max
    left = np.flatnonzero((g < g_m) & (chi < half))
    right = np.flatnonzero((g > g_m) & (chi < half))
    if left.size == 0 or right.size == 0:
        return float("nan")
    i, j = left[-1], right[0]
    gl = np.interp(half, chi[i:i + 2], g[i:i + 2])
    gr = np.interp(half, chi[j - 1:j + 1][::-1], g[j - 1:j + 1][::-1])
    return float(0.5 * (gr - gl))


def check_unimodal(chi: np.ndarray) -> int:
    """Index of the single interior maximum; PeakError otherwise."""
    slope = np.sign(np.diff(chi))
    slope = slope[slope != 0]
    if slope.size == 0:
        raise PeakError("flat curve")
    if np.count_nonzero(np.diff(slope)) != 1 or slope[0] < 0:
        raise PeakError("curve is not unimodal in the scan window")
    i = int(np.argmax(chi))
    if i == 0 or i == len(chi) - 1:
        raise PeakError("maximum sits on the window boundary")
    return i


def find_peak(curve: SusceptibilityCurve, evaluator: Callable[[float], float],
              tol: float = 1e-5, max_iter: int = 60) -> PeakEstimate:
    """Refine the grid maximum by successive parabolic interpolation in (g, ln chi).

    Each new vertex is evaluated exactly and replaces a bracket point; the
    loop stops once the vertex moves by less than ``tol``.
    """
    g, chi = curve.usable()
    i = check_unimodal(chi)
    a, b, c = g[i - 1], g[i], g[i + 1]
    fa, fb, fc = np.log(chi[i - 1:i + 2])
    it = 0
    for it in range(1, max_iter + 1):
        u = _vertex(a, b, c, fa, fb, fc)
        if not a < u < c:
            raise PeakError(f"parabolic step left the bracket at g={u:.6g}")
        fu = math.log(evaluator(u))
        moved = abs(u - b)
        if fu > fb:
            if u < b:
                a, b, c, fa, fb, fc = a, u, b, fa, fu, fb
            else:
                a, b, c, fa, fb, fc = b, u, c, fb, fu, fc
        elif u < b:
            a, fa = u, fu
        else:
            c, fc = u, fu
        if moved < tol:
            break
    else:
        raise PeakError(f"peak refinement did not settle in {max_iter} steps")
    chi_max = math.exp(fb)
    return PeakEstimate(curve.eta, curve.order, float(b), chi_max, it, _hwhm(g, chi, b, chi_max))


# --- power law --------------------------------------------------------------

def fit_adiabatic_dimension(peaks: Sequence[PeakEstimate]) -> ScalingFit:
    """Ordinary least squares of ln chi_max against ln eta; the slope is mu."""
    if len(peaks) < 3:
        raise ValueError("need at least three peaks")
    orders = {p.order for p in peaks}
    if len(orders) != 1:
        raise ValueError(f"peaks mix susceptibility orders {sorted(orders)}")
    x = np.log([p.eta for p in peaks])
    y = np.log([p.chi_max for p in peaks])
    if len(set(x.tolist())) != len(x):
        raise ValueError("peaks must come from distinct eta")
    if np.ptp(x) == 0:
        raise ValueError("zero variance in ln eta")
    res = stats.linregress(x, y)
    resid = y - (res.intercept + res.slope * x)
    return ScalingFit(orders.pop(), float(res.slope), float(res.intercept),
                      float(res.stderr), float(res.rvalue**2), x, y, resid)


def derive_dynamical_exponent(fit_chi4: ScalingFit, nu: float, nu_stderr: float = 0.0) -> DynamicalExponent:
    """z from mu_4 = 2/nu + 2z."""
    if nu <= 0:
        raise ValueError("nu must be positive")
    z = (fit_chi4.mu - 2.0 / nu) / 2.0
    err = math.hypot(fit_chi4.stderr / 2.0, nu_stderr / nu**2)
    return DynamicalExponent(z, err)


# --- collapse ---------------------------------------------------------------

def golden_section(f: Callable[[float], float], a: float, b: float, tol: float):
    """Minimize a unimodal f on [a, b] until the bracket is narrower than tol.

    Returns (x, f(x)) for the best point evaluated.
    """
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


def rescale(curves, peaks, nu):
    """Per-curve (x, y) = (eta^(1/nu) (g - g_m), chi / chi_max), converged points only."""
    out = []
    for curve, peak in zip(curves, peaks):
        g, chi = curve.usable()
        out.append((curve.eta ** (1.0 / nu) * (g - peak.g_m), chi / peak.chi_max))
    return out


def _local_line(px, py, x0, w=None):
    a = np.column_stack([np.ones_like(px), px - x0])
    if w is not None:
        sw = np.sqrt(w)
        a, py = a * sw[:, None], py * sw
    coef, *_ = np.linalg.lstsq(a, py, rcond=None)
    return coef[0]


def collapse_objective(nu: float, curves, peaks, bandwidth: float | None = None) -> float:
    """Mean squared distance of rescaled points from the master curve.

    Only points inside the x-window shared by every curve count. The master
    curve at a point of curve i is a local straight line fitted to the two
    points bracketing it on each of the other curves. With ``bandwidth`` set,
    a Gaussian-weighted local line over all pooled points is used instead,
    its width that fraction of the pooled x-range.
    """
    data = rescale(curves, peaks, nu)
    lo = max(x.min() for x, _ in data)
    hi = min(x.max() for x, _ in data)
    if not lo < hi:
        raise CollapseError(f"no overlapping x-window at nu={nu:.4f}")
    if bandwidth is not None:
        px = np.concatenate([x for x, _ in data])
        py = np.concatenate([y for _, y in data])
        h = bandwidth * np.ptp(px)
    resid = []
    for i, (xi, yi) in enumerate(data):
        inside = (xi >= lo) & (xi <= hi)
        for x0, y0 in zip(xi[inside], yi[inside]):
            if bandwidth is not None:
                w = np.exp(-0.5 * ((px - x0) / h) ** 2)
                resid.append(y0 - _local_line(px, py, x0, w))
                continue
            bx, by = [], []
            for j, (xj, yj) in enumerate(data):
                if j == i:
                    continue
                k = int(np.clip(np.searchsorted(xj, x0), 1, len(xj) - 1))
                bx += [xj[k - 1], xj[k]]
                by += [yj[k - 1], yj[k]]
            resid.append(y0 - _local_line(np.array(bx), np.array(by), x0))
    return float(np.mean(np.square(resid)))


def optimize_collapse(curves: Sequence[SusceptibilityCurve], peaks: Sequence[PeakEstimate],
                      interval: tuple[float, float] = (1.0, 2.0), tol: float = 1e-3,
                      bandwidth: float | None = None) -> CollapseResult:
    """Golden-section search for the nu giving the best collapse."""
    if len(curves) < 3 or len(curves) != len(peaks):
        raise ValueError("need at least three curves, each with its peak")
    by_eta = {p.eta: p for p in peaks}
    try:
        peaks = [by_eta[c.eta] for c in curves]
    except KeyError as exc:
        raise ValueError(f"no peak for eta={exc.args[0]}") from None
    orders = {c.order for c in curves} | {p.order for p in peaks}
    if len(orders) != 1:
        raise ValueError(f"curves and peaks mix orders {sorted(orders)}")

    def f(nu):
        return collapse_objective(nu, curves, peaks, bandwidth)

    a, b = interval
    nu, best = golden_section(f, a, b, tol)
    ends = (f(a), f(b))
    if min(nu - a, b - nu) < tol or best >= min(ends):
        raise CollapseError(f"collapse optimum nu={nu:.4f} sits on the search interval edge")
    data = rescale(curves, peaks, nu)
    mx = np.concatenate([x for x, _ in data])
    my = np.concatenate([y for _, y in data])
    order = np.argsort(mx, kind="stable")
    return CollapseResult(orders.pop(), float(nu), best, tuple(peaks), mx[order], my[order],
                          (float(a), float(b)), float(tol), ends,
                          "bracket" if bandwidth is None else f"kernel:{bandwidth:g}")
