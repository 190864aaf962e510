"""SVG figures: susceptibility curves, peak power-law fits, data collapses."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

LINESTYLES = ["-", "--", ":", "-.", (0, (3, 1))]
COLORS = ["black", "tab:orange", "magenta", "tab:blue", "purple"]

# Stable ids and no timestamp, so reruns write identical files.
plt.rcParams["svg.hashsalt"] = "rabi-qpt"
plt.rcParams["svg.fonttype"] = "path"
_META = {"Date": None, "Creator": None}


def _symbol(order):
    return r"\chi_F" if order == 2 else rf"\chi_{{{order}}}"


def _stem(order):
    return "chi_f" if order == 2 else f"chi_{order}"


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=_META)
    plt.close(fig)
    return path


def _style(i):
    return dict(color=COLORS[i % len(COLORS)], linestyle=LINESTYLES[i % len(LINESTYLES)])


def plot_curves(curves, outdir):
    order = curves[0].order
    fig, ax = plt.subplots(figsize=(5, 3.6))
    for i, c in enumerate(sorted(curves, key=lambda c: c.eta)):
        ax.plot(c.g, c.chi, label=rf"$\eta={c.eta:g}$", **_style(i))
    ax.set_xlabel(r"$g$")
    ax.set_ylabel(rf"${_symbol(order)}$")
    ax.legend(frameon=False)
    return _save(fig, Path(outdir) / f"{_stem(order)}_curves.svg")


def plot_fit(peaks, fit, outdir):
    """Peak heights on log-log axes with the least-squares line and its slope."""
    order = peaks[0].order
    x = np.log([p.eta for p in peaks])
    y = np.log([p.chi_max for p in peaks])
    fig, ax = plt.subplots(figsize=(5, 3.6))
    ax.plot(x, y, "o", mfc="none", color="tab:blue", label="exact diagonalization")
    xs = np.linspace(x.min() - 0.05, x.max() + 0.05, 50)
    ax.plot(xs, fit["intercept"] + fit["mu"] * xs, "-", color="tab:red",
            label=rf"${fit['intercept']:.2f}+{fit['mu']:.2f}x$")
    ax.text(0.05, 0.9, rf"$\mu={fit['mu']:.3f}$", transform=ax.transAxes)
    ax.set_xlabel(r"$\ln\eta$")
    ax.set_ylabel(rf"$\ln[{_symbol(order)}(g_m)]$")
    ax.legend(frameon=False, loc="lower right")
    mu_name = "mu_f" if order == 2 else f"mu_{order}"
    return _save(fig, Path(outdir) / f"{mu_name}_fit.svg")


def plot_collapse(curves, peaks, nu, outdir):
    order = curves[0].order
    by_eta = {p.eta: p for p in peaks}
    fig, ax = plt.subplots(figsize=(5, 3.6))
    for i, c in enumerate(sorted(curves, key=lambda c: c.eta)):
        p = by_eta[c.eta]
        g, chi = c.usable()
        ax.plot(c.eta ** (1 / nu) * (g - p.g_m), chi / p.chi_max,
                label=rf"$\eta={c.eta:g}$", **_style(i))
    ax.set_xlabel(rf"$\eta^{{1/\nu}}(g-g_m)$, $\nu={nu:.3f}$")
    ax.set_ylabel(rf"${_symbol(order)}/{_symbol(order)}(g_m)$")
    ax.legend(frameon=False)
    return _save(fig, Path(outdir) / f"{_stem(order)}_collapse.svg")


def plot_all(curves_by_order, peaks, fits, collapse, outdir):
    """All figures for every order that has curves, peaks, a fit and a collapse."""
    written = []
    for order, curves in sorted(curves_by_order.items()):
        written.append(plot_curves(curves, outdir))
        pk = sorted((p for p in peaks if p.order == order), key=lambda p: p.eta)
        if order in fits and pk:
            written.append(plot_fit(pk, fits[order], outdir))
        if order in collapse and pk:
            written.append(plot_collapse(curves, pk, collapse[order]["nu"], outdir))
    return written
