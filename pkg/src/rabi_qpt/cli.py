"""Command line: ``rabi scan | analyze | plot | verify``.

Exit codes: 0 success, 1 configuration or input error, 2 numerical failure
(non-convergence, failed peak search or collapse, failed self-check).
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import files, plotting
from .errors import CollapseError, ConfigError, ConvergenceError, PeakError, SolverError
from .pipeline import analyze, run_scan

log = logging.getLogger("rabi_qpt")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2


def cmd_scan(args):
    config = files.load_config(args.config) if args.config else files.RunConfig()
    outdir = Path(args.out or config.output_dir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"output_dir: cannot create {outdir}: {exc}") from None
    curves = run_scan(config)
    for c in curves:
        path = files.write_curve(outdir, c, config)
        log.info("wrote %s", path)
    bad = [c for c in curves if not c.all_converged]
    for c in bad:
        print(f"non-converged points: eta={c.eta:g} order={c.order} "
              f"({int((~c.converged).sum())} of {len(c.g)})", file=sys.stderr)
    return EXIT_NUMERIC if bad else EXIT_OK


def _load_curves(indir):
    paths = sorted(Path(indir).glob("curve_*.csv"))
    if not paths:
        raise files.CsvFormatError(f"{indir}: no curve_*.csv files")
    curves, configs = [], set()
    for p in paths:
        curve, config = files.read_curve(p)
        curves.append(curve)
        configs.add(config)
    if len(configs) != 1:
        raise files.CsvFormatError(f"{indir}: curve files come from different configurations")
    return curves, configs.pop()


def cmd_analyze(args):
    curves, config = _load_curves(args.indir)
    result = analyze(curves, config)
    out = Path(args.indir)
    files.write_peaks(out / "peaks.csv", result.peaks, config)
    files.write_fits(out / "fits.csv", result.fits.values(), config)
    files.write_collapse(out / "collapse.csv", result.collapses.values(), result.z, config)
    for order, fit in sorted(result.fits.items()):
        print(f"order {order}: mu = {fit.mu:.4f} +- {fit.stderr:.4f} (R2 {fit.r2:.6f}), "
              f"nu = {result.collapses[order].nu:.4f}")
    if result.z is not None:
        print(f"z = {result.z.z:.4f} +- {result.z.stderr:.4f}")
    if config.plot:
        _plot(out, out)
    return EXIT_OK


def _plot(indir, outdir):
    curves, _ = _load_curves(indir)
    by_order = {}
    for c in curves:
        by_order.setdefault(c.order, []).append(c)
    for name in ("peaks.csv", "fits.csv", "collapse.csv"):
        if not (Path(indir) / name).exists():
            raise files.CsvFormatError(f"{indir}/{name}: missing; run `rabi analyze` first")
    peaks = files.read_peaks(Path(indir) / "peaks.csv")
    fits = files.read_fits(Path(indir) / "fits.csv")
    collapse, _ = files.read_collapse(Path(indir) / "collapse.csv")
    Path(outdir).mkdir(parents=True, exist_ok=True)
    for path in plotting.plot_all(by_order, peaks, fits, collapse, outdir):
        log.info("wrote %s", path)


def cmd_plot(args):
    _plot(args.indir, args.out or args.indir)
    return EXIT_OK


def cmd_verify(args):
    from .verify import run_checks

    ok = True
    for name, passed, detail in run_checks():
        print(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
        ok &= passed
    return EXIT_OK if ok else EXIT_NUMERIC


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rabi", description="Fidelity susceptibility and finite-frequency scaling of the quantum Rabi model.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scan", help="sweep chi over the g window for every eta and order")
    p.add_argument("--config", help="key = value configuration file (defaults if omitted)")
    p.add_argument("--out", help="override output_dir")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("analyze", help="peaks, power-law fits and collapse from curve files")
    p.add_argument("--in", dest="indir", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("plot", help="render SVG figures from analysis outputs")
    p.add_argument("--in", dest="indir", required=True)
    p.add_argument("--out", help="figure directory (default: the input directory)")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("verify", help="run the analytic and cross-route self-checks")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, files.CsvFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, PeakError, CollapseError, SolverError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
