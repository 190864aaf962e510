"""Run configuration and CSV persistence.

Every file written here starts with ``#`` header lines: a schema line, then
the full run configuration as ``# config: key=value`` lines. Floats are
written with 17 significant digits so reading a file back reproduces the
in-memory values exactly.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .scaling import CollapseResult, DynamicalExponent, PeakEstimate, ScalingFit, SusceptibilityCurve
from .truncation import ConvergencePolicy

SCHEMA_VERSION = 1
CURVE_COLUMNS = ("eta", "r_order", "g", "chi", "n_fock", "converged")
PEAK_COLUMNS = ("eta", "r_order", "g_m", "chi_max")
FIT_COLUMNS = ("r_order", "mu", "intercept", "stderr", "R2")
COLLAPSE_COLUMNS = ("r_order", "nu", "objective")
COLLAPSE_NOTE = "x=eta^(1/nu)*(g-g_m), y=chi/chi_max, master=bracketing local line"


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


@dataclass(frozen=True)
class RunConfig:
    eta_list: tuple[float, ...] = (300.0, 400.0, 500.0, 600.0, 700.0)
    r_orders: tuple[int, ...] = (2, 4)
    g_min: float = 0.80
    g_max: float = 1.05
    g_step: float = 0.002
    n_start: int = 64
    growth: float = 1.5
    rel_tol: float = 1e-8
    n_cap: int = 4096
    nu_min: float = 1.0
    nu_max: float = 2.0
    nu_tol: float = 1e-3
    output_dir: str = "results"
    plot: bool = True
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        self.validate()

    def validate(self):
        if not self.eta_list or any(not (math.isfinite(e) and e > 0) for e in self.eta_list):
            raise ConfigError("eta_list: every eta must be a positive number")
        if len(set(self.eta_list)) != len(self.eta_list):
            raise ConfigError("eta_list: duplicate values")
        if not self.r_orders or any(o < 2 or o % 2 for o in self.r_orders):
            raise ConfigError("r_orders: susceptibility orders must be even integers >= 2")
        if not 0 <= self.g_min < self.g_max <= 1.1:
            raise ConfigError("g_min/g_max: need 0 <= g_min < g_max <= 1.1")
        if not 0 < self.g_step <= self.g_max - self.g_min:
            raise ConfigError("g_step: must be positive and no larger than the window")
        try:
            self.policy
        except ValueError as exc:
            name = str(exc).split()[0]
            raise ConfigError(f"{name}: {exc}") from None
        if not 0 < self.nu_min < self.nu_max:
            raise ConfigError("nu_min/nu_max: need 0 < nu_min < nu_max")
        if not 0 < self.nu_tol < self.nu_max - self.nu_min:
            raise ConfigError("nu_tol: must be positive and smaller than the nu interval")
        if self.workers < 1:
            raise ConfigError("workers: must be >= 1")
        if not self.output_dir:
            raise ConfigError("output_dir: empty")

    @property
    def policy(self) -> ConvergencePolicy:
        return ConvergencePolicy(self.n_start, self.growth, self.rel_tol, self.n_cap)

    @property
    def g_grid(self) -> np.ndarray:
        from .scaling import default_grid
        return default_grid(self.g_min, self.g_max, self.g_step)

    def lines(self) -> list[str]:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(fmt(x) for x in v)
            elif isinstance(v, bool):
                v = "true" if v else "false"
            elif isinstance(v, (int, float)):
                v = fmt(v)
            out.append(f"{f.name}={v}")
        return out


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _convert(key, raw):
    kind = _TYPES[key]
    raw = raw.strip()
    try:
        if kind == "tuple[float, ...]":
            return tuple(float(x) for x in raw.split(",") if x.strip())
        if kind == "tuple[int, ...]":
            return tuple(int(x) for x in raw.split(",") if x.strip())
        if kind == "float":
            return float(raw)
        if kind == "int":
            return int(raw)
        if kind == "bool":
            low = raw.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(raw)
        return raw
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r}") from None


def parse_config(lines, base: RunConfig | None = None) -> RunConfig:
    """Flat ``key = value`` text; ``#`` starts a comment. Unknown keys are errors."""
    values = {}
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in _TYPES:
            raise ConfigError(f"{key}: unknown configuration key (line {lineno})")
        values[key] = _convert(key, raw)
    return replace(base or RunConfig(), **values)


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from None
    return parse_config(text.splitlines())


def header(kind: str, config: RunConfig, extra: dict | None = None) -> list[str]:
    out = [f"# schema: rabi-qpt/{kind}/{SCHEMA_VERSION}"]
    out += [f"# config: {line}" for line in config.lines()]
    for k, v in (extra or {}).items():
        out.append(f"# {k}: {v}")
    return out


def _write(path: Path, head: list[str], columns, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        for line in head:
            fh.write(line + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in row])


class CsvFormatError(ValueError):
    pass


def read_table(path):
    """(header dict, config lines, list of row dicts) from one of our CSV files."""
    path = Path(path)
    meta, cfg, body = {}, [], []
    try:
        text = path.read_text().splitlines()
    except OSError as exc:
        raise CsvFormatError(f"{path}: {exc}") from None
    start = 0
    for start, line in enumerate(text):
        if not line.startswith("#"):
            break
        key, _, val = line[1:].strip().partition(": ")
        if key == "config":
            cfg.append(val)
        else:
            meta[key] = val
    else:
        start = len(text)
    if "schema" not in meta:
        raise CsvFormatError(f"{path}:1: missing schema line")
    reader = csv.reader(text[start:])
    try:
        columns = next(reader)
    except StopIteration:
        raise CsvFormatError(f"{path}: no column header") from None
    for i, row in enumerate(reader, start + 2):
        if len(row) != len(columns):
            raise CsvFormatError(f"{path}:{i}: expected {len(columns)} fields, got {len(row)}")
        body.append((i, dict(zip(columns, row))))
    return meta, cfg, columns, body


def config_from_header(cfg_lines) -> RunConfig:
    return parse_config(cfg_lines)


def curve_filename(eta, order) -> str:
    return f"curve_eta{fmt(eta)}_order{order}.csv"


def write_curve(directory, curve: SusceptibilityCurve, config: RunConfig) -> Path:
    path = Path(directory) / curve_filename(curve.eta, curve.order)
    rows = [(curve.eta, curve.order, g, c, int(n), bool(ok))
            for g, c, n, ok in zip(curve.g, curve.chi, curve.n_fock, curve.converged)]
    _write(path, header("curve", config), CURVE_COLUMNS, rows)
    return path


def read_curve(path) -> tuple[SusceptibilityCurve, RunConfig]:
    meta, cfg, columns, body = read_table(path)
    if not meta["schema"].startswith("rabi-qpt/curve/"):
        raise CsvFormatError(f"{path}:1: not a curve file ({meta['schema']})")
    if tuple(columns) != CURVE_COLUMNS:
        raise CsvFormatError(f"{path}: columns {columns} != {list(CURVE_COLUMNS)}")
    if not body:
        raise CsvFormatError(f"{path}: no data rows")
    g, chi, n, conv = [], [], [], []
    etas, orders = set(), set()
    for lineno, row in body:
        try:
            etas.add(float(row["eta"]))
            orders.add(int(row["r_order"]))
            g.append(float(row["g"]))
            chi.append(float(row["chi"]))
            n.append(int(row["n_fock"]))
            conv.append(row["converged"] == "1")
        except ValueError as exc:
            raise CsvFormatError(f"{path}:{lineno}: {exc}") from None
    if len(etas) != 1 or len(orders) != 1:
        raise CsvFormatError(f"{path}: mixed eta or r_order values")
    g = np.array(g)
    if np.any(np.diff(g) <= 0):
        raise CsvFormatError(f"{path}: g not strictly increasing")
    curve = SusceptibilityCurve(etas.pop(), orders.pop(), g, np.array(chi), np.array(n), np.array(conv))
    return curve, config_from_header(cfg)


def write_peaks(path, peaks, config):
    rows = [(p.eta, p.order, p.g_m, p.chi_max) for p in sorted(peaks, key=lambda p: (p.order, p.eta))]
    _write(Path(path), header("peaks", config), PEAK_COLUMNS, rows)


def read_peaks(path) -> list[PeakEstimate]:
    _, _, columns, body = read_table(path)
    if tuple(columns) != PEAK_COLUMNS:
        raise CsvFormatError(f"{path}: columns {columns} != {list(PEAK_COLUMNS)}")
    out = []
    for lineno, row in body:
        try:
            out.append(PeakEstimate(float(row["eta"]), int(row["r_order"]),
                                    float(row["g_m"]), float(row["chi_max"])))
        except ValueError as exc:
            raise CsvFormatError(f"{path}:{lineno}: {exc}") from None
    return out


def write_fits(path, fits, config):
    rows = [(f.order, f.mu, f.intercept, f.stderr, f.r2) for f in sorted(fits, key=lambda f: f.order)]
    _write(Path(path), header("fits", config), FIT_COLUMNS, rows)


def read_fits(path) -> dict[int, dict]:
    _, _, columns, body = read_table(path)
    if tuple(columns) != FIT_COLUMNS:
        raise CsvFormatError(f"{path}: columns {columns} != {list(FIT_COLUMNS)}")
    out = {}
    for lineno, row in body:
        try:
            out[int(row["r_order"])] = {k: float(row[k]) for k in FIT_COLUMNS[1:]}
        except ValueError as exc:
            raise CsvFormatError(f"{path}:{lineno}: {exc}") from None
    return out


def write_collapse(path, results, z: DynamicalExponent | None, config):
    """One row per order; an optional final ``z,<z>,<stderr>`` row."""
    rows = [(c.order, c.nu, c.objective) for c in sorted(results, key=lambda c: c.order)]
    if z is not None:
        rows.append(("z", z.z, z.stderr))
    extra = {"collapse": COLLAPSE_NOTE}
    _write(Path(path), header("collapse", config, extra), COLLAPSE_COLUMNS, rows)


def read_collapse(path):
    """({order: {'nu', 'objective'}}, (z, stderr) or None)."""
    _, _, columns, body = read_table(path)
    if tuple(columns) != COLLAPSE_COLUMNS:
        raise CsvFormatError(f"{path}: columns {columns} != {list(COLLAPSE_COLUMNS)}")
    out, z = {}, None
    for lineno, row in body:
        try:
            if row["r_order"] == "z":
                z = (float(row["nu"]), float(row["objective"]))
            else:
                out[int(row["r_order"])] = {"nu": float(row["nu"]), "objective": float(row["objective"])}
        except ValueError as exc:
            raise CsvFormatError(f"{path}:{lineno}: {exc}") from None
    return out, z
