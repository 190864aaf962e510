import filecmp
from pathlib import Path

import numpy as np
import pytest

from rabi_qpt import cli, files
from rabi_qpt.errors import ConfigError
from rabi_qpt.scaling import DynamicalExponent, scan_curve

SMALL = """\
# three eta, chi_F only, coarse window
eta_list = 300, 500, 700
r_orders = 2
g_min = 0.9
g_max = 1.05
g_step = 0.005
plot = false
"""


@pytest.fixture(scope="module")
def default_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("default")
    assert cli.main(["scan", "--out", str(out)]) == 0
    assert cli.main(["analyze", "--in", str(out)]) == 0
    return out


def test_parse_config_and_echo_roundtrip():
    cfg = files.parse_config(SMALL.splitlines())
    assert cfg.eta_list == (300.0, 500.0, 700.0) and cfg.r_orders == (2,)
    assert cfg.plot is False and cfg.n_start == 64
    assert files.parse_config(cfg.lines()) == cfg
    assert len(cfg.g_grid) == 31


@pytest.mark.parametrize("text,key", [
    ("etas = 300", "etas"),
    ("g_step = fast", "g_step"),
    ("rel_tol = 1e-3", "rel_tol"),
    ("r_orders = 3", "r_orders"),
    ("g_max = 1.5", "g_max"),
    ("eta_list = -1, 2", "eta_list"),
    ("plot = maybe", "plot"),
])
def test_config_errors_name_the_field(text, key):
    with pytest.raises(ConfigError, match=key):
        files.parse_config([text])


def test_fmt_is_exact():
    for x in (0.1, 1 / 3, 2.0**-1074, 1e300, 1570.8656728324841):
        assert float(files.fmt(x)) == x
    assert files.fmt(True) == "1" and files.fmt(7) == "7"


def test_curve_roundtrip(tmp_path):
    cfg = files.parse_config(SMALL.splitlines())
    curve = scan_curve(300, 0, [0.3, 0.7, 1.0])
    path = files.write_curve(tmp_path, curve, cfg)
    back, cfg_back = files.read_curve(path)
    assert cfg_back == cfg
    for field in ("g", "chi", "n_fock", "converged"):
        assert np.array_equal(getattr(back, field), getattr(curve, field))
    text = path.read_text().splitlines()
    assert text[0] == "# schema: rabi-qpt/curve/1"
    assert "# config: eta_list=300,500,700" in text
    assert "eta,r_order,g,chi,n_fock,converged" in text


def test_corrupt_curve_reports_line(tmp_path):
    cfg = files.RunConfig()
    path = files.write_curve(tmp_path, scan_curve(300, 0, [0.3, 0.7]), cfg)
    lines = path.read_text().splitlines()
    eta, order, g, _, n, ok = lines[-1].split(",")
    lines[-1] = ",".join([eta, order, g, "oops", n, ok])
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(files.CsvFormatError, match=rf"{path.name}:{len(lines)}"):
        files.read_curve(path)


def test_collapse_file_z_row(tmp_path):
    cfg = files.RunConfig()
    files.write_collapse(tmp_path / "c.csv", [], DynamicalExponent(0.33, 0.01), cfg)
    rows, z = files.read_collapse(tmp_path / "c.csv")
    assert rows == {} and z == (0.33, 0.01)


def test_default_scan_cardinality_and_headers(default_run):
    curves = sorted(default_run.glob("curve_*.csv"))
    assert len(curves) == 10
    for p in list(curves) + [default_run / n for n in ("peaks.csv", "fits.csv", "collapse.csv")]:
        head = p.read_text().splitlines()
        assert head[0].startswith("# schema: rabi-qpt/") and head[0].endswith("/1")
        assert sum(line.startswith("# config: ") for line in head) == len(files.RunConfig().lines())


def test_default_scan_rows_sorted(default_run):
    curve, _ = files.read_curve(default_run / "curve_eta300_order2.csv")
    assert len(curve.g) == 126 and np.all(np.diff(curve.g) > 0)


def test_scan_is_byte_identical(default_run, tmp_path):
    assert cli.main(["scan", "--out", str(tmp_path)]) == 0
    for p in default_run.glob("curve_*.csv"):
        assert filecmp.cmp(p, tmp_path / p.name, shallow=False)


def test_analysis_products(default_run):
    peaks = files.read_peaks(default_run / "peaks.csv")
    assert len(peaks) == 10
    fits = files.read_fits(default_run / "fits.csv")
    assert set(fits) == {2, 4}
    assert fits[2]["mu"] == pytest.approx(1.34, abs=0.05)
    assert fits[4]["mu"] == pytest.approx(2.01, abs=0.05)
    collapse, z = files.read_collapse(default_run / "collapse.csv")
    for order in (2, 4):
        assert collapse[order]["nu"] == pytest.approx(1.49, abs=0.07)
    assert z[0] == pytest.approx(0.33, abs=0.05)
    assert "bracketing local line" in (default_run / "collapse.csv").read_text()


def test_plot_writes_six_svgs(default_run, tmp_path):
    assert cli.main(["plot", "--in", str(default_run), "--out", str(tmp_path)]) == 0
    names = sorted(p.name for p in tmp_path.glob("*.svg"))
    assert names == sorted(["chi_f_curves.svg", "mu_f_fit.svg", "chi_f_collapse.svg",
                            "chi_4_curves.svg", "mu_4_fit.svg", "chi_4_collapse.svg"])
    # analyze already rendered the same figures next to the CSVs (plot=true by default)
    for n in names:
        assert filecmp.cmp(tmp_path / n, default_run / n, shallow=False)
    text = (tmp_path / "chi_f_collapse.svg").read_text()
    assert text.lstrip().startswith("<?xml") and "<svg" in text


def test_pipeline_idempotent(default_run, tmp_path):
    for p in default_run.glob("curve_*.csv"):
        (tmp_path / p.name).write_bytes(p.read_bytes())
    assert cli.main(["analyze", "--in", str(tmp_path)]) == 0
    for name in ("peaks.csv", "fits.csv", "collapse.csv"):
        assert filecmp.cmp(default_run / name, tmp_path / name, shallow=False)


def test_small_config_pipeline(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(SMALL + f"output_dir = {tmp_path / 'out'}\n")
    assert cli.main(["scan", "--config", str(cfg)]) == 0
    out = tmp_path / "out"
    assert len(list(out.glob("curve_*.csv"))) == 3
    assert cli.main(["analyze", "--in", str(out)]) == 0
    assert not list(out.glob("*.svg"))
    _, z = files.read_collapse(out / "collapse.csv")
    assert z is None


def test_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("n_strat = 64\n")
    assert cli.main(["scan", "--config", str(bad)]) == 1
    assert "n_strat" in capsys.readouterr().err
    assert cli.main(["scan", "--config", str(tmp_path / "missing.cfg")]) == 1
    assert cli.main(["analyze", "--in", str(tmp_path)]) == 1
    assert cli.main(["plot", "--in", str(tmp_path)]) == 1
    tight = tmp_path / "tight.cfg"
    tight.write_text("eta_list = 700\nr_orders = 2\ng_min = 0.99\ng_max = 1.0\ng_step = 0.01\n"
                     "n_start = 8\nn_cap = 10\nplot = false\n")
    assert cli.main(["scan", "--config", str(tight), "--out", str(tmp_path / "t")]) == 2
    curve, _ = files.read_curve(tmp_path / "t" / "curve_eta700_order2.csv")
    assert not curve.converged.any()


def test_verify_command(capsys):
    assert cli.main(["verify"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out and all(line.startswith("PASS") for line in out)


def test_shipped_config_matches_defaults():
    path = Path(__file__).resolve().parents[1] / "configs" / "default.cfg"
    assert files.load_config(path) == files.RunConfig()
