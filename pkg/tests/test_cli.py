import csv
import json
import subprocess
import sys

import pytest

from optosqueeze.cli import OUT_ENV, parse_grid, read_config, run
from optosqueeze.errors import InvalidInput


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_steady_report(tmp_path):
    code = run(["steady", "--coop", "1e4", "--ratio", "0.954174", "--nth", "10", "--gamma-ratio", "1e-4",
                "--out", str(tmp_path)])
    assert code == 0
    summary = json.loads((tmp_path / "steady.json").read_text())
    assert summary["result"]["var_x1"] == pytest.approx(0.0479, rel=0.05)
    assert summary["result"]["beyond_3db"] is True
    assert summary["derived"]["coop"] == pytest.approx(1e4)
    assert summary["validity"]["rwa"] is True
    assert "wall_time_s" in summary["timing"]
    rows = read_rows(tmp_path / "steady.csv")
    assert rows[0] == ["ratio", "var_x1", "var_x2", "n_eff", "beta_occ"]


def test_sweep_ratio_csv_is_deterministic(tmp_path):
    args = ["sweep-ratio", "--coop", "1e4", "--ratio-grid", "0.5:0.99:25"]
    assert run(args + ["--out", str(tmp_path / "a")]) == 0
    assert run(args + ["--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "sweep-ratio.csv").read_bytes()
    assert a == (tmp_path / "b" / "sweep-ratio.csv").read_bytes()
    assert b"\r" not in a
    rows = read_rows(tmp_path / "a" / "sweep-ratio.csv")
    assert rows[0] == ["ratio", "var_x1", "var_x2", "n_eff", "beta_occ"]
    assert len(rows) == 26
    assert rows[1][0] == "0.5"
    # 12 significant digits
    assert len(rows[2][1].replace(".", "").lstrip("0")) <= 12


def test_spectrum_double_peak(tmp_path):
    assert run(["spectrum", "--coop", "1e6", "--ratio", "0.954174", "--omega-grid=-3:3:601",
                "--out", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / "spectrum.csv")
    assert rows[0] == ["omega", "s_analytic", "s_numeric"]
    res = json.loads((tmp_path / "spectrum.json").read_text())["result"]
    assert len(res["peaks"]) == 2
    assert res["max_relative_mismatch"] < 1e-8
    assert res["beta_occ_from_area"] == pytest.approx(res["beta_occ_exact"], rel=1e-6)


@pytest.mark.parametrize("cmd, header0", [
    ("optimize", "coop"), ("compare-lindblad", "coop"), ("bounds", "coop"),
])
def test_rwa_table_commands(tmp_path, cmd, header0):
    assert run([cmd, "--coop-grid", "1e2:1e6:3:log", "--out", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / f"{cmd}.csv")
    assert rows[0][0] == header0 and len(rows) == 4


def test_bad_cavity_commands(tmp_path):
    assert run(["check-validity", "--kappa-over-omega", "0.02", "--coop-grid", "1e2:1e6:3:log",
                "--out", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / "check-validity.csv")
    assert [r[-1] for r in rows[1:]] == ["1", "1", "0"]
    assert run(["third-tone", "--kappa-over-omega", "0.02", "--nth", "0", "--coop-grid", "1e2:1e2:1",
                "--grid-points", "20", "--out", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / "third-tone.csv")
    assert rows[0][-1] == "relative_change"
    a, b = float(rows[1][2]), float(rows[1][4])
    assert float(rows[1][-1]) == pytest.approx((b - a) / a, rel=1e-9)
    assert run(["floquet-sweep", "--kappa-over-omega", "0.02", "--coop-grid", "1e2:1e3:2:log",
                "--grid-points", "20", "--jobs", "2", "--out", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / "floquet-sweep.csv")
    assert [r[-1] for r in rows[1:]] == ["ok", "ok"]


def test_exit_codes(tmp_path, capsys):
    assert run(["steady", "--gamma-ratio", "-1", "--out", str(tmp_path)]) == 1
    line = capsys.readouterr().err.strip()
    assert line.startswith("optosqueeze: error exit=1 kind=InvalidInput msg=")
    assert "\n" not in line
    assert run(["nosuch"]) == 1
    assert run(["floquet-sweep", "--out", str(tmp_path)]) == 1  # needs kappa/Omega > 0
    assert run(["steady", "--ratio", "1.5", "--out", str(tmp_path)]) == 2
    assert "kind=NotHurwitz" in capsys.readouterr().err


def test_config_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\ncoop = 1e5\nnth = 2\n")
    assert run(["steady", "--config", str(cfg), "--nth", "0", "--out", str(tmp_path)]) == 0
    echo = json.loads((tmp_path / "steady.json").read_text())["config"]
    assert echo["coop"] == 1e5 and echo["nth"] == 0.0 and echo["kappa"] == 1.0


def test_config_rejects_unknown_keys(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("coop = 1e5\ncolour = red\n")
    with pytest.raises(InvalidInput):
        read_config(cfg)
    assert run(["steady", "--config", str(cfg), "--out", str(tmp_path)]) == 1


def test_parse_grid():
    g = parse_grid("1e2:1e4:3:log")
    assert list(g.values()) == pytest.approx([1e2, 1e3, 1e4])
    for bad in ("1:2", "a:2:3", "2:1:3", "0:1:3:log", "1:2:3:cubic"):
        with pytest.raises(InvalidInput):
            parse_grid(bad)


def test_env_output_dir_and_console_script(tmp_path):
    env = {**__import__("os").environ, OUT_ENV: str(tmp_path / "envout")}
    proc = subprocess.run([sys.executable, "-m", "optosqueeze.cli", "steady"], env=env,
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "envout" / "steady.csv").exists()
