import csv
import io
import json
import os

import numpy as np
import pytest

from gasket_bvp import cli
from gasket_bvp.harmonics import HaarSpectrum
from gasket_bvp.mesh import build_mesh


@pytest.fixture
def spectrum_file(tmp_path):
    p = tmp_path / "s.json"
    p.write_text(HaarSpectrum(1.0, 0.0, {"": 1.0, "1": 0.5}).to_json())
    return p


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_ratios_table(capsys):
    code, out, _ = run(capsys, "ratios", "--seq", "1,3,5,7", "--depth", "4")
    assert code == 0
    rows = [l for l in out.splitlines() if l.strip() and l.split()[0].isdigit()]
    assert len(rows) == 4


def test_ratios_json(capsys):
    code, out, _ = run(capsys, "ratios", "--x", "1.0", "--json")
    d = json.loads(out)
    assert code == 0 and d["patterned"]
    assert d["levels"][0]["m0"] == pytest.approx(0.3)


def test_ratios_sweep(capsys, tmp_path):
    path = tmp_path / "sweep.csv"
    code, _, _ = run(capsys, "ratios", "--sweep", "0.01:1:500", "--out", str(path), "--plot", str(tmp_path / "s.png"))
    rows = list(csv.DictReader(path.open()))
    assert code == 0 and len(rows) == 500
    assert all(0 <= float(r["m0"]) <= 0.3 for r in rows)
    assert (tmp_path / "s.png").stat().st_size > 0


def test_solve_harmonic(capsys, spectrum_file, tmp_path):
    out = tmp_path / "h.csv"
    code, _, _ = run(capsys, "solve", "harmonic", "--x", "1.0", "--spectrum", str(spectrum_file),
                     "--level", "6", "--out", str(out), "--plot", str(tmp_path / "h.png"))
    rows = list(csv.reader(out.open()))
    assert code == 0
    assert rows[0][:3] == ["vertex_id", "x", "y"]
    assert 1 < len(rows) - 1 < build_mesh(6).n_vertices
    top = [r for r in rows[1:] if r[0] == "0"][0]
    assert float(top[3]) == 1.0


def test_solve_green(capsys, tmp_path):
    out = tmp_path / "u.csv"
    code, _, err = run(capsys, "solve", "green", "--x", "1.0", "--forcing", "const:1", "--m", "3",
                       "--out", str(out))
    assert code == 0 and "max |u| on boundary = 0" in err
    vals = np.array([float(r["u"]) for r in csv.DictReader(out.open())])
    assert vals.max() > 0


def test_solve_green_csv_forcing(capsys, tmp_path):
    out = tmp_path / "u.csv"
    run(capsys, "solve", "green", "--x", "1.0", "--m", "2", "--level", "5", "--out", str(out))
    code, _, _ = run(capsys, "solve", "green", "--x", "1.0", "--m", "2", "--level", "5",
                     "--forcing", f"csv:{out}", "--out", str(tmp_path / "v.csv"))
    assert code == 0


def test_solve_dtn(capsys, spectrum_file):
    code, out, _ = run(capsys, "solve", "dtn", "--x", "1.0", "--spectrum", str(spectrum_file))
    d = json.loads(out)
    c = {e["word"]: e["c"] for e in d["coeffs"]}
    assert code == 0
    assert c[""] == pytest.approx(35 / 8)
    assert c["1"] == pytest.approx(0.5 * 175 / 12)


def test_mesh_export(capsys):
    code, out, _ = run(capsys, "mesh", "--level", "2")
    d = json.loads(out)
    assert code == 0 and len(d["vertices"]) == 15 and len(d["edges"]) == 27


def test_obstruction(capsys):
    code, out, _ = run(capsys, "obstruction", "--max-n", "4")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and [int(r["N"]) for r in rows] == [2, 3, 4]


def test_verify_group(capsys, tmp_path):
    report = tmp_path / "r.json"
    code, out, _ = run(capsys, "verify", "--group", "ratios", "--trials", "100", "--report", str(report))
    assert code == 0 and "ALL PASS" in out
    assert all(r["passed"] for r in json.loads(report.read_text())["ratios"])


def test_verify_green_with_x(capsys):
    code, out, _ = run(capsys, "verify", "--group", "green", "--x", "1.0", "--m", "3")
    assert code == 0
    assert "reproducing identity residual" in out


def test_verify_deterministic(capsys):
    _, a, _ = run(capsys, "verify", "--group", "energies", "--seed", "42")
    _, b, _ = run(capsys, "verify", "--group", "energies", "--seed", "42")
    strip = lambda s: [l for l in s.splitlines() if "runtime" not in l]
    assert strip(a) == strip(b)


def test_verify_failure_exit_code(capsys, monkeypatch):
    from gasket_bvp import checks

    bad = checks.CheckResult("always fails", False, 1.0, 0.0)
    monkeypatch.setitem(checks.GROUPS, "ratios", lambda a: [bad])
    code, out, _ = run(capsys, "verify", "--group", "ratios")
    assert code == 1 and "[FAIL] always fails" in out


@pytest.mark.parametrize("argv", [
    ["solve", "harmonic", "--x", "1.0", "--level", "5"],
    ["solve", "harmonic", "--x", "1.0", "--spectrum", "missing.json", "--level", "5"],
    ["ratios", "--x", "nonsense"],
    ["ratios"],
    ["ratios", "--sweep", "0:1"],
    ["mesh", "--level", "40"],
    ["verify", "--group", "nope"],
    ["solve", "green", "--x", "1,3", "--m", "3"],
])
def test_usage_errors(capsys, argv):
    assert cli.main(argv) == 2


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["bogus"])
    assert exc.value.code == 2


def test_threads_sets_environment(capsys, monkeypatch):
    for var in cli.THREAD_VARS:
        monkeypatch.delenv(var, raising=False)
    cli.main(["--threads", "2", "mesh", "--level", "0"])
    assert all(os.environ[v] == "2" for v in cli.THREAD_VARS)
    assert cli.main(["--threads", "0", "mesh", "--level", "0"]) == 2
