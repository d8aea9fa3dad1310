import csv
import io
import json
import math
import subprocess
import sys

import pytest

from logpot.cli import main
from logpot.discretize import self_weight


@pytest.fixture
def files(tmp_path):
    out = {}
    for name, obj in {
        "disc": {"type": "disc", "center": [0, 0], "radius": 1},
        "tri": {"type": "triangle", "vertices": [[0, 0], [1, 0], [0, 1]]},
        "unit": {"type": "polygon", "vertices": [[0, 0], [1, 0], [1, 1], [0, 1]]},
        "square": {"type": "polygon", "vertices": [[0, 0], [math.sqrt(math.pi), 0],
                                                   [math.sqrt(math.pi)] * 2, [0, math.sqrt(math.pi)]]},
    }.items():
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(obj))
        out[name] = str(p)
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    out["bad"] = str(bad)
    return out


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_spectrum_disc(capsys, files):
    code, out = run(capsys, "spectrum", "--domain", files["disc"], "--h", "0.05")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out.out)))
    assert list(rows[0]) == ["index", "eigenvalue", "charnum"]
    assert abs(float(rows[0]["charnum"]) - 5.783) / 5.783 < 0.02
    assert len(rows[0]["eigenvalue"].replace("0.", "").lstrip("0")) >= 15


def test_spectrum_single_cell(capsys, files):
    code, out = run(capsys, "spectrum", "--domain", files["unit"], "--h", "1.0")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out.out)))
    assert len(rows) == 1
    assert float(rows[0]["eigenvalue"]) == self_weight(1.0)


def test_bad_input_exit_2(capsys, files, tmp_path):
    assert run(capsys, "spectrum", "--domain", files["bad"], "--h", "0.1")[0] == 2
    assert run(capsys, "spectrum", "--domain", str(tmp_path / "missing.json"), "--h", "0.1")[0] == 2
    code, out = run(capsys, "spectrum", "--domain", files["disc"], "--h", "0.01")
    assert code == 2 and "grid too fine" in out.err
    with pytest.raises(SystemExit) as exc:
        main(["spectrum", "--h", "0.1"])
    assert exc.value.code == 2


def test_disc_oracle(capsys):
    code, out = run(capsys, "disc-oracle", "--p", "2,inf", "--charnums", "3", "--format", "json")
    assert code == 0
    obj = json.loads(out.out)
    assert obj["schatten"][0]["value"] == pytest.approx(0.1118667226 ** 0.5, rel=1e-8)
    assert obj["charnums"][0]["multiplicity"] == 3


def test_trace_mc(capsys, files):
    code, out = run(capsys, "trace-mc", "--domain", files["disc"], "--p", "2", "--samples", "20000",
                    "--seed", "4")
    assert code == 0
    rec = json.loads(out.out)[0]
    assert set(rec) == {"p", "mean", "stderr", "n", "seed"}
    assert run(capsys, "trace-mc", "--domain", files["disc"], "--p", "2.5", "--samples", "20000")[0] == 2


def test_schatten(capsys, files):
    code, out = run(capsys, "schatten", "--domain", files["disc"], "--h", "0.1", "--p", "2,inf",
                    "--format", "json")
    assert code == 0
    rows = json.loads(out.out)
    assert rows[1]["p"] == "inf"


def test_verify_bll(capsys, files):
    code, out = run(capsys, "verify", "bll", "--domain", files["square"], "--p", "2",
                    "--samples", "100000", "--format", "csv")
    assert code == 0
    assert "PASS" in out.out
    code, _ = run(capsys, "verify", "bll", "--domain", files["square"], "--domain", files["disc"],
                  "--p", "2", "--samples", "100000")
    assert code == 2


def test_verify_disc_max_exit_codes(capsys, files, tmp_path):
    svg = tmp_path / "n.svg"
    code, out = run(capsys, "verify", "disc-max", "--domain", files["disc"], "--p", "2",
                    "--h", str(math.sqrt(math.pi) / 12), "--svg", str(svg))
    assert code == 0
    rep = json.loads(out.out)
    assert all(v["verdict"] != "FAIL" for v in rep["verdicts"])
    assert svg.read_text().startswith("<svg")
    code, out = run(capsys, "verify", "disc-max", "--domain", files["unit"], "--p", "2")
    assert code == 2 and "area must be pi" in out.err


def test_verify_triangles_rejects_polygons(capsys, files):
    assert run(capsys, "verify", "triangles", "--domain", files["square"])[0] == 2


def test_bvp_and_decomp(capsys, files):
    code, out = run(capsys, "bvp-check", "--domain", files["disc"], "--h", "0.08,0.04",
                    "--source", "zero", "--format", "csv")
    assert code == 0
    code, out = run(capsys, "decomp-check")
    assert code == 0
    assert json.loads(out.out)["extra"]["f_inf(1)_error"] < 1e-12


def test_symmetrize(capsys, files, tmp_path):
    code, out = run(capsys, "symmetrize", "--domain", files["tri"])
    assert code == 0
    rows = list(csv.reader(io.StringIO(out.out)))
    assert rows[0] == ["sweep", "x0", "y0", "x1", "y1", "x2", "y2", "spread"]
    assert float(rows[-1][-1]) < 1e-9
    assert run(capsys, "symmetrize", "--domain", files["disc"])[0] == 2
    assert run(capsys, "symmetrize", "--domain", files["tri"], "--max-sweeps", "1")[0] == 1


def test_symmetrize_pgm(capsys, tmp_path):
    from logpot.geometry import rasterize, equilateral_triangle
    from logpot.rearrange import read_pgm, write_pgm

    src, dst = tmp_path / "in.pgm", tmp_path / "out.pgm"
    g = rasterize(equilateral_triangle(), 0.1)
    write_pgm(g, src)
    assert run(capsys, "symmetrize", "--pgm", str(src), "--axes", "xy", "--out", str(dst))[0] == 0
    assert read_pgm(dst).count == g.count


def test_console_script(files):
    r = subprocess.run([sys.executable, "-m", "logpot.cli", "decomp-check", "--format", "csv"],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert r.stdout.startswith("r0,property,result")
