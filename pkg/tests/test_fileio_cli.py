import json
import math
from pathlib import Path

import numpy as np
import pytest

from mhhelix import cli
from mhhelix.axisfit import estimate_axis_mh, optls_fit
from mhhelix.errors import InputError, ParseError
from mhhelix.fileio import (FitReport, parse_pdb_ca, parse_points_csv, read_report,
                            write_pdb_ca, write_points_csv, write_report)
from mhhelix.geometry import HelixParams, angle_between_axes, simulate_helix
from mhhelix.simlab import ALPHA_TURN

DATA = Path(__file__).parent / "data"
# construction axis of the ideal 12-residue fixture (r 2.3, rise 1.5, 3.6 residues/turn)
FIXTURE_AXIS = np.array([0.2, -0.4, 0.9]) / math.sqrt(1.01)


def test_csv_round_trip_is_exact(tmp_path, rng):
    pts = rng.standard_normal((17, 3)) * 1e3
    path = tmp_path / "p.csv"
    write_points_csv(path, pts)
    assert np.array_equal(parse_points_csv(path).points, pts)


def test_csv_headerless_and_blank_lines(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("1,2,3\n\n4, 5, 6\n")
    assert np.array_equal(parse_points_csv(path).points, [[1, 2, 3], [4, 5, 6]])


def test_csv_bad_row_names_line(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("x,y,z\n1,2\n")
    with pytest.raises(ParseError) as exc:
        parse_points_csv(path)
    assert exc.value.line == 2
    path.write_text("x,y,z\n1,2,3\n1,nan,3\n")
    with pytest.raises(ParseError) as exc:
        parse_points_csv(path)
    assert exc.value.line == 3


def test_csv_2d(tmp_path):
    path = tmp_path / "q.csv"
    path.write_text("x,y\n1,2\n3,4\n")
    assert parse_points_csv(path, dim=2).shape == (2, 2)


def test_pdb_selection():
    cloud = parse_pdb_ca(DATA / "helix12.pdb", chain="A")
    assert len(cloud) == 12
    assert cloud.labels[0] == "A:ALA101"
    both = parse_pdb_ca(DATA / "helix12.pdb")
    assert len(both) == 18
    part = parse_pdb_ca(DATA / "helix12.pdb", chain="A", residue_range=(103, 108))
    assert len(part) == 6
    assert np.array_equal(part.points, cloud.points[2:8])
    with pytest.raises(InputError):
        parse_pdb_ca(DATA / "helix12.pdb", chain="Z")


def test_pdb_alt_location_logged(caplog):
    parse_pdb_ca(DATA / "helix12.pdb", chain="A")
    assert any("alternate location" in r.getMessage() for r in caplog.records)


def test_pdb_malformed(tmp_path):
    path = tmp_path / "bad.pdb"
    path.write_text("ATOM      1  CA  ALA A   1      xx.xxx   0.000   0.000  1.00  0.00\n")
    with pytest.raises(ParseError) as exc:
        parse_pdb_ca(path)
    assert exc.value.line == 1


def test_pdb_write_read(tmp_path):
    p = HelixParams.with_axis(2.3, 0.86, ALPHA_TURN)
    pts = simulate_helix(p, 8, 0.0, None).points
    path = tmp_path / "h.pdb"
    write_pdb_ca(path, pts, chain="C", first_residue=10)
    back = parse_pdb_ca(path, chain="C", residue_range=(10, 17))
    assert np.allclose(back.points, pts, atol=5e-4)


@pytest.mark.parametrize("estimator", ["mh", "optls"])
def test_fixture_axis_within_one_degree(estimator):
    cloud = parse_pdb_ca(DATA / "helix12.pdb", chain="A")
    if estimator == "mh":
        w = estimate_axis_mh(cloud).w
    else:
        w = optls_fit(cloud, ALPHA_TURN).w
    angle = angle_between_axes(w if w @ FIXTURE_AXIS >= 0 else -w, FIXTURE_AXIS)
    assert math.degrees(angle) < 1.0


def test_report_round_trip(tmp_path):
    rep = FitReport(input={"path": "x", "n": 3, "source": "csv"}, estimator="mh",
                    axis=[0.0, 0.0, 1.0], p=[0.1, 0.2], mll=-1.5, inner={"rho": 2.0})
    write_report(rep, tmp_path / "r.json")
    assert read_report(tmp_path / "r.json") == rep
    write_report(rep, tmp_path / "r.csv", format="csv")
    header, row = (tmp_path / "r.csv").read_text().splitlines()
    assert "inner.rho" in header.split(",") and "axis_z" in header.split(",")


def test_cli_pipeline_matches_in_memory(tmp_path):
    pts = tmp_path / "pts.csv"
    rep = tmp_path / "rep.json"
    argv = ["simulate", "--n", "20", "--r", "2.3", "--c", "0.86", "--sigma2", "0.01",
            "--seed", "42", "--axis", "0.6,0,0.8", "--shift", "1,2,3", "--out", str(pts)]
    assert cli.main(argv) == 0
    params = HelixParams.with_axis(2.3, 0.86, ALPHA_TURN, axis=[0.6, 0, 0.8], shift=[1, 2, 3])
    cloud = simulate_helix(params, 20, 0.01, 42)
    assert np.array_equal(parse_points_csv(pts).points, cloud.points)

    assert cli.main(["fit-axis", "--input", str(pts), "--report", str(rep)]) == 0
    got = json.loads(rep.read_text())
    fit = estimate_axis_mh(cloud)
    assert got["axis"] == fit.w.tolist()
    assert got["p"] == fit.p.tolist()
    assert got["mll"] == fit.mll
    assert got["inner"]["rho"] == fit.inner_fit.params.rho
    assert got["inner"]["kappa"] == fit.inner_fit.params.kappa

    assert cli.main(["fit-axis", "--input", str(pts), "--estimator", "optls",
                     "--report", str(rep)]) == 0
    assert json.loads(rep.read_text())["axis"] == optls_fit(cloud, ALPHA_TURN).w.tolist()


def test_cli_pdb_and_init(tmp_path):
    rep = tmp_path / "rep.json"
    argv = ["fit-axis", "--input", str(DATA / "helix12.pdb"), "--pdb", "--chain", "A",
            "--residues", "101:112", "--init", "0.2,-0.4,0.9", "--report", str(rep)]
    assert cli.main(argv) == 0
    got = json.loads(rep.read_text())
    assert got["input"]["n"] == 12
    assert math.degrees(angle_between_axes(got["axis"], FIXTURE_AXIS)) < 1.0
    assert cli.main(argv[:-4] + ["--init", "optls", "--report", str(rep)]) == 0


def test_cli_circle_and_ellipsoid(tmp_path):
    t = 2 * np.pi * np.arange(16) / 16
    y = tmp_path / "y.csv"
    write_points_csv(y, np.column_stack([2 * np.cos(t), np.sin(t)]))
    rep = tmp_path / "c.json"
    assert cli.main(["fit-circle", "--input", str(y), "--ellipse", "--report", str(rep)]) == 0
    Sigma = np.array(json.loads(rep.read_text())["inner"]["Sigma"])
    assert np.allclose(np.sort(np.linalg.eigvalsh(Sigma)), [1.0, 4.0], rtol=1e-5)

    rng = np.random.default_rng(0)
    u = rng.standard_normal((60, 3))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    x = tmp_path / "x.csv"
    write_points_csv(x, u * [3.0, 1.0, 1.0])
    rep = tmp_path / "e.csv"
    assert cli.main(["fit-ellipsoid", "--input", str(x), "--tie-smallest-two",
                     "--report", str(rep)]) == 0
    assert rep.read_text().startswith("input.path")


def test_cli_bench(tmp_path):
    cfg = tmp_path / "bench.json"
    cfg.write_text(json.dumps({"configs": [{"set": 1, "replicates": 2, "seed": 5}]}))
    out, detail = tmp_path / "t.csv", tmp_path / "d.json"
    assert cli.main(["bench", "--config", str(cfg), "--out", str(out),
                     "--detail", str(detail)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 3 and lines[1].startswith("set1,30,")
    assert len(json.loads(detail.read_text())["rows"][0]["estimators"]["mh"]["axes"]) == 2


def test_cli_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y,z\n1,2\n")
    rep = tmp_path / "r.json"
    assert cli.main(["fit-axis", "--input", str(bad), "--report", str(rep)]) == 1
    assert "line 2" in capsys.readouterr().err
    assert not rep.exists()
    assert cli.main(["fit-axis", "--input", str(tmp_path / "missing.csv"),
                     "--report", str(rep)]) == 1
    cfg = tmp_path / "b.json"
    cfg.write_text("{not json")
    assert cli.main(["bench", "--config", str(cfg), "--out", str(tmp_path / "o.csv")]) == 1
    with pytest.raises(SystemExit) as exc:
        cli.main(["simulate", "--n", "3"])
    assert exc.value.code == 2


def test_cli_numeric_failure_exit_code(tmp_path, monkeypatch):
    from mhhelix.errors import ConvergenceError

    def boom(*a, **k):
        raise ConvergenceError("inner fit diverged")
    monkeypatch.setattr(cli, "estimate_axis_mh", boom)
    pts = tmp_path / "p.csv"
    write_points_csv(pts, np.random.default_rng(1).standard_normal((10, 3)))
    assert cli.main(["fit-axis", "--input", str(pts), "--report", str(tmp_path / "r.json")]) == 2
