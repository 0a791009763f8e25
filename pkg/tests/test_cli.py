import csv
import io
import json

import numpy as np
import pytest

from hypercc.cli import main, parse_masses, UsageError


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_masses():
    assert list(parse_masses("equal:3")) == [1, 1, 1]
    assert list(parse_masses("1, 2.5")) == [1, 2.5]
    for bad in ("1", "a,b", "1,-2", "equal:1", "equal:x"):
        with pytest.raises(UsageError):
            parse_masses(bad)


def test_bounds(capsys):
    code, out, _ = run(capsys, "bounds", "--n", "4")
    assert code == 0 and "24" in out and "12" in out and "1 + 5t + 6t²" in out
    code, out, _ = run(capsys, "bounds", "--n", "3", "--format", "json")
    data = json.loads(out)
    assert data["schema_version"] == 1
    assert (data["total"], data["non_geodesic"], data["geodesic"], data["poincare_text"]) == (5, 2, 3, "1 + 2t")
    code, out, _ = run(capsys, "bounds", "--n", "2", "--format", "json")
    data = json.loads(out)
    assert (data["total"], data["non_geodesic"], data["geodesic"], data["poincare_text"]) == (1, 0, 1, "1")
    assert run(capsys, "bounds", "--n", "1")[0] == 1


def test_usage_errors_exit_one(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["bounds", "--n", "x"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 1
    assert run(capsys, "geodesic", "--masses", "1,0")[0] == 1
    assert run(capsys, "geodesic", "--masses", "1,1", "--c", "-1")[0] == 1
    assert run(capsys, "census", "--masses", "1,1", "--tol-zero", "0")[0] == 1


@pytest.mark.parametrize("masses,count,index", [("1,1", 1, 0), ("1,2,3", 3, 1), ("equal:4", 12, 2)])
def test_geodesic(capsys, masses, count, index):
    code, out, _ = run(capsys, "geodesic", "--masses", masses, "--format", "json")
    data = json.loads(out)
    assert code == 0 and len(data["records"]) == count
    assert all(r["index"] == index and r["nullity"] == 1 and r["lambda"] < 0 for r in data["records"])


def test_geodesic_csv_and_out(capsys, tmp_path):
    path = tmp_path / "g.csv"
    code, out, _ = run(capsys, "geodesic", "--masses", "1,2,3", "--format", "csv", "--out", str(path))
    assert code == 0 and out == ""
    rows = list(csv.DictReader(path.open()))
    assert len(rows) == 3 and rows[0]["index"] == "1"


def test_census_two_body_and_determinism(capsys):
    argv = ("census", "--masses", "1,1", "--trials", "50", "--seed", "7", "--format", "json")
    code, out1, _ = run(capsys, *argv)
    assert code == 0
    data = json.loads(out1)
    assert len(data["classes"]) == 1 and data["bounds"]["met"]
    code, out2, _ = run(capsys, *argv)
    assert out1 == out2


def test_census_csv_schema(capsys):
    code, out, _ = run(capsys, "census", "--masses", "1,1.3,0.8", "--trials", "60", "--seed", "7", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0][:8] == ["class_id", "is_geodesic", "ordering", "lambda", "U", "residual", "index", "nullity"]
    assert len(rows[0]) == 8 + 9
    assert code in (0, 4)


def test_census_unmet_bounds_exit_four(capsys):
    code, _, err = run(capsys, "census", "--masses", "1,1.3,0.8", "--trials", "0")
    assert code == 4 and "bounds" in err


def _write(tmp_path, name, payload):
    p = tmp_path / name
    p.write_text(json.dumps(payload) if not isinstance(payload, str) else payload)
    return str(p)


def test_classify(capsys, tmp_path):
    code, out, _ = run(capsys, "geodesic", "--masses", "1,2,3", "--format", "json")
    rec = json.loads(out)["records"][0]
    chart = [{"theta": t, "phi": 0.0} for t in rec["thetas"]]
    good = _write(tmp_path, "cc.json", {"masses": [1, 2, 3], "chart": chart})
    code, out, _ = run(capsys, "classify", good, "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["index"] == 1 and data["nullity"] == 1 and data["is_geodesic"]
    pts = [{"x": np.sinh(t), "y": 0.0, "w": np.cosh(t)} for t in rec["thetas"]]
    code, _, _ = run(capsys, "classify", _write(tmp_path, "pts.json", {"masses": [1, 2, 3], "points": pts}))
    assert code == 0
    chart[0]["theta"] += 0.01
    code, out, err = run(capsys, "classify", _write(tmp_path, "p.json", {"masses": [1, 2, 3], "chart": chart}))
    assert code == 5 and "residual" in out
    coll = [{"theta": 0.2, "phi": 0.1}, {"theta": 0.2, "phi": 0.1}, {"theta": -0.5, "phi": 0.0}]
    code, _, err = run(capsys, "classify", _write(tmp_path, "c.json", {"masses": [1, 1, 1], "chart": coll}))
    assert code == 2 and "collision" in err
    assert run(capsys, "classify", _write(tmp_path, "bad.json", "{"))[0] == 1
    assert run(capsys, "classify", _write(tmp_path, "nom.json", {"chart": coll}))[0] == 1
    assert run(capsys, "classify", str(tmp_path / "missing.json"))[0] == 1


def test_verify(capsys):
    code, out, _ = run(capsys, "verify", "--n", "2", "--cases", "5")
    assert code == 0 and "FAIL" not in out
    code, out, err = run(capsys, "verify", "--cases", "0")
    assert code == 0 and "warning" in err
    code, out, _ = run(capsys, "verify", "--n", "3", "--cases", "5", "--format", "json")
    data = json.loads(out)
    assert data["ok"] and all(c["failed"] == 0 for c in data["checks"])


def test_verify_failure_exit_six(capsys, monkeypatch):
    import hypercc.battery as battery

    monkeypatch.setattr(battery, "_check_so2", lambda cfg, rng: (False, "forced"))
    code, out, err = run(capsys, "verify", "--n", "3", "--cases", "2")
    assert code == 6 and "FAIL" in out and "forced" in err
