import csv
import io
import json
import math

import numpy as np
import pytest

from qvk import canon2q as c2
from qvk import matkernel as mk
from qvk.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_analyze_gate(capsys):
    code, out, _ = run(capsys, "analyze", "--gate", "CNOT", "--samples", "60")
    assert code == 0
    d = json.loads(out)
    assert d["mu"] == 4 and d["schmidt_rank"] == 2 and d["d_prod"] == 4
    assert d["angle_recovery"]["kind"] == "DegenerateFamily"


def test_analyze_angles(capsys):
    code, out, _ = run(capsys, "analyze", "--angles", "0.125,0.125,0.125", "--samples", "60")
    d = json.loads(out)
    assert code == 0 and d["mu"] == 5 and d["d_prod"] == 3 and d["region"]["tag"] == "S_E"
    assert d["mu_from_dprod"] == 5


def test_analyze_unitary_file(capsys, tmp_path):
    f = tmp_path / "u.json"
    f.write_text(json.dumps(mk.matrix_to_json(c2.swap())))
    code, out, _ = run(capsys, "analyze", "--unitary", str(f), "--samples", "60")
    assert code == 0 and json.loads(out)["schmidt_rank"] == 4
    f.write_text(json.dumps(mk.matrix_to_json(np.ones((4, 4)))))
    assert run(capsys, "analyze", "--unitary", str(f))[0] == 3


def test_usage_errors(capsys):
    assert run(capsys, "analyze", "--angles", "0.1,x,0.1")[0] == 2
    assert run(capsys, "analyze", "--gate", "CNOT", "--angles", "0,0,0")[0] == 2
    assert run(capsys, "region", "--mode", "ternary")[0] == 2
    with pytest.raises(SystemExit):
        main(["bogus"])


def test_verify_state(capsys, tmp_path):
    f = tmp_path / "s.json"
    f.write_text(json.dumps({"dim": 4, "data": [[1, 0], [0, 0], [0, 0], [1, 0]]}))
    code, out, _ = run(capsys, "verify-state", "--state", str(f), "--dims", "2,2", "--eps", "0.1", "--delta", "0.05")
    d = json.loads(out)
    assert code == 0 and d["N"] == 204 and d["settings"] == 2
    assert d["nu"] == pytest.approx(0.14644660940672624)


def test_synthesize_then_simulate(capsys, tmp_path, monkeypatch):
    proto = tmp_path / "p.json"
    assert run(capsys, "synthesize", "--gate", "CNOT", "--out", str(proto))[0] == 0
    assert json.loads(proto.read_text())["mu"] == 4
    scen = tmp_path / "s.json"
    scen.write_text(json.dumps({"kind": "gate", "target": {"protocol_file": "p.json"},
                                "noise": {"kind": "DepolarizingChannel", "p": 0.1}, "trials": 20000, "seed": 3}))
    code, out, _ = run(capsys, "simulate", "--scenario", str(scen))
    d = json.loads(out)
    assert code == 0 and d["analyticBound"] == pytest.approx(0.925)
    monkeypatch.setenv("QVK_SEED", "77")
    assert json.loads(run(capsys, "simulate", "--scenario", str(scen))[1])["seed"] == 77


def test_simulate_schema_errors(capsys, tmp_path):
    scen = tmp_path / "s.json"
    scen.write_text(json.dumps({"kind": "state", "target": {}, "trials": 10}))
    assert run(capsys, "simulate", "--scenario", str(scen))[0] == 5
    scen.write_text("{not json")
    assert run(capsys, "simulate", "--scenario", str(scen))[0] == 5


def test_region_contour(capsys):
    code, out, _ = run(capsys, "region", "--mode", "contour", "--grid", "5")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0] == ["alpha2", "alpha3", "zeta0sq"] and len(rows) == 26
    for a2, a3, z in rows[1:]:
        assert float(z) == pytest.approx(0.25 * (1 + math.cos(2 * float(a2)) * math.cos(2 * float(a3))), abs=1e-12)


def test_region_ternary(capsys, tmp_path):
    out = tmp_path / "t.csv"
    assert run(capsys, "region", "--mode", "ternary", "--zeta0", "0.7", "--grid", "15", "--out", str(out))[0] == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["xi1", "xi2", "xi3", "alpha1", "alpha2", "alpha3"]
    assert len(rows) > 1
    for r in rows[1:]:
        xi = [float(x) for x in r[:3]]
        assert sum(xi) == pytest.approx(1.0)
        assert abs(c2.zeta(c2.CanonicalAngles(*map(float, r[3:])))[0]) == pytest.approx(0.7)
