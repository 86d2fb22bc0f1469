import csv
import json

import numpy as np
import pytest

from torusfilters.cli import main
from torusfilters.fileio import read_filter_file, write_filter_file
from torusfilters.lattice import validate_dilation
from torusfilters.torusfn import TorusFunction

from conftest import OBSTRUCTION, QUINCUNX


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


HAAR = {"dilation": [[2]], "n": 1, "representation": "coeff",
        "coeffs": [{"k": [0], "re": 1.0, "im": 0.0}, {"k": [1], "re": 1.0, "im": 0.0}]}


def test_lattice(tmp_path, capsys):
    assert main(["lattice", write(tmp_path / "a.json", {"dilation": [[2]]})]) == 0
    out = capsys.readouterr().out
    assert "q = 2" in out and "0; 1/2" in out
    assert main(["lattice", write(tmp_path / "b.json", OBSTRUCTION), "--out", str(tmp_path / "o.json")]) == 0
    rep = json.loads((tmp_path / "o.json").read_text())
    assert rep["q"] == 3 and rep["dual_group"][1] == ["1/3", "0", "0", "0", "0"]
    assert main(["lattice", write(tmp_path / "c.json", [[2, 4], [1, 2]])]) == 2
    assert "Singular" in capsys.readouterr().err
    assert main(["lattice", write(tmp_path / "d.json", [[1, 0], [0, 1]])]) == 2


def test_validate(tmp_path):
    assert main(["validate", write(tmp_path / "h.json", HAAR)]) == 0
    one = dict(HAAR, coeffs=[{"k": [0], "re": 1.0, "im": 0.0}])
    assert main(["validate", write(tmp_path / "one.json", one)]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["validate", str(bad)]) == 2
    assert main(["validate", str(tmp_path / "missing.json")]) == 2
    assert main(["validate", write(tmp_path / "x.json", dict(HAAR, coeffs=[{"k": [0, 1], "re": 1}]))]) == 2
    assert main(["validate"]) == 2


def test_complete_q2(tmp_path):
    src = write(tmp_path / "h.json", HAAR)
    out = tmp_path / "bank.json"
    assert main(["complete", src, "--method", "q2", "--out", str(out)]) == 0
    ff = read_filter_file(out)
    assert len(ff.filters) == 2 and not ff.normalized
    assert main(["validate", str(out)]) == 0
    q3 = {"dilation": [[3]], "n": 1, "representation": "coeff", "coeffs": [{"k": [0], "re": 3 ** -0.5, "im": 0}],
          "normalized": True}
    assert main(["complete", write(tmp_path / "q3.json", q3), "--method", "q2"]) == 2


def test_complete_sweep(tmp_path, capsys):
    src = write(tmp_path / "h.json", HAAR)
    out = tmp_path / "sweep.json"
    assert main(["complete", src, "--method", "sweep", "--grid", "128", "--out", str(out)]) == 0
    rep = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert rep["closed"] and rep["max_jump"] < 0.05
    assert main(["validate", str(out), "--tol", "1e-9"]) == 0
    # a grid too coarse for the threshold reports failure and writes the report
    out2 = tmp_path / "fail.json"
    assert main(["complete", src, "--method", "sweep", "--grid", "8", "--out", str(out2)]) == 1
    assert json.loads(out2.read_text())["closed"] is False


def test_cascade(tmp_path):
    src = tmp_path / "bank.json"
    main(["complete", write(tmp_path / "h.json", HAAR), "--out", str(src)])
    out = tmp_path / "phi.csv"
    assert main(["cascade", str(src), "--depth", "40", "--box", "-4", "4", "--res", "512",
                 "--out", str(out), "--wavelets"]) == 0
    rows = list(csv.reader(open(out)))
    x = np.array([float(r[0]) for r in rows[1:]])
    v = np.array([complex(float(r[1]), float(r[2])) for r in rows[1:]])
    safe = np.where(x == 0, 1, x)
    closed = np.where(x == 0, 1, (np.exp(2j * np.pi * x) - 1) / (2j * np.pi * safe))
    assert len(rows) == 513 and np.abs(v - closed).max() < 1e-6
    assert main(["cascade", str(src), "--depth", "0", "--out", str(out)]) == 2
    assert main(["cascade", str(src), "--box", "0", "1", "2", "--out", str(out)]) == 2

    quin = {"dilation": QUINCUNX, "n": 2, "representation": "coeff",
            "coeffs": [{"k": [0, 0], "re": 1.0, "im": 0.0}, {"k": [1, 0], "re": 1.0, "im": 0.0}]}
    out2 = tmp_path / "q.csv"
    assert main(["cascade", write(tmp_path / "q.json", quin), "--box", "-2", "2", "--res", "5",
                 "--out", str(out2)]) == 0
    rows = list(csv.reader(open(out2)))
    assert rows[0] == ["x1", "x2", "re", "im"] and len(rows) == 26
    centre = [r for r in rows[1:] if float(r[0]) == 0 and float(r[1]) == 0]
    assert float(centre[0][2]) == 1.0


def test_obstruct(tmp_path):
    assert main(["obstruct", "--check", "identities", "--samples", "2000"]) == 0
    h0 = tmp_path / "h0.json"
    assert main(["obstruct", "--build-h0", "--out", str(h0)]) == 0
    ff = read_filter_file(h0)
    assert ff.normalized and ff.filters[0].shape == (9, 8, 8, 8, 8)
    assert main(["validate", str(h0)]) == 0
    assert main(["obstruct", "--build-h0", "--res", "8", "8", "8", "8", "8"]) == 2
    assert main(["obstruct"]) == 2


def test_obstruct_demo(tmp_path):
    out = tmp_path / "demo.json"
    assert main(["obstruct", "--demo-failure", "--res", "6", "4", "4", "4", "4", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["verdict_note"] == "demonstration-not-proof"
    cases = {c["case"]: c for c in rep["cases"]}
    assert {"haar-control", "obstruction-h0", "equator-control"} == set(cases)
    for c in cases.values():
        assert {"case", "resolutions", "max_jumps", "verdict_note"} <= set(c)


@pytest.mark.parametrize("rep", ["coeff", "grid"])
def test_round_trip_bit_exact(tmp_path, rep, rng):
    A = validate_dilation(QUINCUNX)
    if rep == "coeff":
        f = TorusFunction.from_coeffs({(i, j): complex(*rng.standard_normal(2)) for i in range(3) for j in range(2)})
    else:
        f = TorusFunction.from_grid(rng.standard_normal((4, 6)) + 1j * rng.standard_normal((4, 6)))
    g = TorusFunction.from_grid(rng.standard_normal((4, 6)) + 0j) if rep == "grid" else f.conj()
    p = tmp_path / "f.json"
    write_filter_file(p, A, [f, g], representation=rep)
    ff = read_filter_file(p)
    for a, b in zip([f, g], ff.filters):
        if rep == "coeff":
            assert a.coeffs == b.coeffs
        else:
            assert np.array_equal(a.grid, b.grid)
    # a second write of what was read is byte-identical
    p2 = tmp_path / "g.json"
    write_filter_file(p2, ff.A, ff.filters, representation=rep)
    assert p.read_bytes() == p2.read_bytes()


def test_atomic_write_leaves_no_temp(tmp_path):
    write_filter_file(tmp_path / "a.json", validate_dilation([[2]]), [TorusFunction.constant(1)])
    assert [p.name for p in tmp_path.iterdir()] == ["a.json"]
