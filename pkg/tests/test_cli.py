import json

import numpy as np
import pytest

from mhdexact.cli import REGISTRY, build_family, main, parse_grid
from mhdexact.errors import ConfigError

ZERO_32 = {"l": 0, "E": 0, "k": 0,
           "consts": {k: 0 for k in ("C1", "C2", "D1", "D2", "F1", "F2", "G1", "G2", "H1", "H2")}}


def write_json(tmp_path, data, name="p.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


def read_csv(path):
    lines = path.read_text(encoding="utf-8").splitlines()
    return lines[0], [ln.split(",") for ln in lines[1:]]


def test_catalog_lists_twelve(capsys):
    assert main(["catalog"]) == 0
    assert len(capsys.readouterr().out.strip().splitlines()) == 12
    assert len(REGISTRY) == 12


def test_catalog_single_family(capsys):
    assert main(["catalog", "--family", "thm4.3"]) == 0
    out = capsys.readouterr().out
    assert "singular set: plane" in out
    assert main(["catalog", "--family", "nope"]) == 2


def test_catalog_ledger(capsys):
    assert main(["catalog", "--ledger"]) == 0
    out = capsys.readouterr().out
    assert "thm4.4" in out and "thm3.1" not in out


def test_sample_thm32_zero_chain(tmp_path):
    cfg = write_json(tmp_path, {**ZERO_32, "q": 0.4})
    out = tmp_path / "s.csv"
    assert main(["sample", "--family", "thm3.2", "--params", cfg, "--grid", "t=0.5;x=-1:1:2;y=-1:1:2;z=0:1:2",
                 "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header == "t,x,y,z,u,v,w,Hx,Hy,Hz,p,masked"
    assert len(rows) == 8
    for r in rows:
        assert float(r[4]) == pytest.approx(0.4 * float(r[1]), abs=1e-12)
        assert r[-1] == "0"


def test_sample_masks_singular_tube(tmp_path):
    cfg = write_json(tmp_path, {"alpha": "(poly 0 1)", "delta": 0.05})
    out = tmp_path / "s.csv"
    assert main(["sample", "--family", "thm4.3", "--params", cfg, "--grid", "t=0;x=-1:1:21;y=0;z=0",
                 "--out", str(out)]) == 0
    _, rows = read_csv(out)
    xs = np.array([float(r[1]) for r in rows])
    masked = np.array([r[-1] == "1" for r in rows])
    # at t = 0 the plane is x = 0; only the grid point x = 0 lies within the tube
    assert masked.sum() == np.sum(np.abs(xs) < 0.05) == 1
    assert all(r[4] == "" for r, m in zip(rows, masked) if m)


def test_sample_vtk(tmp_path):
    out = tmp_path / "s.vtk"
    assert main(["sample", "--family", "prop2.4", "--grid", "t=0;x=0:1:3;y=0:1:2;z=0:1:2", "--format", "vtk",
                 "--out", str(out)]) == 0
    text = out.read_text(encoding="utf-8")
    assert "DIMENSIONS 3 2 2" in text and "POINT_DATA 12" in text
    assert main(["sample", "--family", "prop2.4", "--grid", "t=0:1:2;x=0;y=0;z=0", "--format", "vtk",
                 "--out", str(out)]) == 2


def test_sample_is_deterministic(tmp_path):
    args = ["sample", "--family", "thm4.5", "--grid", "t=0:1:3;x=-1:1:3;y=-1:1:3;z=-1:1:3", "--transform", "T2=1.5"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_verify_exit_codes(tmp_path, capsys):
    out = tmp_path / "r.txt"
    assert main(["verify", "--family", "prop2.4", "--points", "20", "--out", str(out)]) == 0
    assert "# result=pass" in out.read_text(encoding="utf-8")
    assert main(["verify", "--family", "thm4.4", "--as-printed", "--points", "10", "--out", str(out)]) == 1
    err = capsys.readouterr().err
    assert "known printed-formula issues" in err


def test_verify_empty_grid(tmp_path):
    cfg = write_json(tmp_path, {"alpha": "(poly 0 1)", "delta": 0.5})
    # every grid point lies inside the tube around x = 0
    assert main(["verify", "--family", "thm4.3", "--params", cfg, "--grid", "t=0;x=0;y=-1:1:3;z=0"]) == 2


def test_budget_env(monkeypatch):
    monkeypatch.setenv("MHD_EXACT_BUDGET", "100")
    with pytest.raises(ConfigError):
        parse_grid("t=0;x=0:1:5;y=0:1:5;z=0:1:5")
    monkeypatch.setenv("MHD_EXACT_BUDGET", "125")
    assert parse_grid("t=0;x=0:1:5;y=0:1:5;z=0:1:5").size == 125


@pytest.mark.parametrize("bad", ["t=0;x=0;y=0", "t=0;x=0;y=0;z=1:0:3", "t=0;x=0;y=0;z=0;q=1", "t=a;x=0;y=0;z=0"])
def test_bad_grids(bad):
    with pytest.raises(ConfigError):
        parse_grid(bad)


def test_unknown_parameter_rejected():
    with pytest.raises(ConfigError):
        build_family("thm3.1", {"zz": 1.0})


def test_physical_constants_from_config():
    f = build_family("thm4.3", {"physical": {"nu": 0.05}})
    assert f.consts.nu == 0.05
    with pytest.raises(ConfigError):
        build_family("thm4.3", {"physical": {"nu": -1.0}})
