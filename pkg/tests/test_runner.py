import json
import subprocess
import sys

import numpy as np
import pytest

from anyonlab.errors import SchemaError
from anyonlab.runner import config_hash, dumps, main, run, validate_config

Z2_22 = {"group": [2], "lattice": {"Lx": 2, "Ly": 2}}


def write_cfg(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def err_json(capsys):
    return json.loads(capsys.readouterr().err)


def test_spectrum_kernel():
    rep = run({"kind": "spectrum", **Z2_22})
    res = rep["result"]
    assert res["kernel_dim"] == 4 == res["expected_torus_degeneracy"]
    assert res["max_star_deviation"] < 1e-8
    assert len(rep["config_hash"]) == 64


def test_braid_report():
    res = run({"kind": "braid", **Z2_22})["result"]
    M = np.array(res["lattice_monodromy"])
    assert M.shape == (4, 4)
    e, m = 1, 2  # label order: vacuum, e, m, em
    assert np.allclose(M[e, m], -1)
    assert res["max_error"] < 1e-10
    assert res["braid_equations"]["passed"]
    assert not any(res["braid_equations"]["failures"].values())


def test_smatrix_needs_no_lattice():
    rep = run({"kind": "smatrix", "group": [3]})
    assert rep["lattice"] is None


def test_validate_accepts_minimal():
    cfg = {"kind": "conesum", "group": [2]}
    assert validate_config(cfg) is cfg


@pytest.mark.parametrize("cfg, path", [
    ({"kind": "spectrum", "group": [0], "lattice": {"Lx": 2, "Ly": 2}}, "$.group[0]"),
    ({"kind": "spectrum", "group": [2]}, "$.lattice"),
    ({"kind": "nope", "group": [2]}, "$.kind"),
    ({"kind": "spectrum", "group": [2], "lattice": {"Lx": 0, "Ly": 2}}, "$.lattice.Lx"),
    ({"kind": "flow", "group": [2], "lattice": {"Lx": 2, "Ly": 2}, "params": {"gamma": -1}},
     "$.params.gamma"),
    ({"kind": "spectrum", "group": [2], "lattice": {"Lx": 2, "Ly": 2}, "extra": 1}, "$"),
])
def test_schema_errors_name_field(cfg, path):
    with pytest.raises(SchemaError) as info:
        validate_config(cfg)
    assert info.value.path == path


def test_exit_schema(tmp_path, capsys):
    cfg = write_cfg(tmp_path, {"kind": "spectrum", "group": [0], "lattice": {"Lx": 2, "Ly": 2}})
    assert main(["run", "--config", cfg]) == 2
    assert err_json(capsys)["path"] == "$.group[0]"


def test_exit_schema_bad_json(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{kind:")
    assert main(["run", "--config", str(p)]) == 2
    assert main(["run", "--config", str(tmp_path / "missing.json")]) == 2


def test_exit_resource_cap(tmp_path, capsys):
    cfg = write_cfg(tmp_path, {"kind": "spectrum", **Z2_22})
    assert main(["run", "--config", cfg, "--cap", "100"]) == 3
    assert err_json(capsys)["error"] == "ResourceError"


def test_exit_gap_assumption(tmp_path, capsys):
    cfg = write_cfg(tmp_path, {"kind": "flow", **Z2_22,
                               "params": {"gamma": 5.0, "path": {"type": "z-field", "intervals": 2}}})
    assert main(["run", "--config", cfg]) == 4
    assert err_json(capsys)["error"] == "AssumptionViolationError"


def test_exit_ambiguous_charge(tmp_path, capsys):
    # closed-loop endpoints are skipped; an m-string with the measured end on
    # a patch boundary has no star there, so the ribbon run still succeeds
    cfg = write_cfg(tmp_path, {"kind": "ribbon", **Z2_22,
                               "params": {"sites": [[[0, 0], [-1, 0]], [[0, 1], [-1, 1]]]}})
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    rep = json.loads((tmp_path / "o" / "report.json").read_text())
    energies = [x["energy"] for x in rep["result"]["excitations"]]
    assert np.allclose(energies, [0, 2, 2, 4])


def test_reruns_byte_identical(tmp_path):
    cfg = write_cfg(tmp_path, {"kind": "conesum", "group": [2], "output": "cs",
                               "params": {"ns": [2, 4, 8]}})
    for d in ("a", "b"):
        assert main(["run", "--config", cfg, "--out", str(tmp_path / d), "--threads", "1"]) == 0
    a, b = (tmp_path / "a" / "cs.json").read_bytes(), (tmp_path / "b" / "cs.json").read_bytes()
    assert a == b
    assert json.loads(a)["config_hash"] == config_hash(json.loads(open(cfg).read()))


def test_flow_csv(tmp_path):
    cfg = write_cfg(tmp_path, {"kind": "flow", **Z2_22,
                               "params": {"path": {"type": "z-field", "s_max": 0.05, "intervals": 2},
                                          "gamma_T": 100.0, "dressed_table": False}})
    assert main(["run", "--config", cfg, "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "flow.csv").read_text().splitlines()
    assert lines[0] == "s,gap,transport_error,unitarity_defect"
    assert len(lines) == 4
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["result"]["band_dim"] == 4
    assert rep["result"]["max_transport_error"] < 1e-3


def test_dumps_floats_17_digits():
    txt = dumps({"x": 0.1, "y": 1.0, "z": [np.float64(1 / 3), 2], "c": 1 + 2j, "n": float("nan")})
    assert '"x": 0.10000000000000001' in txt
    assert '"y": 1.0' in txt
    assert "0.33333333333333331" in txt
    assert '"c": [1.0, 2.0]' in txt
    assert '"NaN"' in txt
    assert json.loads(txt)["z"][1] == 2


def test_bad_threads(capsys):
    assert main(["run", "--config", "x.json", "--threads", "0"]) == 2


def test_verify_only(tmp_path, capsys):
    code = main(["verify", "--only", "5", "--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert code == 0
    assert "1/1 criteria passed" in out
    rows = json.loads((tmp_path / "verify.json").read_text())["criteria"]
    assert [r["number"] for r in rows] == [5]


def test_verify_bad_only(capsys):
    assert main(["verify", "--only", "x"]) == 2


def test_module_entry_point(tmp_path):
    cfg = write_cfg(tmp_path, {"kind": "smatrix", "group": [2]})
    proc = subprocess.run([sys.executable, "-m", "anyonlab", "run", "--config", cfg],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["kind"] == "smatrix"
