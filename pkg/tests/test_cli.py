"""Command-line interface: exit codes, artifacts and determinism."""
import json

import numpy as np
import pytest

from hylyap import presets
from hylyap.cli import main
from hylyap.hybrid import read_trajectory_csv
from hylyap.serialize import dumps, ppf_to_json, system_to_json


def run(*argv):
    return main([str(a) for a in argv])


def load_csv(path):
    head, data = read_trajectory_csv(path.read_text())
    return {k: data[:, i] for i, k in enumerate(head)}


def test_simulate_clegg_v_non_increasing(tmp_path):
    out = tmp_path / "t.csv"
    assert run("simulate", "--system", "clegg-max", "--x0", "-2,0.5", "--tmax", 20,
               "--out", out, "--lyapunov", "VM") == 0
    d = load_csv(out)
    assert np.max(np.diff(d["V"])) <= 1e-6
    assert d["j"].max() >= 1


def test_simulate_flower_escape(tmp_path):
    out = tmp_path / "f.csv"
    assert run("simulate", "--system", "flower", "--x0", "1,1", "--tmax", 2, "--out", out) == 0
    d = load_csv(out)
    r = np.hypot(d["x1"][-1], d["x2"][-1])
    assert r == pytest.approx(np.sqrt(2) * np.exp(3.4), rel=1e-2)


def test_simulate_equilibrium(tmp_path):
    out = tmp_path / "z.csv"
    assert run("simulate", "--system", "clegg-max", "--x0", "0,0", "--tmax", 1, "--out", out) == 0
    d = load_csv(out)
    assert not d["x1"].any() and not d["x2"].any()


def test_simulate_from_files(tmp_path):
    sysf = tmp_path / "sys.json"
    sysf.write_text(dumps(system_to_json(presets.clegg_system())))
    vf = tmp_path / "v.json"
    vf.write_text(dumps(ppf_to_json(presets.clegg_VM())))
    out = tmp_path / "t.csv"
    assert run("simulate", "--system", sysf, "--x0", "1,1", "--tmax", 1, "--lyapunov", vf, "--out", out) == 0
    assert "V" in out.read_text().splitlines()[0]


@pytest.mark.parametrize("argv,code", [
    (["simulate", "--system", "circle", "--x0", "0,0.5"], 65),
    (["simulate", "--system", "nowhere", "--x0", "1,1"], 64),
    (["simulate", "--system", "clegg-max", "--x0", "1,1,1"], 64),
    (["simulate", "--system", "clegg-max"], 64),
    (["simulate", "--system", "clegg-max", "--x0", "1,1", "--dt", "-1"], 64),
    (["frobnicate"], 64),
    (["reproduce", "atlantis"], 64),
    (["certify", "--system", "flower", "--lyapunov", "Vflower", "--checks", "flow"], 64),
    (["certify", "--system", "clegg-max", "--lyapunov", "VM", "--checks", "vibes"], 64),
])
def test_exit_codes(argv, code, tmp_path, capsys):
    with pytest.raises(SystemExit) as info:
        raise SystemExit(main(argv))
    assert info.value.code == code
    assert capsys.readouterr().err


def test_bad_json_file(tmp_path):
    f = tmp_path / "broken.json"
    f.write_text("{not json")
    assert run("simulate", "--system", f, "--x0", "1,1") == 64


def test_numeric_failure(tmp_path):
    f = tmp_path / "wild.json"
    f.write_text(json.dumps({"flow": {"type": "linear", "A": [[1e200, 0], [0, 0]]}}))
    assert run("simulate", "--system", f, "--x0", "1,0") == 2


@pytest.mark.parametrize("system,V", [("clegg-max", "VM"), ("clegg-mid", "Vmid")])
def test_certify_clegg_passes(system, V, tmp_path):
    rep = tmp_path / "r.json"
    assert run("certify", "--system", system, "--lyapunov", V, "--checks", "bounds,flow,jump",
               "--report", rep) == 0
    doc = json.loads(rep.read_text())
    assert doc["pass"] and set(doc["checks"]) == {"bounds", "flow", "jump"}


def test_certify_clarke_fails_on_reset_line(tmp_path):
    rep = tmp_path / "r.json"
    assert run("certify", "--system", "clegg-max", "--lyapunov", "VM", "--checks", "clarke",
               "--points", "line-x1=0", "--report", rep) == 1
    doc = json.loads(rep.read_text())
    cex = doc["checks"]["clarke"]["counterexamples"]
    assert cex and all(abs(c["x"][0]) < 1e-12 for c in cex)


def test_certify_dense_circle(tmp_path):
    rep = tmp_path / "r.json"
    assert run("certify", "--system", "circle", "--checks", "bounds,dense", "--rho", "1,1",
               "--alpha1", "0.5,1", "--alpha2", "3,1", "--report", rep) == 0


def test_certify_report_bytes_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        run("certify", "--system", "clegg-mid", "--lyapunov", "Vmid", "--checks", "bounds,flow,jump,clarke",
            "--points", "line-x1=0", "--report", p)
    assert a.read_bytes() == b.read_bytes()


def test_seed_env_changes_params(tmp_path, monkeypatch):
    rep = tmp_path / "r.json"
    monkeypatch.setenv("HYLYAP_SEED", "17")
    run("certify", "--system", "clegg-max", "--lyapunov", "VM", "--checks", "clarke", "--points", "0,1",
        "--report", rep)
    assert json.loads(rep.read_text())["checks"]["clarke"]["params"]["seed"] == 17
    monkeypatch.setenv("HYLYAP_SEED", "many")
    assert run("certify", "--system", "clegg-max", "--lyapunov", "VM", "--checks", "clarke") == 64


def test_levelset_outputs(tmp_path, capsys):
    traj = tmp_path / "t.csv"
    run("simulate", "--system", "clegg-max", "--x0", "-2,0.5", "--tmax", 3, "--out", traj)
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    for p in (a, b):
        assert run("levelset", "--lyapunov", "VM", "--levels", "0.5,1,2", "--bbox", "-3,-3,3,3",
                   "--res", 200, "--out", p, "--overlay", traj) == 0
    assert a.read_bytes() == b.read_bytes()
    text = a.read_text()
    assert text.count('class="level"') == 3 and 'class="trajectory"' in text
    assert run("levelset", "--lyapunov", "VM", "--levels", "500", "--bbox", "-1,-1,1,1",
               "--res", 50, "--out", tmp_path / "e.svg") == 0
    assert "empty contour" in capsys.readouterr().err


@pytest.mark.parametrize("name", ["flower", "circle", "clegg-conv"])
def test_reproduce_profiles(name, tmp_path):
    out = tmp_path / name
    assert run("reproduce", name, "--outdir", out) == 0
    prof = json.loads((out / "profile.json").read_text())
    assert prof["match"]
    assert (out / "system.json").exists() and (out / "trajectory.csv").exists()
    p = prof["profile"]
    if name == "flower":
        assert p["dense"] and not p["clarke_on_locus"] and p["escape"]
    elif name == "circle":
        assert p["bounds"] and p["dense"] and p["converges"]
    else:
        assert not p["continuity_printed"] and p["continuity_derived"] and p["flow"] and p["jump"]
