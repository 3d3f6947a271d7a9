import json
import shutil
import subprocess
import sys

import numpy as np
import pytest

from symbreak.cli import (
    ExperimentConfig,
    diverging_color,
    fixture_dir,
    heatmap_svg,
    laplacian_target,
    load_config,
    load_fixture_index,
    main,
    tomllib,
    verify_fixture,
)
from symbreak.kernels import parse_kernel
from symbreak.loss import LossProblem, loss


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_print_config_round_trips(capsys, tmp_path):
    code, out = run(capsys, "print-config")
    assert code == 0
    data = tomllib.loads(out)
    assert data["kernel"] == "poly:3" and data["eps_g"] == 1e-10
    (tmp_path / "c.toml").write_text(out)
    assert load_config(str(tmp_path / "c.toml")) == ExperimentConfig()


def test_config_overrides_and_errors(tmp_path):
    cfg = load_config(None, ["d=5", "kernel=cubic-gaussian", "polish=false", "eps_g=1e-3"])
    assert cfg.d == 5 and not cfg.polish and cfg.eps_g == 1e-3
    with pytest.raises(ValueError):
        load_config(None, ["bogus=1"])
    with pytest.raises(ValueError):
        load_config(None, ["k=-1"])
    (tmp_path / "nested.toml").write_text("[gd]\neta = 1\n")
    with pytest.raises(ValueError):
        load_config(str(tmp_path / "nested.toml"))
    assert main(["survey", "--set", "target=nowhere"]) == 2


def test_target_file_relative_to_config(tmp_path):
    np.savetxt(tmp_path / "V.csv", np.eye(3), delimiter=",")
    (tmp_path / "c.toml").write_text('target = "file"\ntarget_file = "V.csv"\nd = 3\n')
    cfg = load_config(str(tmp_path / "c.toml"))
    assert np.array_equal(cfg.target_matrix(), np.eye(3))


def test_laplacian_target_is_circulant():
    V = laplacian_target(20)
    assert np.array_equal(V[0, :3], [-2, 1, 0]) and V[0, -1] == 1
    assert np.allclose(V.sum(axis=1), 0)
    for i in range(19):
        assert np.array_equal(V[i + 1], np.roll(V[i], 1))


def test_heatmap_is_pure_and_signed():
    W = np.array([[1.0, -1.0], [0.0, 0.5]])
    assert heatmap_svg(W) == heatmap_svg(W.copy())
    assert diverging_color(0.0, 1.0) == "#f7f7f7"
    assert diverging_color(1.0, 1.0) == "#b2182b"
    assert diverging_color(-1.0, 1.0) == "#2166ac"
    assert heatmap_svg(W).count("<rect") == 4


def test_survey_outputs_are_deterministic(capsys, tmp_path):
    args = ["survey", "--set", "d=5", "--set", "n_starts=4", "--set", "eps_g=1e-9"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b"), "--set", "workers=1"]) == 0
    capsys.readouterr()
    a = (tmp_path / "a" / "records.jsonl").read_bytes()
    assert a == (tmp_path / "b" / "records.jsonl").read_bytes()
    prob = LossProblem(parse_kernel("poly:3"), np.eye(5))
    for line in a.decode().splitlines():
        rec = json.loads(line)
        assert abs(loss(prob, np.array(rec["matrix"])) - rec["loss"]) <= 1e-12
    summary = (tmp_path / "a" / "summary.csv").read_text().splitlines()
    assert summary[0] == "loss,count,kind,label"
    svgs = sorted((tmp_path / "a" / "minima").glob("*.svg"))
    assert svgs and all(p.with_suffix(".csv").exists() for p in svgs)


def test_verify_fixture_passes_on_a_good_table(capsys):
    code, out = run(capsys, "verify-fixtures", "--only", "table1", "table3")
    assert code == 0
    assert "PASS table1" in out and "Δ(S₉×S₂×S₁)" in out


def test_verify_fixture_negative_control(tmp_path, capsys):
    src = fixture_dir()
    for p in src.iterdir():
        shutil.copy(p, tmp_path / p.name)
    W = np.loadtxt(tmp_path / "table1.csv", delimiter=",")
    W[0, 0] = 0.0
    np.savetxt(tmp_path / "table1.csv", W, delimiter=",", fmt="%.17g")
    code, out = run(capsys, "verify-fixtures", "--dir", str(tmp_path), "--only", "table1")
    assert code == 1 and "FAIL table1" in out


def test_table4_label_is_reported_not_asserted():
    entry = {e["name"]: e for e in load_fixture_index()}["table4"]
    r = verify_fixture(entry)
    assert not r["label_asserted"]
    assert r["grad_ok"] and r["loss_ok"] and r["psd_ok"]


def test_fpspace_sdxsd(capsys):
    code, out = run(capsys, "fpspace", "--spec", "SdxSd", "--d", "5")
    assert code == 0
    assert "loss: 1/2*d^5*w^6 - d^2*w^3 + 1/2*d" in out
    assert "w = 0 " in out and "w = 1/5 " in out


def test_fpspace_deltasd_degenerate_d2(capsys):
    code, out = run(capsys, "fpspace", "--spec", "DeltaSd", "--d", "2")
    assert code == 0
    assert "degenerate:" in out and "g4 in ideal: yes" in out


def test_fpspace_rejects_other_kernels(capsys):
    assert main(["fpspace", "--kernel", "relu"]) == 2


def test_isotropy_command(capsys, tmp_path, rng):
    np.savetxt(tmp_path / "I.csv", np.eye(12), delimiter=",")
    code, out = run(capsys, "isotropy", str(tmp_path / "I.csv"))
    assert code == 0 and "label: Δ(S₁₂)" in out and "order: 479001600" in out
    np.savetxt(tmp_path / "L.csv", laplacian_target(20), delimiter=",")
    _, out = run(capsys, "isotropy", str(tmp_path / "L.csv"))
    order = int(out.split("order: ")[1].split()[0])
    assert order % 20 == 0
    np.savetxt(tmp_path / "R.csv", rng.normal(size=(5, 5)), delimiter=",")
    _, out = run(capsys, "isotropy", str(tmp_path / "R.csv"))
    assert "label: 1\n" in out


def test_isotropy_parse_error(capsys, tmp_path):
    (tmp_path / "bad.csv").write_text("1,x\n")
    assert main(["isotropy", str(tmp_path / "bad.csv")]) == 2


def test_groebner_command(capsys, tmp_path):
    (tmp_path / "sys.txt").write_text("# circle and line\nw1^2 + w2^2 - d\nw1 - w2\n")
    code, out = run(capsys, "groebner", str(tmp_path / "sys.txt"), "--vars", "w1,w2", "--subs", "d=2")
    assert code == 0
    assert out.splitlines() == ["w1 - w2", "w2^2 - 1"]


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "symbreak", "print-config"], capture_output=True, text=True)
    assert res.returncode == 0 and "kernel =" in res.stdout
