import json
import os
import subprocess
import sys

import numpy as np
import pytest

from rowswitch.cli import main
from rowswitch.images import load_depth, load_mask, save_depth, save_mask


def call(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


def test_generate_field_is_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    code, out, _ = call(capsys, "generate-field", "--seed", 4, "--out", a)
    assert code == 0 and out["spacing"]["rows"] == 10
    call(capsys, "generate-field", "--seed", 4, "--out", b)
    assert a.read_bytes() == b.read_bytes()


def test_generate_field_config_and_rows(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"nominal_inter_row": 0.5, "spacing_jitter": 0.0}))
    code, out, _ = call(capsys, "generate-field", "--config", cfg, "--rows", 4, "--out", tmp_path / "f.json")
    assert code == 0 and out["spacing"]["rows"] == 4 and out["spacing"]["mean"] == pytest.approx(0.5, abs=1e-3)


@pytest.mark.parametrize("extra", [("--rows", "1"), ("--config", "missing.json")])
def test_generate_field_usage_errors(capsys, tmp_path, extra):
    code, _, err = call(capsys, "generate-field", "--out", tmp_path / "f.json", *extra)
    assert code == 2 and "error" in err


def test_unknown_config_key(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"rows": 4}))
    assert call(capsys, "generate-field", "--config", cfg, "--out", tmp_path / "f.json")[0] == 2


def test_run_trial_writes_its_log(capsys, tmp_path):
    field = tmp_path / "f.json"
    cfg = tmp_path / "flat.json"
    cfg.write_text(json.dumps({"spacing_jitter": 0.0, "angle_jitter_deg": 0.0, "roughness_scale": 0.0}))
    call(capsys, "generate-field", "--config", cfg, "--seed", 1, "--out", field)
    code, out, _ = call(capsys, "run-trial", "--field", field, "--noise", "none", "--row", 3, "--turn", "left",
                        "--out", tmp_path / "t")
    assert code == 0 and out["outcome"] == "Success"
    lines = (tmp_path / "t" / "trajectory.csv").read_text().splitlines()
    assert lines[0] == "t,x,y,theta,state" and lines[-1].endswith(",G")
    assert json.loads((tmp_path / "t" / "trial.json").read_text())["target_row"] == 2


@pytest.mark.parametrize("argv", [
    ("run-trial", "--field", "nowhere.json"),
    ("run-trial", "--row", "0", "--turn", "left"),
    ("run-trial", "--profile", "no-such-profile"),
    ("run-batch", "--trials", "0"),
])
def test_run_usage_errors(capsys, tmp_path, argv):
    assert call(capsys, *argv, "--out", tmp_path / "x")[0] == 2


def test_repeated_seeds_need_opt_in(capsys, tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"trials": [[3, "left", 5], [4, "right", 5]]}))
    assert call(capsys, "run-batch", "--config", cfg, "--out", tmp_path / "r")[0] == 2


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli")
    argv = ["run-batch", "--trials", "2", "--seed", "3"]
    assert main(argv + ["--out", str(out / "a")]) == 0
    assert main(argv + ["--out", str(out / "b"), "--jobs", "2"]) == 0
    return out


def tree(path):
    return {p.relative_to(path): p.read_bytes() for p in sorted(path.rglob("*")) if p.is_file()}


def test_parallel_batch_matches_serial(small_run):
    a, b = tree(small_run / "a"), tree(small_run / "b")
    assert a.keys() == b.keys() and a == b


def test_report_rebuild(capsys, small_run, tmp_path):
    code, out, _ = call(capsys, "report", small_run / "a", "--out", tmp_path, "--coefficient", "paper-result")
    assert code == 0 and out["headland"]["coefficient"].startswith("paper-result")
    assert (tmp_path / "report.md").exists()
    assert call(capsys, "report", tmp_path / "empty")[0] == 2


def test_detect_on_fixture(capsys, fixtures_dir, tmp_path):
    truth = json.loads((fixtures_dir / "truth.json").read_text())
    code, out, _ = call(capsys, "detect", "--mask", fixtures_dir / "mask.png", "--depth", fixtures_dir / "depth.png",
                        "--intrinsics", fixtures_dir / "intrinsics.json", "--turn", truth["turn"],
                        "--out", tmp_path / "o.png")
    assert code == 0 and out["valid"]
    assert abs(out["d_r"] - truth["d_r"]) < 0.03
    assert (tmp_path / "o.png").stat().st_size > 0


def test_detect_on_mirrored_fixture(capsys, fixtures_dir, tmp_path):
    save_mask(tmp_path / "m.png", load_mask(fixtures_dir / "mask.png")[:, ::-1])
    save_depth(tmp_path / "d.png", load_depth(fixtures_dir / "depth.png")[:, ::-1])
    code, out, _ = call(capsys, "detect", "--mask", tmp_path / "m.png", "--depth", tmp_path / "d.png",
                        "--intrinsics", fixtures_dir / "intrinsics.json", "--turn", "left")
    assert code == 0 and out["valid"] and abs(out["d_r"] - 0.65) < 0.03


def test_detect_size_mismatch(capsys, fixtures_dir, tmp_path):
    save_mask(tmp_path / "m.png", np.zeros((10, 12), np.uint8))
    code, _, err = call(capsys, "detect", "--mask", tmp_path / "m.png", "--depth", fixtures_dir / "depth.png",
                        "--intrinsics", fixtures_dir / "intrinsics.json", "--turn", "left")
    assert code == 2 and "differ" in err


def test_module_entry_point_and_logging(tmp_path):
    env = {**os.environ, "ROWSWITCH_LOG": "INFO"}
    proc = subprocess.run([sys.executable, "-m", "rowswitch", "generate-field", "--out", str(tmp_path / "f.json")],
                          capture_output=True, text=True, env=env)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["seed"] == 0
    assert "INFO" in proc.stderr
