import json
import re
import subprocess
import sys
from pathlib import Path

import pytest

from semicrossed_lab import __version__
from semicrossed_lab.cli import main, render_json, run
from semicrossed_lab.config import TASKS, config_from_dict, parse_config
from semicrossed_lab.errors import ConfigError, UnknownName

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

TRIVIAL = {"kind": "free", "d": 1, "h": 1, "L": 3,
           "rows": [{"u": [[[1, 0]]], "v": [[[1, 0]]]}],
           "algebra": "scalar", "seed": 7}


def write(tmp_path, raw, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(raw) if not isinstance(raw, str) else raw)
    return str(p)


def strip_time(report):
    return {k: v for k, v in report.items() if k != "timestamp"}


def test_parse_examples():
    cfg = config_from_dict(TRIVIAL)
    assert cfg.h == 1 and cfg.L == 3 and cfg.tasks == list(TASKS)
    od = config_from_dict({"kind": "free", "L": 2, "rows": [{"gallery": "odometer", "D": 8}]})
    assert od.rows[0].h == 8 and tuple(od.rows[0].window_indices) == (0, 1, 2, 3)
    with pytest.raises(ConfigError):
        config_from_dict({**TRIVIAL, "rows": [{"u": [[[1, 0]]]}]})
    with pytest.raises(UnknownName):
        config_from_dict({**TRIVIAL, "rows": [{"gallery": "baker", "D": 4}]})
    with pytest.raises(UnknownName):
        config_from_dict({**TRIVIAL, "tasks": ["nope"]})
    with pytest.raises(ConfigError):
        config_from_dict({**TRIVIAL, "d": 2})


def test_tasks_run_in_canonical_order():
    cfg = config_from_dict({**TRIVIAL, "tasks": ["thm41", "covariance", "thm41"]})
    assert cfg.tasks == ["covariance", "thm41"]


def test_parse_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        parse_config(tmp_path / "missing.json")
    with pytest.raises(ConfigError):
        parse_config(write(tmp_path, "{not json"))


def test_exit_codes(tmp_path, capsys):
    assert main(["--config", str(CONFIGS / "trivial.json")]) == 0
    assert main(["--config", str(CONFIGS / "corrupted.json")]) == 1
    assert main(["--config", write(tmp_path, {"kind": "free"})]) == 2
    assert main(["--config", write(tmp_path, {**TRIVIAL, "tasks": []}, "e.json")]) == 0
    assert main(["--config", str(CONFIGS / "trivial.json"), "--tol", "-1"]) == 2
    err = capsys.readouterr().err
    assert "config error" in err


def test_json_report_round_trip_and_determinism(tmp_path):
    cfg_path = str(CONFIGS / "odometer.json")
    outs = []
    for k, extra in enumerate([[], [], ["--parallel"]]):
        out = tmp_path / f"r{k}.json"
        assert main(["--config", cfg_path, "--out", str(out), *extra]) == 0
        outs.append(json.loads(out.read_text()))
    assert strip_time(outs[0]) == strip_time(outs[1]) == strip_time(outs[2])
    rep = outs[0]
    assert rep["version"] == __version__ and rep["seed"] == 1
    assert [t["task"] for t in rep["tasks"]] == [t for t in TASKS]
    assert set(rep["timestamp"]["runtimes"]) == set(TASKS)
    assert json.loads(render_json(rep)) == rep


def test_seed_override_changes_random_tasks(tmp_path):
    path = write(tmp_path, {**TRIVIAL, "tasks": ["fourier"]})
    outs = []
    for seed in ("1", "2"):
        out = tmp_path / f"s{seed}.json"
        main(["--config", path, "--seed", seed, "--out", str(out)])
        outs.append(json.loads(out.read_text()))
    assert outs[0]["seed"] == 1 and outs[1]["seed"] == 2
    assert outs[0]["tasks"][0]["verdict"] == "pass"


def test_text_format(tmp_path, capsys):
    assert main(["--config", str(CONFIGS / "trivial.json"), "--format", "text"]) == 0
    out = capsys.readouterr().out.splitlines()
    rows = [line for line in out if line.split()[0] in TASKS]
    assert len(rows) == len(TASKS)
    assert all(re.search(r"\d\.\d{3}e[+-]\d\d", line) for line in rows)
    assert out[-1].startswith("pass=")


def test_corrupted_report_details():
    rep = run(parse_config(CONFIGS / "corrupted.json"))
    cov = rep["tasks"][0]
    assert cov["verdict"] == "fail" and cov["max_residual"] == pytest.approx(2.0)
    assert rep["summary"] == {"pass": 0, "fail": 2, "skip": 0}


def test_commuting_with_half_a_pair_skips():
    raw = {**TRIVIAL, "tasks": ["commuting"],
           "params": {"commuting": {"a": {"gallery": "odometer", "D": 4}}}}
    rep = run(config_from_dict(raw))
    assert rep["tasks"][0]["verdict"] == "skip"


@pytest.mark.parametrize("name", ["trivial", "odometer", "clock_shift", "binary_weight"])
def test_shipped_configs_pass(name):
    rep = run(parse_config(CONFIGS / f"{name}.json"))
    assert rep["summary"]["fail"] == 0, [t for t in rep["tasks"] if t["verdict"] == "fail"]


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "semicrossed_lab", "--version"],
                         capture_output=True, text=True, check=True)
    assert __version__ in res.stdout
    res = subprocess.run([sys.executable, "-m", "semicrossed_lab", "--config",
                          str(CONFIGS / "corrupted.json"), "--format", "text"],
                         capture_output=True, text=True)
    assert res.returncode == 1 and "fail" in res.stdout
