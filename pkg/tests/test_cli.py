import csv
import json
import os

import numpy as np
import pytest

from main import main
from src.averaging.coefficients import compute_coefficient
from src.cli import commands
from src.cli.manifest import RunManifest
from src.cli.output import fmt, write_csv
from src.cli.pipeline import resolve_settings
from src.core.errors import ParseError
from src.core.problem import parse_problem
from src.core.settings import Settings

CONFIGS = os.path.join(os.path.dirname(__file__), os.pardir, "configs")
THM11 = os.path.join(CONFIGS, "thm11.json")
THM12 = os.path.join(CONFIGS, "thm12.json")
SINGLE = os.path.join(CONFIGS, "single_term.json")


def read_rows(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


@pytest.fixture
def write_config(tmp_path):
    def _write(doc, name="problem.json"):
        path = tmp_path / name
        path.write_text(json.dumps(doc) if isinstance(doc, dict) else doc)
        return str(path)
    return _write


# ─────────────────────────────────────────────────────────────────────────────
# validate
# ─────────────────────────────────────────────────────────────────────────────
def test_validate_ok(tmp_path, capsys):
    dump = tmp_path / "flow.csv"
    assert main(["validate", "--config", THM11, "--out", str(tmp_path), "--dump-flow", str(dump)]) == 0
    out = capsys.readouterr().out
    assert "[OK]" in out and "min|g|" in out
    assert list(read_rows(str(dump))[0]) == ["theta", "w", "value"]
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["subcommand"] == "validate"
    assert manifest["summary"]["discriminant"] == -1.0
    assert "validate" in manifest["timings"]


def test_validate_rejects_non_centre(tmp_path, write_config, capsys):
    path = write_config({"center": {"a": 1, "b": 1, "c": "1/4", "d": 3}, "switching_line": "x=0"})
    assert main(["validate", "--config", path, "--out", str(tmp_path)]) == 2
    assert "CenterConditionViolated" in capsys.readouterr().err


@pytest.mark.parametrize("text", ["{", "[]", '{"center": {"a": 1}}'])
def test_validate_rejects_malformed(tmp_path, write_config, text):
    assert main(["validate", "--config", write_config(text), "--out", str(tmp_path)]) == 2


def test_missing_config_file(tmp_path):
    assert main(["validate", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == 2


@pytest.mark.parametrize("argv", [
    ["coeffs"],
    ["roots", "--config", SINGLE, "--eps", "abc"],
    ["verify", "--config", SINGLE, "--zmax", "far"],
    ["reproduce", "thm13"],
    ["frobnicate"],
])
def test_usage_errors(argv):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 64


def test_bad_thread_setting(tmp_path, monkeypatch):
    monkeypatch.setenv("AVGCYCLES_THREADS", "lots")
    assert main(["validate", "--config", SINGLE, "--out", str(tmp_path)]) == 64


# ─────────────────────────────────────────────────────────────────────────────
# pipeline and friends
# ─────────────────────────────────────────────────────────────────────────────
def test_single_term_pipeline(tmp_path, ff_x0):
    assert main(["pipeline", "--config", SINGLE, "--out", str(tmp_path), "--skip-verify"]) == 0
    rows = read_rows(str(tmp_path / "averaged.csv"))
    nonzero = {int(r["n"]): float(r["coefficient"]) for r in rows if float(r["coefficient"]) != 0.0}
    assert list(nonzero) == [2]
    with open(SINGLE, "rb") as f:
        problem = parse_problem(f.read())
    expected, _ = compute_coefficient(problem, ff_x0, 0, 1)
    assert nonzero[2] == pytest.approx(expected, rel=1e-12)
    assert read_rows(str(tmp_path / "roots.csv")) == []
    assert not (tmp_path / "cycles.json").exists()
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["summary"]["descartes_bound"] == 0


def test_coefficient_csv_is_deterministic(tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    assert main(["coeffs", "--config", THM12, "--out", str(first)]) == 0
    assert main(["coeffs", "--config", THM12, "--out", str(second)]) == 0
    assert (first / "coeffs.csv").read_bytes() == (second / "coeffs.csv").read_bytes()
    rows = read_rows(str(first / "coeffs.csv"))
    assert len(rows) == 14
    assert list(rows[0]) == ["i", "j", "value", "err"]


def test_roots_subcommand(tmp_path):
    assert main(["roots", "--config", THM12, "--out", str(tmp_path)]) == 0
    rows = read_rows(str(tmp_path / "roots.csv"))
    assert [float(r["z_star"]) for r in rows] == pytest.approx([1.0, 2 ** 0.5, 3 ** 0.5], abs=1e-8)
    assert all(r["simple"] == "true" for r in rows)


def test_printed_branch_needs_worked_centre(tmp_path, write_config):
    path = write_config({"center": {"a": 0, "b": 1, "c": -1, "d": 0}, "switching_line": "y=0",
                         "perturbation": {"p_plus": [[1, 0, 1.0]]}})
    assert main(["coeffs", "--config", path, "--out", str(tmp_path), "--printed-branch"]) == 2
    assert main(["coeffs", "--config", path, "--out", str(tmp_path)]) == 0


def test_orbit_subcommand(tmp_path):
    argv = ["orbit", "--config", SINGLE, "--x0", "0.5", "--y0", "0.2", "--t-max", "-2",
            "--eps", "1e-3", "--out", str(tmp_path)]
    assert main(argv) == 0
    rows = read_rows(str(tmp_path / "orbit.csv"))
    assert list(rows[0]) == ["t", "x", "y"]
    assert float(rows[-1]["t"]) == pytest.approx(-2.0)


def test_settings_precedence():
    base = Settings()
    doc = {"epsilons": [1e-5, 1e-6], "capture_window": 20}
    assert resolve_settings(base, doc, {}).epsilons == (1e-5, 1e-6)
    assert resolve_settings(base, doc, {}).capture_window == 20.0
    assert resolve_settings(base, doc, {"epsilons": (1e-2, 1e-3)}).epsilons == (1e-2, 1e-3)
    assert resolve_settings(base, {}, {"epsilons": None}).epsilons == base.epsilons
    with pytest.raises(ParseError):
        resolve_settings(base, {"epsilon": [1e-3]}, {})


def test_output_formatting(tmp_path):
    assert fmt(0.1) == "0.1"
    assert fmt(np.float64(1) / 3) == repr(1 / 3)
    assert fmt(True) == "true" and fmt(np.bool_(False)) == "false"
    path = write_csv(str(tmp_path / "sub" / "t.csv"), ["n", "c"], [{"n": 1, "c": -5040.0}])
    assert open(path).read() == "n,c\n1,-5040.0\n"


def test_manifest_stage_timing(tmp_path):
    manifest = RunManifest("test")
    with manifest.stage("work"):
        pass
    with manifest.stage("work"):
        pass
    assert manifest.timings["work"] >= 0.0
    manifest.write(str(tmp_path / "m.json"))
    assert json.loads((tmp_path / "m.json").read_text())["outputs"] == [str(tmp_path / "m.json")]


# ─────────────────────────────────────────────────────────────────────────────
# reproduce
# ─────────────────────────────────────────────────────────────────────────────
@pytest.mark.slow
def test_reproduce_thm12(tmp_path, capsys):
    assert main(["reproduce", "thm12", "--out", str(tmp_path)]) == 0
    rows = read_rows(str(tmp_path / "reproduce_thm12.csv"))
    assert not [r for r in rows if r["status"] == "FAIL"]
    assert sum(1 for r in rows if r["criterion"].startswith("cycle near")) == 3
    assert "all criteria passed" in capsys.readouterr().out


@pytest.mark.slow
def test_reproduce_thm11(tmp_path):
    assert main(["reproduce", "thm11", "--out", str(tmp_path)]) == 0
    cycles = json.loads((tmp_path / "manifest.json").read_text())["summary"]
    assert cycles["failed"] == 0
    rows = read_rows(str(tmp_path / "reproduce_thm11.csv"))
    (four_pi,) = [r for r in rows if r["criterion"].startswith("published constant p_plus(2,0)")]
    assert four_pi["status"] == "PASS"


@pytest.mark.slow
def test_verify_thm12_with_step_log(tmp_path):
    assert main(["verify", "--config", THM12, "--out", str(tmp_path), "--step-log"]) == 0
    report = json.loads((tmp_path / "cycles.json").read_text())
    assert report["count_verified"] == 3
    assert report["config"]["epsilons"] == [1e-3, 1e-4]
    for record in report["records"]:
        assert all(sample["within_capture"] for sample in record["samples"])
        assert all(r <= 1 / 3 for r in record["ratios"])
    logs = [name for name in os.listdir(tmp_path) if name.startswith("steps_")]
    assert len(logs) == 6


def test_step_logs_follow_exact_flag(thm12, monkeypatch):
    seen = []

    def fake_period_map(*args, exact=False, step_log=None, **kwargs):
        seen.append(exact)

    monkeypatch.setattr(commands, "period_map", fake_period_map)
    commands._emit_step_logs(thm12, exact=True)
    assert seen and all(seen)


def test_reproduce_without_verification(tmp_path):
    assert main(["reproduce", "thm12", "--skip-verify", "--out", str(tmp_path)]) == 0
    rows = read_rows(str(tmp_path / "reproduce_thm12.csv"))
    assert not any(r["criterion"] == "verified cycles" for r in rows)
    assert any(r["status"] == "INFO" for r in rows)
