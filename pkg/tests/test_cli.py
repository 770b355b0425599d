import io
import json
import subprocess
import sys

import pytest

from earthquake_lab.cli import main, read_payload
from earthquake_lab.errors import ValidationError
from earthquake_lab.fixtures import GENERIC_FN
from earthquake_lab.teichmueller import TeichPoint, fn_to_holonomy, teich_distance_proxy

POINT = {"fn": GENERIC_FN.to_dict()}
DUAL = [{"word": "b1", "weight": 0.5}, {"word": "b2", "weight": 0.8}, {"word": "b1b2", "weight": 0.3}]
PANTS = [{"word": w, "weight": 1.0} for w in ("a1", "a2", "a1b1A1B1")]


def call(tmp_path, command, payload=None, *flags, name="in.json"):
    args = [command, "--out", str(tmp_path / "out"), *flags]
    if payload is not None:
        path = tmp_path / name
        path.write_text(json.dumps(payload))
        args += ["--input", str(path)]
    return main(args)


def result(tmp_path, command):
    return json.loads((tmp_path / "out" / f"{command}.json").read_text())["result"]


def test_quake_time_zero_returns_the_input(tmp_path, capsys):
    assert call(tmp_path, "quake", {"point": POINT, "lambda": DUAL, "t": 0.0}) == 0
    out = json.loads(capsys.readouterr().out)
    v = TeichPoint.from_dict(out["result"]["point"])
    assert teich_distance_proxy(v, fn_to_holonomy(GENERIC_FN)) < 1e-10
    assert out["result"] == result(tmp_path, "quake")
    meta = json.loads((tmp_path / "out" / "quake.metadata.json").read_text())
    assert "seconds" in meta and "finished_utc" in meta


def test_validation_failure_writes_nothing(tmp_path, capsys):
    # b1 meets a1: not a multicurve
    bad = [{"word": "a1", "weight": 1.0}, {"word": "b1", "weight": 1.0}]
    assert call(tmp_path, "quake", {"point": POINT, "lambda": bad, "t": 1.0}) == 1
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"] == "validation"
    assert not (tmp_path / "out").exists()
    assert call(tmp_path, "quake", {"point": POINT, "lambda": DUAL, "t": -1.0}) == 1
    assert call(tmp_path, "quake", {"point": POINT, "lambda": DUAL, "side": "up"}) == 1
    assert call(tmp_path, "surface", {"lengths": [1.0, 1.0], "twists": [0, 0, 0]}) == 1
    assert call(tmp_path, "theta", {"kappa": -1}) == 1
    assert not (tmp_path / "out").exists()


def test_usage_errors_exit_one(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 1
    assert call(tmp_path, "theta", {"kappa": 1.0}, "--tol", "nonsense=1") == 1
    assert call(tmp_path, "theta", {"kappa": 1.0}, "--tol", "relator") == 1


def test_numerical_failure_exits_two(tmp_path, capsys):
    # an impossible relator tolerance makes every earthquake report a broken relator
    code = call(tmp_path, "quake", {"point": POINT, "lambda": DUAL, "t": 1.0}, "--tol", "relator_broken=1e-30")
    assert code == 2
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"] == "RelatorBroken" and "residual" in err["diagnostics"]


def test_theta_csv(tmp_path, capsys):
    assert call(tmp_path, "theta", {"kappa": [0.0, 1.0986122886681098]}, "--format", "csv") == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "kappa,theta"
    assert lines[1] == "0.0,0.0"
    assert float(lines[2].split(",")[1]) == pytest.approx(0.9364720075665229, abs=1e-15)
    assert (tmp_path / "out" / "theta.csv").read_text().strip().splitlines() == lines


def test_surface_length_intersect(tmp_path, capsys):
    assert call(tmp_path, "surface", GENERIC_FN.to_dict()) == 0
    r = result(tmp_path, "surface")
    assert r["pants_lengths"] == pytest.approx([1.3, 1.7, 1.1], abs=1e-9)
    assert call(tmp_path, "length", {"point": POINT, "curves": ["a1", "b1"], "lambda": DUAL}) == 0
    assert result(tmp_path, "length")["lengths"]["a1"] == pytest.approx(1.3, abs=1e-9)
    assert call(tmp_path, "intersect", {"a": "a1", "b": "b1"}) == 0
    assert result(tmp_path, "intersect")["intersection"] == 1
    assert call(tmp_path, "intersect", {"lambda": PANTS, "mu": DUAL}) == 0
    assert result(tmp_path, "intersect")["matrix"] == [[1, 0, 1], [0, 1, 1], [0, 0, 2]]


def test_cocycle_and_recurrence(tmp_path, capsys):
    assert call(tmp_path, "cocycle", {"point": POINT, "lambda": [{"word": "a1", "weight": 1.0}],
                                      "xi_check": True}) == 0
    r = result(tmp_path, "cocycle")
    assert r["relator_residual"] < 1e-8 and r["xi_push"]["pairing"] == "+right/-left"
    lines = (tmp_path / "out" / "cocycle.csv").read_text().splitlines()
    assert lines[0] == "generator,x1,x2,x3" and len(lines) == 5
    short = {"fn": {"lengths": [0.05, 2.0, 2.0], "twists": [0, 0, 0]}}
    assert call(tmp_path, "recurrence", {"point": short, "curve": "a1", "n_samples": 10}) == 0
    assert result(tmp_path, "recurrence")["counts"] == [1] * 10


def test_config_file_and_overrides(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# test config\nseed = 5\ndepth = 10\ntol.relator = 2e-9\n")
    assert call(tmp_path, "theta", {"kappa": 1.0}, "--config", str(cfg)) == 0
    env = json.loads((tmp_path / "out" / "theta.json").read_text())
    assert env["seed"] == 5 and env["config"]["depth"] == 10
    assert env["config"]["tolerances"]["relator"] == 2e-9
    assert call(tmp_path, "theta", {"kappa": 1.0}, "--config", str(cfg), "--seed", "9", "--tol",
                "relator=3e-9") == 0
    env = json.loads((tmp_path / "out" / "theta.json").read_text())
    assert env["seed"] == 9 and env["config"]["tolerances"]["relator"] == 3e-9


def test_read_payload(tmp_path):
    assert read_payload("-", io.StringIO('{"a": 1}')) == {"a": 1}
    assert read_payload("-", io.StringIO("")) == {}
    with pytest.raises(ValidationError):
        read_payload("-", io.StringIO("[1, 2]"))
    with pytest.raises(ValidationError):
        read_payload(str(tmp_path / "missing.json"))


@pytest.mark.slow
def test_fixpoint_command(tmp_path, capsys):
    payload = {"lambda": PANTS, "mu": [{"word": w, "weight": 1.0} for w in ("b1", "b2", "b1b2")],
               "t": 0.5, "method": "newton"}
    assert call(tmp_path, "fixpoint", payload) == 0
    r = result(tmp_path, "fixpoint")
    assert r["residuals"]["fixed_point_proxy"] < 1e-6 and r["residuals"]["mess"] < 1e-6


@pytest.mark.slow
def test_selftest_console_script_is_deterministic(tmp_path):
    def run(out):
        return subprocess.run([sys.executable, "-m", "earthquake_lab", "selftest", "--out", str(out)],
                              capture_output=True, text=True, timeout=600)
    a, b = run(tmp_path / "a"), run(tmp_path / "b")
    assert a.returncode == 0, a.stderr
    assert "FAIL" not in a.stderr
    assert a.stdout == b.stdout
    assert (tmp_path / "a" / "selftest.json").read_bytes() == (tmp_path / "b" / "selftest.json").read_bytes()
