import json
import math

import numpy as np
import pytest

from sphermean import phantoms as ph
from sphermean.cli import emit_report, main, parse_args
from sphermean.field import load_field, save_field


def test_parse_transform_config():
    cfg = parse_args(["transform", "--input", "f.bin", "--radius", "0.7", "--method", "fft",
                      "--output", "h.bin"])
    assert cfg.subcommand == "transform" and cfg.radius == 0.7 and cfg.method == "fft"


def test_parse_verify_all():
    cfg = parse_args(["verify", "all", "--dim", "2", "--seed", "7"])
    assert (cfg.action, cfg.dim, cfg.seed) == ("all", 2, 7)


@pytest.mark.parametrize("argv", [
    ["transform", "--input", "f.bin", "--radius", "-1", "--output", "h.bin"],
    ["transform", "--input", "f.bin", "--radius", "0.7", "--output", "h.bin", "--bogus"],
    ["transform", "--input", "f.bin", "--output", "h.bin"],
    ["invert", "--input", "h.bin", "--radius", "0.7", "--policy", "wiener", "--output", "f.bin"],
    ["verify", "specfun", "--mask", "K.bin", "--radius", "0.5"],
    ["verify", "support", "--mask", "K.bin"],
    [],
])
def test_usage_errors_exit_2(argv, capsys):
    assert main(argv) == 2
    assert capsys.readouterr().err


def test_help_documents_flags(capsys):
    with pytest.raises(SystemExit):
        parse_args(["transform", "--help"])
    out = capsys.readouterr().out
    for flag in ("--input", "--radius", "--method", "--output", "--verify", "--report", "--verbose"):
        assert flag in out


def test_emit_report_format():
    text = emit_report({"b": [1.0, math.nan, math.inf], "a": {"z": 0.1, "y": True}, "pass": False})
    assert text.index('"a"') < text.index('"b"') < text.index('"pass"')
    assert "0.10000000000000001" in text
    doc = json.loads(text)
    assert doc["b"] == [1, None, None]
    assert emit_report(doc) == emit_report(json.loads(text))


def test_bessel_csv(capsys):
    assert main(["bessel", "--order", "0.5", "--count", "3"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "index,zero"
    assert lines[1] == f"1,{math.pi:.15g}"


def test_phantom_is_deterministic(tmp_path):
    for name in ("a", "b"):
        assert main(["phantom", "--kind", "random-bumps", "--shape", "64", "--seed", "3",
                     "--output", str(tmp_path / f"{name}.bin")]) == 0
    assert (tmp_path / "a.bin").read_bytes() == (tmp_path / "b.bin").read_bytes()
    assert (tmp_path / "a.json").read_text() == (tmp_path / "b.json").read_text()


def test_zalcman_phantom(tmp_path):
    out = tmp_path / "z.bin"
    assert main(["phantom", "--kind", "zalcman", "--dim", "2", "--shape", "512", "--output", str(out)]) == 0
    f = load_field(out)
    assert f.shape == (512, 512) and f.values.max() == pytest.approx(1.0)


def test_transform_and_invert(tmp_path, capsys):
    f = ph.gaussian(2, 256, 0.1, sigma=1.0)
    save_field(tmp_path / "f.bin", f)
    assert main(["transform", "--input", str(tmp_path / "f.bin"), "--radius", "0.7",
                 "--output", str(tmp_path / "h.bin"), "--verify"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert set(rep) == {"method", "R", "ring_maxima", "oracle_rel_err"}
    assert max(rep["ring_maxima"]) < 1e-2
    assert main(["invert", "--input", str(tmp_path / "h.bin"), "--radius", "0.7",
                 "--output", str(tmp_path / "g.bin")]) == 0
    g = load_field(tmp_path / "g.bin")
    assert np.linalg.norm(g.values - f.values) / np.linalg.norm(f.values) < 5e-2


def test_abel_roundtrip(tmp_path):
    r = np.linspace(0, 1, 201)
    np.savetxt(tmp_path / "g.csv", np.c_[r, 1 - r ** 2 + 0.5 * r ** 4], delimiter=",",
               header="r,value", comments="")
    assert main(["abel", "forward", "--input", str(tmp_path / "g.csv"), "--output", str(tmp_path / "f.csv")]) == 0
    assert main(["abel", "inverse", "--input", str(tmp_path / "f.csv"), "--output", str(tmp_path / "b.csv")]) == 0
    back = np.loadtxt(tmp_path / "b.csv", delimiter=",", skiprows=1)
    assert np.max(np.abs(back[20:, 1] - (1 - r ** 2 + 0.5 * r ** 4)[20:])) < 1e-6


def test_verify_support_violation_exits_1(tmp_path):
    N, h = 192, 0.02
    K = ph.disk_mask(2, N, h, 1.0)
    save_field(tmp_path / "K.bin", ph.grid(2, N, h).with_values(K.values.astype(float)))
    f = ph.add(ph.radial_bump(2, N, h, 0.9), ph.radial_bump(2, N, h, 0.12, (1.3, 0.0)))
    save_field(tmp_path / "f.bin", f)
    report = tmp_path / "r.json"
    code = main(["verify", "support", "--field", str(tmp_path / "f.bin"), "--mask", str(tmp_path / "K.bin"),
                 "--radius", "0.5", "--report", str(report)])
    doc = json.loads(report.read_text())
    assert code == 1 and doc["pass"] is False
    assert doc["metrics"]["status"] == "hypothesis-violated"
    assert doc["witnesses"]


def test_verify_rconvex_mask(tmp_path, capsys):
    assert main(["phantom", "--kind", "disk-mask", "--shape", "128", "--size", "1.0",
                 "--output", str(tmp_path / "K.bin")]) == 0
    assert main(["verify", "rconvex", "--mask", str(tmp_path / "K.bin"), "--radius", "0.4"]) == 0
    assert json.loads(capsys.readouterr().out)["metrics"]["status"] == "r_convex"


def test_io_failure_exits_1(tmp_path, capsys):
    assert main(["transform", "--input", str(tmp_path / "missing.bin"), "--radius", "0.5",
                 "--output", str(tmp_path / "h.bin")]) == 1
    assert "missing" in capsys.readouterr().err


def test_verify_suite_report(tmp_path):
    report = tmp_path / "s.json"
    assert main(["verify", "local", "--report", str(report)]) == 0
    doc = json.loads(report.read_text())
    assert set(doc) == {"suite", "config", "metrics", "witnesses", "pass"}
    assert doc["pass"] is True and doc["config"]["seed"] == 7


def test_failing_suite_has_witnesses():
    from sphermean.suites import CheckResult, SuiteResult

    doc = json.loads(emit_report(SuiteResult("x", [CheckResult("a", False, {"err": 1.0})])))
    assert doc["pass"] is False and doc["witnesses"] == [{"check": "a", "kind": "failed_check"}]
