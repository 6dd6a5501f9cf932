import json
import re
from pathlib import Path

import numpy as np
import pytest

from poissonlab import poisson as ps
from poissonlab.errors import ConfigError
from poissonlab.harness import cli
from poissonlab.harness.config import DEFAULT_SEED, load_config, parse_config
from poissonlab.harness.report import ReportRecord, format_table, sort_records, write_jsonl
from poissonlab.harness.suites import ANCHORS, SUITES, parse_instance, parse_structure, run_suite

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def write(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


# -- config parsing ---------------------------------------------------------------------------


def test_defaults_without_run_section():
    cfg = parse_config("")
    assert cfg.seed == DEFAULT_SEED
    assert cfg.suites is None


def test_empty_suite_list_is_explicit():
    assert parse_config("[run]\nsuites =\n").suites == []


@pytest.mark.parametrize(
    "text",
    [
        "[run]\nseed = abc\n",
        "[run]\nseed = -1\n",
        "[run]\nstep = 0\n",
        "[suite:algebra]\ntol.jacobi = -1e-3\n",
        "[suite:algebra]\ntol.jacobi = tiny\n",
        "[algebra:x]\ntriples = 0 1 2 1\n",
        "[algebra:x]\ndim = 3\ntriples = 0 1 5 1\n",
        "[algebra:x]\ndim = 3\ntriples = 0 1 2\n",
        "[nonsense]\nfoo = 1\n",
        "not an ini file",
    ],
)
def test_bad_config_rejected(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_custom_algebra_and_tolerance_override():
    cfg = parse_config("[algebra:ab2]\ndim = 2\ntriples = 0 1 1 1\n[suite:algebra]\ntol.jacobi = 1e-3\n")
    assert cfg.algebra("ab2").dim == 2
    assert cfg.suite("algebra").tol("jacobi", 1e-12) == 1e-3
    assert cfg.suite("lie-poisson").tol("jacobi", 1e-12) == 1e-12


def test_missing_config_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/run.ini")


# -- structure and instance strings -------------------------------------------------------------


def test_parse_structure_kinds():
    cfg = parse_config("")
    x = np.array([0.1, -0.2, 0.3, 0.4])
    np.testing.assert_array_equal(parse_structure("zero 4", cfg).matrix(x), np.zeros((4, 4)))
    np.testing.assert_allclose(parse_structure("lie-poisson so3", cfg).matrix(x[:3]), ps.lie_poisson(cfg.algebra("so3")).matrix(x[:3]))
    assert parse_structure("constant-symplectic 4", cfg).chart.dim == 4
    assert parse_structure("tangent-lift lie-poisson so3", cfg).chart.dim == 6


def test_parse_polynomial_structure():
    pi = parse_structure("poly 2 | 0,1: x0*x1", parse_config(""))
    m = pi.matrix(np.array([2.0, 3.0]))
    assert m[0, 1] == pytest.approx(6.0) and m[1, 0] == pytest.approx(-6.0)


@pytest.mark.parametrize("text", ["", "lie-poisson", "lie-poisson nope", "zero x", "warp 3"])
def test_parse_structure_errors(text):
    with pytest.raises(ConfigError):
        parse_structure(text, parse_config(""))


def test_parse_instance():
    cfg = parse_config("")
    assert parse_instance("pair 3", cfg).arrow_dim == 6
    assert parse_instance("cotangent-group SO3", cfg).base_dim == 3
    assert parse_instance("tangent-lift pair 2", cfg).arrow_dim == 8
    with pytest.raises(ConfigError):
        parse_instance("cotangent-group XX", cfg)


# -- running suites ---------------------------------------------------------------------------------


def test_every_suite_declares_spec_anchors():
    assert len(SUITES) == 12
    for suite in SUITES.values():
        assert suite.anchors and set(suite.anchors) <= set(ANCHORS)


def test_records_carry_known_anchors_and_seed():
    cfg = parse_config("[run]\nseed = 5\n")
    for name in ("algebra", "bialgebra-double"):
        for r in run_suite(cfg, name):
            assert r.anchor in ANCHORS and r.anchor in SUITES[name].anchors
            assert r.seed == 5


def test_broken_algebra_fails_the_algebra_suite():
    recs = {r.check: r for r in run_suite(load_config(CONFIGS / "broken.ini"), "algebra")}
    assert recs["jacobi[bad3]"].residual == pytest.approx(1.0)
    assert not recs["jacobi[bad3]"].passed
    assert recs["jacobi[so3]"].passed


def test_detector_flags_a_missing_defect():
    # an algebra that happens to satisfy Jacobi is not a valid "broken" probe
    cfg = parse_config("[suite:algebra]\nalgebras = so3\nbroken = so3\n")
    rec = next(r for r in run_suite(cfg, "algebra") if r.check.startswith("detects-broken"))
    assert rec.residual == pytest.approx(1.0) and not rec.passed


def test_tolerance_override_changes_verdict():
    cfg = parse_config("[suite:lie-poisson]\nalgebras = so3\nsamples = 5\ntol.jacobi-points = 1e-300\n")
    recs = {r.check: r for r in run_suite(cfg, "lie-poisson")}
    assert recs["jacobi-points[so3]"].tolerance == 1e-300


def test_construction_error_becomes_error_record():
    cfg = parse_config("[suite:groupoid-axioms]\ninstances = cotangent-group XX\nsamples = 2\nlift_samples = 2\n")
    recs = run_suite(cfg, "groupoid-axioms")
    assert recs and all(r.error and not r.passed for r in recs)


def test_same_seed_same_records_different_seed_differs():
    a = run_suite(parse_config("[run]\nseed = 1\n[suite:lie-poisson]\nalgebras = so3\nsamples = 5\n"), "cotangent-algebroid")
    b = run_suite(parse_config("[run]\nseed = 1\n[suite:lie-poisson]\nalgebras = so3\nsamples = 5\n"), "cotangent-algebroid")
    c = run_suite(parse_config("[run]\nseed = 2\n"), "cotangent-algebroid")
    assert [r.to_json() for r in a] == [r.to_json() for r in b]
    assert [r.residual for r in a] != [r.residual for r in c]


def test_unknown_suite_raises():
    with pytest.raises(ConfigError):
        run_suite(parse_config(""), "no-such-suite")


# -- report ---------------------------------------------------------------------------------------


def test_report_json_fields_and_sorting():
    recs = [ReportRecord("b", "x[1]", "§1", 0.5, 1.0, 3, 9), ReportRecord("a", "y[2]", "Eq. 5", 2.0, 1.0, 3, 9)]
    assert [r.suite for r in sort_records(recs)] == ["a", "b"]
    data = json.loads(recs[0].to_json())
    assert data == {"suite": "b", "check": "x[1]", "anchor": "§1", "residual": 0.5, "tolerance": 1.0, "samples": 3, "seed": 9, "verdict": "pass"}
    assert "§1" in recs[0].to_json()  # not escaped
    assert json.loads(recs[1].to_json())["verdict"] == "fail"


def test_error_record_has_null_residual():
    rec = ReportRecord("s", "c", "§1", float("inf"), 1.0, 1, 0, "ConfigError: boom")
    data = json.loads(rec.to_json())
    assert data["residual"] is None and data["verdict"] == "fail" and data["error"] == "ConfigError: boom"
    assert "error" in format_table([rec])


# -- command line ---------------------------------------------------------------------------------


def test_cli_empty_suite_list_runs_nothing(tmp_path, capsys):
    out = tmp_path / "r.jsonl"
    assert cli.main(["run", write(tmp_path, "[run]\nsuites =\n"), "--json", str(out)]) == cli.EXIT_OK
    assert out.read_text() == ""


def test_cli_broken_config_exits_one(tmp_path, capsys):
    out = tmp_path / "r.jsonl"
    assert cli.main(["run", str(CONFIGS / "broken.ini"), "--json", str(out)]) == cli.EXIT_FAIL
    verdicts = {json.loads(line)["check"]: json.loads(line)["verdict"] for line in out.read_text().splitlines()}
    assert verdicts["jacobi[bad3]"] == "fail"
    assert "FAIL" in capsys.readouterr().out


@pytest.mark.parametrize("text", ["[run]\nseed = x\n", "[run]\nsuites = algebra, nope\n"])
def test_cli_bad_config_exits_two(tmp_path, capsys, text):
    assert cli.main(["run", write(tmp_path, text)]) == cli.EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_cli_missing_file_and_negative_seed(tmp_path, capsys):
    assert cli.main(["run", str(tmp_path / "absent.ini")]) == cli.EXIT_CONFIG
    assert cli.main(["run", write(tmp_path, ""), "--seed", "-3", "--suite", "algebra"]) == cli.EXIT_CONFIG


def test_cli_construction_error_exits_two(tmp_path, capsys):
    text = "[run]\nsuites = groupoid-axioms\n[suite:groupoid-axioms]\ninstances = cotangent-group XX\n"
    assert cli.main(["run", write(tmp_path, text)]) == cli.EXIT_CONFIG


def test_cli_suite_flag_and_seed_override(tmp_path, capsys):
    path = write(tmp_path, "[run]\nseed = 1\nsuites = algebra, lie-poisson\n")
    assert cli.main(["run", path, "--suite", "bialgebra-double", "--seed", "42", "--json", "-"]) == cli.EXIT_OK
    lines = [json.loads(line) for line in capsys.readouterr().out.splitlines() if line.startswith("{")]
    assert lines and {r["suite"] for r in lines} == {"bialgebra-double"}
    assert {r["seed"] for r in lines} == {42}


def test_cli_json_is_deterministic(tmp_path, capsys):
    path = write(tmp_path, "[run]\nsuites = algebra, lie-poisson, bialgebra-double\n[suite:lie-poisson]\nsamples = 10\n")
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    assert cli.main(["run", path, "--json", str(a)]) == cli.EXIT_OK
    assert cli.main(["run", path, "--json", str(b)]) == cli.EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    keys = [(json.loads(x)["suite"], json.loads(x)["check"]) for x in a.read_text().splitlines()]
    assert keys == sorted(keys)


def test_cli_list(capsys):
    assert cli.main(["list"]) == cli.EXIT_OK
    first = capsys.readouterr().out
    for token in ("so3", "SO3", "lie-poisson <algebra>", "cotangent-group <G>", "eq10-lagrangian-graph", "Eq. 10"):
        assert token in first
    cli.main(["list"])
    assert capsys.readouterr().out == first


def test_cli_describe(capsys):
    assert cli.main(["describe", "tangent-lift"]) == cli.EXIT_OK
    assert "Prop. 2.7" in capsys.readouterr().out
    assert cli.main(["describe", "nope"]) == cli.EXIT_CONFIG


def test_table_lists_every_record(capsys):
    recs = run_suite(parse_config(""), "bialgebra-double")
    table = format_table(recs)
    assert len([ln for ln in table.splitlines() if re.search(r"\b(PASS|FAIL)$", ln)]) == len(recs)
