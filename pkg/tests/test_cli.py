import json

import pytest
import yaml
from click.testing import CliRunner

from heckecalc.cli import main
from heckecalc.config import (SHIPPED, ConfigError, config_from_dict, load_config, pair_from_dict,
                              resolve_config)
from heckecalc.report import (CheckResult, VerificationReport, emit, exact, measured, parse)
from heckecalc.runner import run_all


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args):
    return runner.invoke(main, [str(a) for a in args], catch_exceptions=False)


# config ----------------------------------------------------------------------------


def test_shipped_configs_load():
    for name in SHIPPED:
        cfg = load_config(name)
        assert cfg.tolerance == 1e-9 and cfg.format == "json"
        assert (cfg.pi is not None) == (cfg.backend == "finite")
        cfg.build_pair()


def test_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        resolve_config("no_such_config")
    with pytest.raises(ConfigError):
        config_from_dict({"pair": {"backend": "finite"}, "colour": "red"})
    with pytest.raises(ConfigError):
        config_from_dict({"pair": {"backend": "modular", "p": 3}, "tolerance": 0})
    with pytest.raises(ConfigError):
        config_from_dict({"pair": {"backend": "modular", "p": 3}, "format": "xml"})
    with pytest.raises(ConfigError):
        config_from_dict({"pair": {"backend": "modular", "p": 3}, "pi": "x.yaml"})
    with pytest.raises(ConfigError):
        config_from_dict({})
    with pytest.raises(ConfigError):
        config_from_dict([1, 2])
    with pytest.raises(ConfigError):
        pair_from_dict({"backend": "finite", "degree": 3})
    with pytest.raises(ConfigError):
        pair_from_dict({"backend": "modular"})
    with pytest.raises(ConfigError):
        pair_from_dict({"backend": "lattice"})
    bad = tmp_path / "bad.yaml"
    bad.write_text("pair: [unclosed\n")
    with pytest.raises(ConfigError):
        load_config(bad)


def test_selection_prefixes():
    cfg = config_from_dict({"pair": {"backend": "modular", "p": 3}, "select": "tree"})
    assert cfg.select == ["tree"]
    assert cfg.selected("tree.regular") and not cfg.selected("treehouse")
    assert not cfg.selected("psi.reduced")


def test_missing_pi_is_skipped():
    cfg = config_from_dict({"pair": load_config("s3_c2").pair, "select": ["rep", "hecke.unit"]})
    report = run_all(cfg)
    statuses = {r.check_id: r.status for r in report.records}
    assert statuses == {"hecke.unit": "pass", "rep": "skipped"}
    assert report.ok


def test_modular_rep_not_applicable():
    cfg = load_config("modular_p3")
    cfg.select = ["rep", "phi"]
    report = run_all(cfg)
    assert [r.status for r in report.records] == ["not_applicable", "not_applicable"]


def test_empty_selection():
    cfg = load_config("s4_s3")
    cfg.select = []
    report = run_all(cfg)
    assert report.records == [] and report.summary["total"] == 0


# reports ---------------------------------------------------------------------------


def test_emit_roundtrip_and_text():
    empty = VerificationReport(config={}, tool_version="x")
    assert parse(emit(empty)).records == []
    assert "0 checks" in emit(empty, "text")
    rep = VerificationReport([measured("a.b", "T", 0.5, 1e-9, "w"), exact("c", "T", True),
                              CheckResult("d", "T", "skipped")], {"k": 1}, "0.1.0")
    back = parse(emit(rep))
    assert back.records == rep.records and back.config == rep.config
    text = emit(rep, "text").splitlines()
    assert len(text) == 4 and "residual=5.000e-01" in text[0] and "witness=w" in text[0]
    assert not rep.ok
    with pytest.raises(ValueError):
        emit(rep, "yaml")


# commands --------------------------------------------------------------------------


def test_pair_info(runner):
    out = invoke(runner, "pair", "info", "-c", "s4_s3")
    info = json.loads(out.output)
    assert info["order"] == 24 and info["index"] == 4
    assert [d["size"] for d in info["double_cosets"]] == [6, 18]
    out = invoke(runner, "pair", "info", "-c", "modular_p5")
    assert json.loads(out.output)["t_p_index"] == 6


def test_bad_config_is_usage_error(runner):
    res = runner.invoke(main, ["pair", "info", "-c", "nowhere"])
    assert res.exit_code == 2


def test_coset_commands(runner):
    res = invoke(runner, "coset", "canon", "-c", "s4_s3", "(1 2 3)")
    assert res.output.strip() == "R|G|()"
    res = invoke(runner, "coset", "decompose", "-c", "s4_s3", "(1 4)")
    assert len(res.output.split()) >= 3 and res.output.count("\n") == 3
    res = invoke(runner, "coset", "decompose", "-c", "modular_p3", "--side", "left", "[[3,0],[0,1]]")
    assert res.output.count("\n") == 4
    res = invoke(runner, "coset", "split", "-c", "s4_s3", "--level", "G[(1 4)]", "R|G|()")
    assert res.output.count("\n") == 3
    res = runner.invoke(main, ["coset", "canon", "-c", "s4_s3", "(1 9)"])
    assert res.exit_code == 2


def test_hecke_commands(runner):
    res = invoke(runner, "hecke", "mul", "-c", "s4_s3", "-a", "(1 4)", "-b", "(1 4)")
    assert res.output.strip() == "3*[G () G] + 2*[G (3 4) G]"
    res = invoke(runner, "hecke", "mul", "-c", "modular_p2", "-a", "[[2,0],[0,1]]", "-b", "[[2,0],[0,1]]")
    assert res.output.strip() == "3*[G [[1,0],[0,1]] G] + 1*[G [[1,0],[0,4]] G]"
    res = invoke(runner, "hecke", "star", "-c", "s4_s3", "-h", "1/2@(1 4)")
    assert res.output.strip() == "1/2*[G (3 4) G]"
    res = invoke(runner, "hecke", "act", "-c", "modular_p3", "-h", "[[3,0],[0,1]]", "e")
    assert res.output.count("\n") == 4
    res = invoke(runner, "hecke", "act", "-c", "s4_s3", "--side", "left", "-h", "(1 4)", "(1 4)")
    assert sum(int(line.split("\t")[0]) for line in res.output.splitlines()) == 3
    res = runner.invoke(main, ["hecke", "mul", "-c", "s4_s3", "-a", "x@(1 4)", "-b", "e"])
    assert res.exit_code == 2


def test_verify_relation_command(runner, tmp_path):
    good = tmp_path / "good.yaml"
    good.write_text(yaml.safe_dump({"lhs": [["e", "e"]], "rhs": [["(1 2)", "e"]]}))
    res = invoke(runner, "hecke", "verify-relation", "-c", "s4_s3", "--instance", good)
    assert res.exit_code == 0 and res.output.strip() == "valid"
    bad = tmp_path / "bad.yaml"
    bad.write_text(yaml.safe_dump({"lhs": [["e", "e"], ["(1 2)", "e"]], "rhs": [["e", "e"]]}))
    res = runner.invoke(main, ["hecke", "verify-relation", "-c", "s4_s3", "--instance", str(bad),
                               "--method", "cosets"])
    assert res.exit_code == 1 and res.output.startswith("invalid: lhs terms overlap (witness")
    fine = tmp_path / "fine.yaml"
    fine.write_text(yaml.safe_dump({"level": ["(1 4)"], "lhs": [["e", "e"]], "rhs": [["e", "e"]]}))
    assert invoke(runner, "hecke", "verify-relation", "-c", "s4_s3", "--instance", fine).exit_code == 0


def test_rep_check_command(runner):
    res = invoke(runner, "rep", "check", "-c", "s4_s3", "--relation", "3,5", "--format", "text")
    assert res.exit_code == 0
    assert "rel.3.kronecker" in res.output and "rel.4" not in res.output
    res = runner.invoke(main, ["rep", "check", "-c", "s4_s3", "--relation", "9"])
    assert res.exit_code == 2
    res = runner.invoke(main, ["rep", "check", "-c", "modular_p3"])
    assert res.exit_code == 2


def test_rep_check_bad_pi(runner, tmp_path):
    pi = tmp_path / "pi.yaml"
    pi.write_text(yaml.safe_dump({"basis": ["()", "(1 2)"], "generators": [
        {"element": "(1 2)", "matrix": [[1, 0], [0, 1]]},
        {"element": "(1 2 3)", "matrix": [[1, 0], [0, 1]]}]}))
    res = runner.invoke(main, ["rep", "check", "-c", "s3_c2", "--pi", str(pi)])
    assert res.exit_code == 2 and "rep.extension.regular" in res.output


def test_phi_commands(runner, tmp_path):
    res = invoke(runner, "phi", "check", "-c", "s3_c2")
    assert res.exit_code == 0
    data = json.loads(res.output)
    assert data["summary"]["fail"] == 0 and data["summary"]["info"] == 2
    pairs = tmp_path / "pairs.yaml"
    pairs.write_text(yaml.safe_dump([["()", "()"], ["(1 4)", "(1 4)"]]))
    out = tmp_path / "gram.csv"
    res = invoke(runner, "phi", "gram", "-c", "s4_s3", "--pairs", pairs, "--csv", out)
    assert res.exit_code == 0 and res.output.startswith("2 pairs")
    assert out.read_text().splitlines()[0] == ",()|(),(1 4)|(1 4)"
    res = invoke(runner, "phi", "gram", "-c", "s4_s3")
    assert res.output.startswith("16 pairs")


def test_tree_commands(runner, tmp_path):
    dot = tmp_path / "t.dot"
    res = invoke(runner, "tree", "ball", "-p", 3, "-r", 2, "--dot", dot)
    assert res.exit_code == 0 and "tree.vertex_count" in res.output
    assert dot.read_text().startswith("graph")
    res = invoke(runner, "tree", "psi", "-p", 3, "-r", 1)
    assert res.exit_code == 0 and res.output.count("\n") == 5
    assert res.output.splitlines()[0].endswith("\te")
    res = runner.invoke(main, ["tree", "psi", "-p", "2", "-r", "1"])
    assert res.exit_code == 2
    res = runner.invoke(main, ["tree", "ball", "-p", "3", "-r", "50"])
    assert res.exit_code == 2
    res = invoke(runner, "tree", "spectrum", "-p", 3, "-r", 1)
    assert abs(float(res.output.split()[0]) - 2.0) < 1e-12
    res = invoke(runner, "tree", "spectrum", "-p", 3, "-r", 3, "--csv", "-")
    rows = res.output.splitlines()
    assert rows[0] == "radius,vertices,spectral_radius" and len(rows) == 5
    out = tmp_path / "spec.csv"
    invoke(runner, "tree", "spectrum", "-p", 5, "-r", 2, "--csv", out)
    assert out.read_text().splitlines()[3].startswith("2,37,")


def test_run_all_select_none_and_output(runner, tmp_path):
    res = invoke(runner, "run-all", "s3_c2", "--select", "none")
    assert res.exit_code == 0 and json.loads(res.output)["summary"]["total"] == 0
    out = tmp_path / "r.json"
    res = invoke(runner, "run-all", "modular_p2", "--select", "psi", "-o", out)
    assert res.exit_code == 0
    assert [r["status"] for r in json.loads(out.read_text())["records"]] == ["not_applicable"]


def test_run_all_failure_exit_code(runner, tmp_path):
    cfg = load_config("s3_c2")
    data = cfg.echo()
    data["pi"] = str(tmp_path / "pi.yaml")
    (tmp_path / "pi.yaml").write_text(yaml.safe_dump({"basis": ["()", "(1 2)"], "generators": [
        {"element": "(1 2)", "matrix": [[0, 1], [1, 0]]},
        {"element": "(1 2 3)", "matrix": [[0, 1], [1, 0]]}]}))
    data["pair"] = dict(cfg.pair)
    path = tmp_path / "cfg.yaml"
    path.write_text(yaml.safe_dump(data))
    res = runner.invoke(main, ["run-all", str(path), "--select", "rep", "--format", "text"])
    assert res.exit_code == 1 and "FAIL" in res.output


def test_run_all_deterministic(runner):
    a = invoke(runner, "run-all", "s3_c2").output
    b = invoke(runner, "run-all", "s3_c2").output
    assert a == b
    assert json.loads(a)["summary"]["fail"] == 0


def test_version(runner):
    assert "0.1.0" in invoke(runner, "--version").output
