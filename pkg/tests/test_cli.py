import json
import subprocess
import sys

import pytest

from dpconvex.cli import main, parse_complex, ConfigError
from oracles import rho_brentq

SCHEMA = {"command", "domain", "mapping", "seed", "samples", "verdict", "margins", "witness",
          "details", "timing_ms"}
THEOREM4 = {"family": "Theorem4Quadratic", "a": [0.05, 0.05], "a_prime": [0.05, 0.05]}
NEG_CONTROL = {"family": "CustomTriangular",
               "components": [{"terms": [{"coeff": [3, 0], "powers": [2, 0]}]}, {"terms": []}]}
EXAMPLE1 = {"family": "Example1", "k": 2, "lam": [0.5, 0], "a": [0.05, 0.05, 0.05]}


@pytest.fixture
def run_cli(tmp_path, capsys):
    def run(args, config):
        path = tmp_path / "config.json"
        path.write_text(json.dumps(config))
        code = main(args + ["--config", str(path)])
        out = capsys.readouterr()
        return code, (json.loads(out.out) if out.out else None), out.err
    return run


def strip_timing(report):
    return {k: v for k, v in report.items() if k != "timing_ms"}


def test_rho_command(run_cli):
    code, rep, _ = run_cli(["rho"], {"domain": {"p": [2, 2]}, "point": [[0.6, 0], [0, 0.8]]})
    assert code == 0 and rep["details"]["rho"] == pytest.approx(1.0, abs=1e-15)
    assert set(rep) == SCHEMA
    _, rep, _ = run_cli(["rho"], {"domain": {"p": [2, 2]}, "point": [0, 0]})
    assert rep["details"]["rho"] == 0.0
    _, rep, _ = run_cli(["rho"], {"domain": {"p": [2, 4]}, "point": [0.5, 0.5]})
    assert rep["details"]["rho"] == pytest.approx(rho_brentq([2, 4], [0.5, 0.5]), abs=1e-14)


def test_rho_allows_exponents_below_two(run_cli):
    code, rep, _ = run_cli(["rho"], {"domain": {"p": [1.5, 3]}, "point": [0.2, 0.1]})
    assert code == 0


def test_check_commands(run_cli):
    code, rep, _ = run_cli(["check", "1", "--samples", "200"],
                           {"domain": {"p": [2, 3, 3]}, "mapping": {"family": "Identity"}})
    assert code == 0 and rep["verdict"] == "pass" and rep["command"] == "check 1"
    code, rep, _ = run_cli(["check", "4"], {"domain": {"p": [3, 3]}, "mapping": THEOREM4})
    assert code == 0
    assert [m["condition"] for m in rep["margins"]] == ["T4.4", "T4.5"]
    assert rep["details"]["notes"]["lhs4"] == pytest.approx(0.46)
    assert rep["details"]["notes"]["lhs5"] == pytest.approx(0.46)
    bad = dict(THEOREM4, a=[0.5, 0], a_prime=[0, 0])
    code, rep, _ = run_cli(["check", "4"], {"domain": {"p": [3, 3]}, "mapping": bad})
    assert code == 1 and rep["verdict"] == "fail"
    code, rep, _ = run_cli(["check", "3", "--k", "2", "--samples", "100"],
                           {"domain": {"p": [2, 3, 3]}, "mapping": {"family": "Identity"}})
    assert code == 0


def test_scan_identity(run_cli):
    code, rep, _ = run_cli(["scan"], {"domain": {"p": [2, 2]}, "mapping": {"family": "Identity"}})
    assert code == 0 and rep["samples"] == 10_000
    assert rep["details"]["min_j"] >= -1e-12 and rep["verdict"] == "no violation found"
    assert set(rep["witness"]) == {"z", "b", "j_value", "residual"}


def test_falsify_negative_control(run_cli):
    code, rep, _ = run_cli(["falsify", "--restarts", "12", "--iterations", "300", "--seed", "2"],
                           {"domain": {"p": [2, 2]}, "mapping": NEG_CONTROL})
    assert code == 1 and rep["verdict"] == "violation"
    assert rep["witness"]["j_value"] < 0


def test_falsify_witness_reevaluates_from_json(run_cli):
    from dpconvex import DomainSpec, evaluate_J
    from dpconvex.cli import parse_mapping
    cfg = {"domain": {"p": [2, 2]}, "mapping": NEG_CONTROL}
    _, rep, _ = run_cli(["falsify", "--restarts", "12", "--iterations", "300", "--seed", "2"], cfg)
    z = [complex(*c) for c in rep["witness"]["z"]]
    b = [complex(*c) for c in rep["witness"]["b"]]
    again = evaluate_J(DomainSpec.ball(2, 2), parse_mapping(cfg, 2), z, b).j_value
    assert again == pytest.approx(rep["witness"]["j_value"], rel=1e-9)


def test_validate_example(run_cli):
    cfg = {"domain": {"p": [2, 3, 3]}, "mapping": EXAMPLE1}
    code, rep, _ = run_cli(["validate-example", "1"], cfg)
    assert code == 1 and rep["margins"][0]["condition"] == "E1.a"
    assert rep["margins"][0]["margin"] == pytest.approx(0.5 / 13 - 0.05)
    cfg["mapping"] = dict(EXAMPLE1, a=[0.03, 0.03, 0.03])
    code, rep, _ = run_cli(["validate-example", "1"], cfg)
    assert code == 0


@pytest.mark.parametrize("args,config", [
    (["scan", "--samples", "600", "--seed", "3"], {"domain": {"p": [2, 2]}, "mapping": NEG_CONTROL}),
    (["check", "1", "--samples", "300"], {"domain": {"p": [2, 3, 3]}, "mapping": EXAMPLE1}),
    (["falsify", "--restarts", "3", "--iterations", "60"], {"domain": {"p": [2, 2]}, "mapping": NEG_CONTROL}),
    (["campaign", "--samples", "1000"], {"domain": {"p": [2, 2]}, "mapping": NEG_CONTROL}),
])
def test_byte_identical_reports(run_cli, args, config):
    reports = [run_cli(args + ["--threads", t], config)[1] for t in ("1", "1", "4")]
    texts = [json.dumps(strip_timing(r), indent=2) for r in reports]
    assert texts[0] == texts[1] == texts[2]
    assert json.loads(texts[0]) == strip_timing(reports[0])


def test_output_file(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"domain": {"p": [2, 2]}, "point": [0.3, 0.4]}))
    out = tmp_path / "r.json"
    assert main(["rho", "--config", str(cfg), "--output", str(out)]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(out.read_text())["details"]["rho"] == pytest.approx(0.5)


@pytest.mark.parametrize("args,config,message", [
    (["scan"], {"domain": {"p": [1.5, 2]}, "mapping": {"family": "Identity"}}, "p_j >= 2"),
    (["check", "1"], {"domain": {"p": [2, 1.2]}, "mapping": {"family": "Identity"}}, "p_j >= 2"),
    (["scan"], {"domain": {"p": [2, 2]}, "mapping": {"family": "Nope"}}, "unknown family"),
    (["scan"], {"domain": {"p": [2, 2]}}, "mapping"),
    (["rho"], {"point": [0, 0]}, "domain"),
    (["check", "3"], {"domain": {"p": [2, 2]}, "mapping": {"family": "Identity"}}, "coupling"),
    (["check", "4"], {"domain": {"p": [2, 2]}, "mapping": {"family": "Identity"}}, "Theorem4Quadratic"),
    (["validate-example", "1"], {"domain": {"p": [2, 3, 3]},
                                 "mapping": dict(EXAMPLE1, lam=[2, 0])}, "lambda"),
    (["scan"], {"domain": {"p": [2, 2]}, "mapping": {"family": "Theorem4Quadratic",
                                                     "a": ["x", 0], "a_prime": [0, 0]}}, "re, im"),
])
def test_config_errors_exit_2(run_cli, args, config, message):
    code, rep, err = run_cli(args, config)
    assert code == 2 and rep is None and message in err


def test_usage_errors_exit_2(tmp_path, capsys):
    assert main(["scan"]) == 2
    assert main(["bogus", "--config", "x"]) == 2
    assert main(["rho", "--config", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["rho", "--config", str(bad)]) == 2
    capsys.readouterr()


def test_parse_complex():
    assert parse_complex(2) == 2
    assert parse_complex([1, -2]) == 1 - 2j
    for bad in ([1], "1", True, [1, 2, 3]):
        with pytest.raises(ConfigError):
            parse_complex(bad)


def test_module_entry_point(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"domain": {"p": [2, 2]}, "mapping": THEOREM4}))
    proc = subprocess.run([sys.executable, "-m", "dpconvex", "check", "4", "--config", str(cfg)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["verdict"] == "pass"
