"""CLI behavior: exit codes, report schema, certificate round trips."""

import json
import pathlib

import jsonschema
import pytest

from conftest import FIXTURES, load
from fairbox.cli import main

SCHEMA = json.loads(
    (pathlib.Path(__file__).parent.parent / "src" / "fairbox"
     / "report_schema_v1.json").read_text())


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def fixture(name: str) -> str:
    return str(FIXTURES / name)


def test_unfair_exit_code_and_report(capsys):
    code, out, err = run(capsys, "verify", fixture("casestudy.fg"))
    assert code == 1
    report = json.loads(out)
    jsonschema.validate(report, SCHEMA)
    assert report["verdict"] == "unfair"
    assert report["ratio"]["upper"] < 0.9
    assert report["epsilon"] == 0.1


def test_fair_exit_code(capsys):
    code, out, _ = run(capsys, "verify", fixture("const_true.fg"))
    assert code == 0
    report = json.loads(out)
    jsonschema.validate(report, SCHEMA)
    assert report["verdict"] == "fair"


def test_unknown_exit_code(capsys):
    code, out, _ = run(capsys, "verify", fixture("casestudy.fg"),
                       "--budget", "4")
    assert code == 2
    report = json.loads(out)
    jsonschema.validate(report, SCHEMA)
    assert report["verdict"] == "unknown"
    assert report["budget"]["decided"] is False


def test_parse_error_exit_code(capsys):
    code, out, err = run(capsys, "verify", fixture("nonlinear.fg"))
    assert code == 3
    assert "nonlinear term" in err
    assert out == ""


def test_missing_file_exit_code(capsys):
    code, _, err = run(capsys, "verify", "/nonexistent/nope.fg")
    assert code == 3
    assert "cannot read" in err


def test_epsilon_override_flips_verdict(capsys):
    # true ratio ~0.484; with epsilon 0.9 the threshold drops to 0.1 < ratio
    code, out, _ = run(capsys, "verify", fixture("casestudy.fg"),
                       "--epsilon", "0.9")
    assert code == 0
    assert json.loads(out)["verdict"] == "fair"


def test_epsilon_out_of_range_is_usage_error(capsys):
    code, _, err = run(capsys, "verify", fixture("casestudy.fg"),
                       "--epsilon", "1.5")
    assert code == 3
    assert "epsilon" in err


def test_schema_stability_across_runs(capsys):
    reports = []
    for name in ("casestudy.fg", "const_true.fg"):
        _, out, _ = run(capsys, "verify", fixture(name))
        reports.append(json.loads(out))
    assert set(reports[0]) == set(reports[1])


def test_human_output(capsys):
    code, out, _ = run(capsys, "verify", fixture("casestudy.fg"), "--human")
    assert code == 1
    assert "verdict" in out and "unfair" in out
    with pytest.raises(json.JSONDecodeError):
        json.loads(out)


def test_dump_paths_to_stderr(capsys):
    code, out, err = run(capsys, "verify", fixture("casestudy.fg"),
                         "--dump-paths")
    assert code == 1
    assert err.count("⇒ return") == 6
    json.loads(out)  # report still clean JSON


def test_mc_check_section(capsys):
    code, out, _ = run(capsys, "verify", fixture("casestudy.fg"),
                       "--mc-check", "200000", "--seed", "7")
    assert code == 1
    report = json.loads(out)
    jsonschema.validate(report, SCHEMA)
    mc = report["mc"]
    assert mc["samples"] == 200000 and mc["seed"] == 7
    assert mc["consistent"] is True
    assert mc["generator"] == "pcg64-ndtri"


def test_certificate_emit_and_check(capsys, tmp_path):
    cert = tmp_path / "case.cert.json"
    code, _, _ = run(capsys, "verify", fixture("casestudy.fg"),
                     "--emit-certificate", str(cert))
    assert code == 1
    assert cert.exists()

    code, out, _ = run(capsys, "check-certificate", str(cert),
                       fixture("casestudy.fg"))
    assert code == 0
    assert "accepted" in out


def test_certificate_against_edited_source(capsys, tmp_path):
    cert = tmp_path / "case.cert.json"
    run(capsys, "verify", fixture("casestudy.fg"),
        "--emit-certificate", str(cert))
    edited = tmp_path / "edited.fg"
    edited.write_text(load("casestudy.fg").replace("epsilon: 0.1",
                                                   "epsilon: 0.2"))
    code, _, err = run(capsys, "check-certificate", str(cert), str(edited))
    assert code == 1
    assert "digest mismatch" in err


def test_truncated_certificate_file(capsys, tmp_path):
    cert = tmp_path / "case.cert.json"
    run(capsys, "verify", fixture("casestudy.fg"),
        "--emit-certificate", str(cert))
    cert.write_text(cert.read_text()[: len(cert.read_text()) // 2])
    code, _, err = run(capsys, "check-certificate", str(cert),
                       fixture("casestudy.fg"))
    assert code == 3
    assert "malformed certificate" in err


def test_no_certificate_for_unknown(capsys, tmp_path):
    cert = tmp_path / "nope.cert.json"
    code, _, err = run(capsys, "verify", fixture("casestudy.fg"),
                       "--budget", "4", "--emit-certificate", str(cert))
    assert code == 2
    assert not cert.exists()
    assert "no certificate" in err


def test_engine_flag(capsys):
    for engine in ("python", "auto"):
        code, out, _ = run(capsys, "verify", fixture("const_true.fg"),
                           "--engine", engine)
        assert code == 0


def test_workers_flag(capsys):
    code, out, _ = run(capsys, "verify", fixture("const_true.fg"),
                       "--workers", "2", "--mc-check", "10000")
    assert code == 0
    assert json.loads(out)["config"]["workers"] == 2


def test_exit_code_contract_on_fixture_suite(capsys):
    expected = {
        "casestudy.fg": 1,    # unfair
        "const_true.fg": 0,   # fair
        "const_false.fg": 2,  # nobody qualifies: 0/0 ratio stays unknown
        "halfspace.fg": 1,    # qualified and sensitive are disjoint events
        "symmetric.fg": 0,
        "bernoulli.fg": 1,
        "disjunctive.fg": 0,  # the unprotected group never qualifies
        "coinflips.fg": 0,
        "nonlinear.fg": 3,
    }
    for name, want in expected.items():
        code, _, _ = run(capsys, "verify", fixture(name))
        assert code in (0, 1, 2, 3), name
        if want is not None:
            assert code == want, name


def test_equality_warning_passes_through(capsys, tmp_path):
    src = tmp_path / "eq.fg"
    src.write_text(load("halfspace.fg").replace("x > 1", "x == 1"))
    code, out, err = run(capsys, "verify", str(src))
    assert "probability-zero" in err
    # the == event has no mass: sensitive probability pins to zero
    report = json.loads(out)
    assert report["probabilities"]["sensitive"]["upper"] <= 1e-9
