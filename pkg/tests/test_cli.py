"""Command dispatch, report rendering, exit codes, determinism."""

import json
from pathlib import Path

import pytest

from bundleforms.cli import main

SPECS = Path(__file__).resolve().parent.parent / "demos" / "specs"


def run_cli(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, out


def test_validate_moebius_passes(capsys):
    code, out = run_cli(capsys, "validate", SPECS / "moebius.json",
                        "--samples", "200")
    assert code == 0
    assert "validate-bundle moebius" in out and "pass" in out


def test_operate_runs_declared_tasks(capsys):
    code, out = run_cli(capsys, "operate", SPECS / "moebius.json",
                        "--samples", "200")
    assert code == 0
    assert "line-class moebius" in out
    assert "det_class=1" in out
    assert "det_class=0" in out
    assert "is_zero=true" in out


def test_machine_format_is_deterministic(capsys):
    code1, out1 = run_cli(capsys, "operate", SPECS / "moebius.json",
                          "--samples", "150", "--format", "machine",
                          "--seed", "3")
    code2, out2 = run_cli(capsys, "operate", SPECS / "moebius.json",
                          "--samples", "150", "--format", "machine",
                          "--seed", "3")
    assert code1 == code2 == 0
    assert out1 == out2
    doc = json.loads(out1)
    assert doc["exit_code"] == 0
    assert all(t["status"] == "pass" for t in doc["tasks"])


def test_failing_bundle_exit_code(tmp_path, capsys):
    raw = json.loads((SPECS / "moebius.json").read_text())
    # flip one transition sign: the cocycle check must fail
    raw["bundles"]["moebius"]["transitions"]["U2,U1"] = [["1"]]
    raw["tasks"] = [{"op": "validate-bundle", "bundle": "moebius"}]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(raw))
    code, out = run_cli(capsys, "operate", bad, "--samples", "200")
    assert code == 1
    assert "fail" in out


def test_unknown_verdict_exit_code(tmp_path, capsys):
    raw = {
        "version": 1,
        "base": {"catalog": "point"},
        "charts": {"all": []},
        "bundles": {"e6": {"rank": 6, "charts": ["all"], "transitions": {}}},
        "forms": {"big": {"bundle": "e6",
                          "upper": {"all": ["1", "0", "0", "0", "0", "0",
                                            "1", "0", "0", "0", "0",
                                            "1", "0", "0", "0",
                                            "-1", "0", "0",
                                            "-1", "0",
                                            "-1"]}}},
        "tasks": [{"op": "witt-zero", "form": "big"}],
    }
    spec = tmp_path / "unknown.json"
    spec.write_text(json.dumps(raw))
    code, out = run_cli(capsys, "operate", spec, "--samples", "64")
    assert code == 3
    assert "unknown" in out


def test_parse_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "broken.json"
    bad.write_text("{not json")
    code = main(["validate", str(bad)])
    assert code == 2


def test_error_status_entry(tmp_path, capsys):
    # a near-singular form makes signature raise; reported as error, exit 2
    raw = {
        "version": 1,
        "base": {"catalog": "line"},
        "charts": {"all": []},
        "bundles": {"e1": {"rank": 1, "charts": ["all"], "transitions": {}}},
        "forms": {"degenerate": {"bundle": "e1", "upper": {"all": ["0"]}}},
        "tasks": [{"op": "signature", "form": "degenerate"}],
    }
    spec = tmp_path / "degenerate.json"
    spec.write_text(json.dumps(raw))
    code, out = run_cli(capsys, "operate", spec, "--samples", "100")
    assert code == 2
    assert "error" in out


def test_signature_subcommand(capsys):
    code, out = run_cli(capsys, "signature", SPECS / "moebius.json",
                        "--form", "hyperbolic1", "--samples", "150")
    assert code == 0
    assert "positive=1" in out and "negative=1" in out


def test_invariants_subcommand(capsys):
    code, out = run_cli(capsys, "invariants", SPECS / "moebius.json",
                        "--samples", "150")
    assert code == 0
    assert "det_class=1" in out


def test_homotopy_subcommand_cylinder(capsys):
    code, out = run_cli(capsys, "homotopy", SPECS / "moebius_cylinder.json",
                        "--bundle", "moebius_cyl", "--samples", "150")
    assert code == 0
    assert "homotopy-iso" in out


def test_rings_subcommand(capsys):
    code, out = run_cli(capsys, "rings", SPECS / "moebius.json",
                        "--samples", "150")
    assert code == 0
    assert "roundtrip-k0 moebius" in out


def test_decompose_subcommand(capsys):
    code, out = run_cli(capsys, "decompose", SPECS / "moebius.json",
                        "--form", "hyperbolic1", "--samples", "150")
    assert code == 0
    assert "positive=1" in out and "negative=1" in out


def test_report_subcommand_runs_validations_and_tasks(capsys):
    code, out = run_cli(capsys, "report", SPECS / "moebius.json",
                        "--samples", "150")
    assert code == 0
    # implicit validations plus the declared tasks
    assert "validate-bundle eps2" in out
    assert "witt-zero hyperbolic1" in out
