import csv
import io
import json
import subprocess
import sys

import pytest

from yamabe_lab import cli

FAST = [
    ["friedman-volume", "--r0", "1"],
    ["schwarzschild", "--m", "1", "--e", "0.6", "--k", "2"],
    ["yamabe-series", "--order", "20"],
    ["yamabe-shoot"],
    ["duffing", "--steps", "2"],
    ["norms"],
    ["decompose", "--form", "2,1,0;1,3,0;0,0,-1"],
]


def run_quiet(argv, capsys):
    result, code = cli.run(argv)
    out = capsys.readouterr().out
    return result, code, out


@pytest.mark.parametrize("argv", FAST, ids=lambda a: a[0])
def test_exit_code_tracks_checks(argv, capsys):
    result, code, out = run_quiet(argv, capsys)
    assert result is not None
    assert code == (0 if result.passed else 1)
    assert cli.main(argv) == code
    capsys.readouterr()
    for c in result.checks:
        assert c.provenance in cli.PROVENANCE
    d = json.loads(out)
    assert d["experiment"] == argv[0] and d["passed"] == result.passed


@pytest.mark.parametrize("argv", FAST, ids=lambda a: a[0])
def test_byte_identical(argv, capsys):
    _, _, first = run_quiet(argv, capsys)
    _, _, second = run_quiet(argv, capsys)
    assert first == second


@pytest.mark.parametrize("argv", FAST[:4], ids=lambda a: a[0])
def test_json_round_trip(argv, capsys):
    result, _, out = run_quiet(argv, capsys)
    d = json.loads(out)
    back = cli.ExperimentResult.from_dict(d)
    assert back.to_json() + "\n" == out
    assert back.passed == result.passed


def test_csv_output(capsys):
    _, code, out = run_quiet(["yamabe-series", "--order", "2", "--format", "csv"], capsys)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["section", "name", "expected", "provenance", "got", "tolerance", "pass"]
    res = {r[1]: r[4] for r in rows if r[0] == "result"}
    assert json.loads(res["coefficients"]) == ["1", "-3/26", "-321/17576"]
    checks = [r for r in rows if r[0] == "check"]
    assert checks and all(r[3] in cli.PROVENANCE for r in checks)


def test_series_order_two(capsys):
    _, _, out = run_quiet(["yamabe-series", "--order", "2"], capsys)
    d = json.loads(out)["results"]
    assert d["coefficients"][:2] == ["1", "-3/26"]
    assert d["w2_computed"] == d["coefficients"][2]
    assert d["w2_printed"] == "-165/676"
    assert d["w2_mismatch"] is True


def test_friedman_reports_printed_volume(capsys):
    result, code, _ = run_quiet(["friedman-volume", "--r0", "1"], capsys)
    names = {c.name: c for c in result.checks}
    assert names["volume_vs_printed_closed_form"].expected == pytest.approx(38.757846, rel=1e-7)
    assert names["volume_vs_beta_closed_form"].passed


def test_out_file(tmp_path, capsys):
    path = tmp_path / "o.json"
    _, code, out = run_quiet(["norms", "--out", str(path)], capsys)
    assert out == ""
    assert json.loads(path.read_text())["experiment"] == "norms"


@pytest.mark.parametrize("argv", [["bogus"], [], ["yamabe-series", "--order", "x"],
                                  ["schwarzschild", "--m", "1", "--e", "2"],
                                  ["decompose", "--form", "1,2"],
                                  ["decompose", "--form", "2,1;1,3"]])
def test_usage_errors(argv, capsys):
    _, code = cli.run(argv)
    capsys.readouterr()
    assert code == 2


def test_console_entry():
    p = subprocess.run([sys.executable, "-m", "yamabe_lab.cli", "bogus"],
                       capture_output=True, text=True)
    assert p.returncode == 2
    assert "invalid choice" in p.stderr
