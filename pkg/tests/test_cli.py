import csv
import io
import json
import subprocess
import sys

import pytest

from qsvt_hs import cli, hs

SUBCOMMANDS = ("queries", "fit-queries", "landau", "euler", "compare", "verify")


def run(*args, cwd=None):
    return subprocess.run([sys.executable, "-m", "qsvt_hs", *args], capture_output=True, text=True, cwd=cwd)


def test_help_lists_subcommands():
    out = run("--help")
    assert out.returncode == 0
    for name in SUBCOMMANDS:
        assert name in out.stdout


def test_queries_single_row(capsys):
    assert cli.main(["queries", "--method", "oaa", "--t", "5", "--eps", "1e-3"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert len(rows) == 1
    assert list(rows[0]) == list(cli.QUERY_COLUMNS)
    assert int(rows[0]["Q"]) == hs.query_count("OAA", 5.0, 1e-3).Q
    assert rows[0]["eps_tri"] == "1.1111111111111112e-04"


def test_queries_round_trip_and_determinism(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["queries", "--t-range", "0.5", "4", "3", "--eps-range", "1e-6", "0.1", "3"]
    assert cli.main(args + ["--out", str(a)]) == 0
    assert cli.main(args + ["--out", str(b), "--workers", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()
    for r in csv.DictReader(a.open()):
        qc = hs.query_count(r["method"], float(r["t"]), float(r["eps"]))
        assert int(r["Q"]) == qc.Q
        for key in ("eps_tri", "eps_sign"):
            if r[key]:
                assert float(r[key]) == qc.breakdown[key]
                if abs(float(r[key])) < 1e-3:
                    assert "e" in r[key]


def test_fmt_num():
    assert cli.fmt_num(5e-4) == "5.0000000000000001e-04"
    assert float(cli.fmt_num(0.1 + 0.2)) == 0.1 + 0.2
    assert cli.fmt_num(7) == "7"
    assert cli.fmt_num(None) == ""


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"method": "fpaa", "t": 2.0, "eps": 0.01}))
    assert cli.main(["queries", "--config", str(cfg)]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert [r["method"] for r in rows] == ["FPAA"] and float(rows[0]["t"]) == 2.0
    assert cli.main(["queries", "--config", str(cfg), "--method", "oaa"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert [r["method"] for r in rows] == ["OAA"] and float(rows[0]["eps"]) == 0.01


@pytest.mark.parametrize("args", [
    ["queries", "--t", "-1"],
    ["queries", "--eps-range", "1e-3", "1e-5", "3"],
    ["queries", "--out", "/nonexistent/dir/x.csv"],
    ["landau", "--nv", "12"],
    ["verify", "--only", "nosuch"],
    ["queries", "--bogus"],
])
def test_config_errors_exit_1(args):
    assert run(*args).returncode == 1


def test_bad_config_file(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text("{not json")
    assert cli.main(["queries", "--config", str(cfg)]) == 1
    cfg.write_text(json.dumps({"wavenumber": 1}))
    assert cli.main(["queries", "--config", str(cfg)]) == 1


def test_verify_subset(capsys):
    assert cli.main(["verify", "--only", "parity", "negation"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 2 and all(line.startswith("PASS") for line in lines)


def test_verify_failure_exit_2(monkeypatch, capsys):
    monkeypatch.setitem(cli.vf.SUITES, "parity", lambda rng: ("parity", False, "forced"))
    assert cli.main(["verify", "--only", "parity"]) == 2
    assert capsys.readouterr().out.startswith("FAIL")


def test_fit_queries_json(tmp_path):
    out = tmp_path / "fit.json"
    assert cli.main(["fit-queries", "--t-range", "0.1", "10", "12", "--eps-range", "1e-5", "0.9", "8",
                     "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert set(data["fits"]) == {"OAA", "FPAA", "R", "D"}
    assert len(data["fits"]["FPAA"]["coeffs"]) == 5


def test_euler_schema(tmp_path):
    c, j = tmp_path / "e.csv", tmp_path / "e.json"
    assert cli.main(["euler", "--dt", "0.01", "--T", "30", "--csv", str(c), "--json", str(j)]) == 0
    rows = list(csv.DictReader(c.open()))
    assert list(rows[0]) == list(cli.SERIES_COLUMNS)
    assert float(rows[0]["im_E"]) == pytest.approx(0.25, abs=1e-5)
    assert json.loads(j.read_text())["source"] == "Euler"


def test_landau_example(tmp_path):
    c, j = tmp_path / "l.csv", tmp_path / "l.json"
    assert cli.main(["landau", "--k", "0.4", "--nv", "32", "--vmax", "4.5", "--eps", "1e-3",
                     "--steps", "105", "--csv", str(c), "--json", str(j)]) == 0
    fit = json.loads(j.read_text())["fit"]
    assert fit["omega"] == pytest.approx(1.285, abs=5e-3)
    assert fit["gamma"] == pytest.approx(0.066, abs=2e-3)
    assert len(list(csv.DictReader(c.open()))) == 106


def test_compare_small(tmp_path):
    j = tmp_path / "c.json"
    assert cli.main(["compare", "--nv", "8", "--steps", "30", "--at-steps", "10", "30", "--dt-ref", "1e-3",
                     "--json", str(j)]) == 0
    data = json.loads(j.read_text())
    assert [d["step"] for d in data["deltas"]] == [10, 30]
    assert all(d["delta"] >= 0 for d in data["deltas"])
