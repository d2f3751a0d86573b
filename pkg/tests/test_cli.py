import json
import os
import subprocess
import sys

import pytest

from hypclif import cli

FAST = "algebra-identities,kernel-residuals"


def run(tmp_path, *args, env=None):
    e = dict(os.environ, **(env or {}))
    return subprocess.run(
        [sys.executable, "-m", "hypclif", *args], cwd=tmp_path, env=e, capture_output=True, text=True, timeout=600
    )


def test_run_passes_and_writes_csv_and_json(tmp_path):
    out = tmp_path / "r.csv"
    p = run(tmp_path, "run", "--experiment", "algebra-identities", "--out", str(out), "--quiet")
    assert p.returncode == 0, p.stderr
    lines = out.read_text().splitlines()
    assert lines[0] == "experiment,check,n,order,param,value,tolerance,pass"
    mirror = json.loads(out.with_suffix(".json").read_text())
    assert len(mirror["rows"]) == len(lines) - 1
    assert mirror["meta"]["tolerance_table"]
    assert cli.read_report(out) == cli.read_report(out.with_suffix(".json"))


def test_failed_check_exit_code_and_failures_first(tmp_path):
    out = tmp_path / "r.csv"
    p = run(tmp_path, "run", "--experiment", "algebra-identities", "--tol-scale", "1e-30", "--out", str(out))
    assert p.returncode == 1
    assert "failing checks" in p.stderr
    body = p.stdout.splitlines()[1:]
    status = [line.split()[0] for line in body]
    assert "FAIL" in status and "PASS" in status
    assert status == sorted(status)  # FAIL sorts before PASS


@pytest.mark.parametrize(
    "args",
    [
        ["--dim", "2"],
        ["--dim", "7"],
        ["--orders", "32,16"],
        ["--orders", "a,b"],
        ["--experiment", "nope"],
        ["--tol-scale", "-1"],
        ["--format", "xml"],
        ["--out", "missing/dir/r.csv"],
        ["--seed", "-3"],
    ],
)
def test_invalid_config_exit_2_without_output(tmp_path, args):
    p = run(tmp_path, "run", "--experiment", "algebra-identities", *args)
    assert p.returncode == 2
    assert list(tmp_path.iterdir()) == []


def test_bad_thread_cap(tmp_path):
    p = run(tmp_path, "run", "--experiment", "algebra-identities", env={"HYPCLIF_THREADS": "zero"})
    assert p.returncode == 2 and list(tmp_path.iterdir()) == []


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"dim": 4, "experiment": "algebra-identities", "out": str(tmp_path / "x.json"), "format": "json"}))
    p = run(tmp_path, "run", "--config", str(cfg), "--dim", "5", "--quiet")
    assert p.returncode == 0, p.stderr
    data = json.loads((tmp_path / "x.json").read_text())
    assert data["meta"]["dim"] == 5 and {r["n"] for r in data["rows"]} == {5}
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"dims": 3}))
    assert run(tmp_path, "run", "--config", str(bad)).returncode == 2


def test_report_command(tmp_path):
    out = tmp_path / "r.csv"
    run(tmp_path, "run", "--experiment", "algebra-identities", "--out", str(out), "--quiet")
    p = run(tmp_path, "report", str(out))
    assert p.returncode == 0
    assert len(p.stdout.splitlines()) == len(out.read_text().splitlines())
    empty = tmp_path / "empty.csv"
    empty.write_text(",".join(cli.COLUMNS) + "\n")
    p = run(tmp_path, "report", str(empty))
    assert p.returncode == 0 and len(p.stdout.splitlines()) == 1
    junk = tmp_path / "junk.csv"
    junk.write_text("a,b\n1,2\n")
    assert run(tmp_path, "report", str(junk)).returncode == 2
    assert run(tmp_path, "report", str(tmp_path / "none.csv")).returncode == 2


def test_calibrate_command(tmp_path):
    p = run(tmp_path, "calibrate", "--formula", "cauchy_full,poisson", "--out", str(tmp_path / "k.json"))
    assert p.returncode == 0, p.stderr
    assert "2^(n-2)/omega_n" in p.stdout
    data = json.loads((tmp_path / "k.json").read_text())
    assert [d["formula"] for d in data] == ["cauchy_full", "poisson"]
    assert run(tmp_path, "calibrate", "--formula", "bogus").returncode == 2


def test_usage_errors_exit_2():
    assert cli.main([]) == 2
    assert cli.main(["frobnicate"]) == 2


def test_error_row_is_failing():
    rows = cli._run_one("no-such-experiment", 3, 0, (16,), 1.0)
    assert rows[0]["check"] == "error" and rows[0]["pass"] is False


def test_threads_do_not_change_bytes(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(tmp_path, "run", "--experiment", FAST, "--out", str(a), "--quiet", env={"HYPCLIF_THREADS": "1"}).returncode == 0
    assert run(tmp_path, "run", "--experiment", FAST, "--out", str(b), "--quiet", env={"HYPCLIF_THREADS": "2"}).returncode == 0
    assert a.read_bytes() == b.read_bytes()
