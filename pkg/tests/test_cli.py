import json
import subprocess
import sys

import pytest

from valsg import cli


def _run(*argv):
    return cli.run(list(argv))


def test_report_envelope():
    report, code = _run("skp", "betas", "--count", "3")
    assert code == 0
    assert set(report) >= {"schema", "command", "config", "anchor", "ok", "result"}
    assert report["result"] == ["1", "5/2", "21/4"]
    assert report["command"] == "skp betas"


def test_usage_errors_exit_1():
    assert _run("nonsense")[1] == 1
    assert _run("skp", "value")[1] == 1
    report, code = _run("skp", "value", "--poly", "x +* y")
    assert code == 1 and "error" in report


def test_property_violation_exits_2():
    # a computed "no" is a result, not a violation
    report, code = _run("semigroup", "plane-check", "--gens", "4,6,9")
    assert code == 0 and report["result"]["verdict"] is False
    report, code = _run("z2", "build", "--depth", "5")
    assert code == 2 and report["ok"] is False


def test_seed_from_environment(monkeypatch):
    monkeypatch.setenv("VALSG_SEED", "17")
    report, _ = _run("fatpoints", "dim", "--d", "3", "--n", "1", "--r", "4")
    assert report["config"]["seed"] == 17
    monkeypatch.setenv("VALSG_SEED", "abc")
    assert _run("fatpoints", "dim", "--d", "3", "--n", "1", "--r", "4")[1] == 1


def test_precision_from_environment(monkeypatch):
    monkeypatch.setenv("VALSG_PRECISION", "30")
    report, code = _run("transcend", "build", "--depth", "2")
    assert code == 0 and report["config"]["precision"] == "30"


def test_output_is_byte_identical(tmp_path, capsys):
    out = []
    for k in range(2):
        path = tmp_path / f"r{k}.json"
        assert cli.main(["--json-out", str(path), "transcend", "build", "--depth", "3"]) == 0
        out.append(path.read_bytes())
    assert out[0] == out[1]
    err = capsys.readouterr().err
    assert "transcend build" in err


def test_bundled_corpus_passes():
    report, code = _run("corpus", "run")
    assert code == 0, [c for c in report["result"]["cases"] if not c["passed"]]
    assert report["result"]["failed"] == 0


def test_corpus_detects_mismatch(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps([{"name": "bad", "argv": ["skp", "betas", "--count", "2"], "expect": ["1", "3"]}]))
    report, code = _run("corpus", "run", "--path", str(path))
    assert code == 2
    assert report["result"]["cases"][0]["diffs"][0]["path"] == "result"


@pytest.mark.parametrize("argv", [
    ["semigroup", "enumerate", "--gens", "4,6,13", "--bound", "20"],
    ["semigroup", "min-gens", "--rule", "dyadic-beta", "--bound", "6"],
    ["semigroup", "s-value", "--prefix", "4,6", "--gamma", "13"],
    ["semigroup", "probe", "--n", "1", "--bound", "6"],
    ["semigroup", "spq", "--depth", "8"],
    ["semigroup", "omega", "--m", "2", "--grid", "4"],
    ["skp", "keys", "--count", "4"],
    ["skp", "expand", "--poly", "y^2 - x^5 + x*y"],
    ["skp", "divisibility", "--max-index", "4"],
    ["skp", "module", "--n", "1", "--bound", "4", "--bruteforce"],
    ["skp", "witness", "--n", "1", "--max-index", "5"],
    ["z2", "build", "--a-rule", "3^i", "--depth", "6"],
    ["composite", "value", "--poly", "x*v - y*u"],
    ["composite", "slice", "--level", "1", "--samples", "10"],
    ["composite", "phi-check", "--k", "2"],
    ["transcend", "spotcheck", "--depth", "3", "--n", "2", "--trials", "5"],
    ["transcend", "spectrum", "--n", "1", "--depth", "1"],
    ["fatpoints", "scan", "--dmax", "8", "--nmax", "1"],
])
def test_every_command_succeeds(argv):
    report, code = _run(*argv)
    assert code == 0, report
    json.dumps(report, sort_keys=True)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "valsg.cli", "skp", "value", "--poly", "y"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["value"] == "5/2"
    assert "skp value" in proc.stderr
