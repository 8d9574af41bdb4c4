import json
import subprocess
import sys

import pytest

from tautring.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_enumerate_graphs(capsys):
    code, out, _ = run(capsys, "enumerate", "--g", "0", "--n", "5", "--max-edges", "2")
    assert code == 0
    data = json.loads(out)
    assert data["count"] == 26 and len(data["graphs"]) == 26


def test_enumerate_generators(capsys):
    code, out, _ = run(capsys, "enumerate", "--g", "1", "--n", "1", "--codim", "1")
    assert code == 0 and json.loads(out)["count"] == 3


def test_gorenstein(capsys):
    code, out, _ = run(capsys, "gorenstein", "--g", "0", "--n", "5")
    data = json.loads(out)
    assert code == 0 and data["degree_ranks"] == [1, 5, 1] and data["defects"] == []
    code, out, _ = run(capsys, "gorenstein", "--g", "1", "--n", "2", "--format", "table")
    assert code == 0 and "pairing ranks [1, 2, 1]" in out


def test_invalid_input_exit_code(capsys):
    code, _, err = run(capsys, "enumerate", "--g", "0", "--n", "2")
    assert code == 1 and "error" in err
    assert run(capsys, "gorenstein", "--g", "1")[0] == 1
    assert run(capsys, "pullback", "--loops", "-1")[0] == 1
    assert run(capsys, "enumerate", "--g", "0", "--n", "4", "--budget", "0")[0] == 1


def test_budget_exit_code(capsys):
    code, _, err = run(capsys, "gorenstein", "--g", "3", "--n", "0", "--budget", "5")
    assert code == 2 and "known status" in err
    assert run(capsys, "pullback", "--loops", "10")[0] == 2


def test_verify_lemmas(capsys):
    code, out, _ = run(capsys, "verify-lemmas")
    assert code == 0 and json.loads(out)["all_passed"]
    code, out, _ = run(capsys, "verify-lemmas", "--g", "1", "--n", "1", "--format", "table")
    assert code == 0 and out.startswith("PASS")
    assert run(capsys, "verify-lemmas", "--excess-sign", "1")[0] == 3


def test_pullback_output_is_byte_identical(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(capsys, "pullback", "--loops", "1", "--seed", "7", "--out", str(a))[0] == 0
    assert run(capsys, "pullback", "--loops", "1", "--seed", "7", "--threads", "2", "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    data = json.loads(a.read_text())
    assert data["coefficient"] == "3/1" and data["summary"]["bielliptic-multiple"] > 0


def test_config_file_fills_missing_flags(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"g": 0, "n": 5, "max-edges": 1}))
    code, out, _ = run(capsys, "enumerate", "--config", str(cfg))
    assert code == 0 and json.loads(out)["count"] == 11
    code, out, _ = run(capsys, "enumerate", "--config", str(cfg), "--n", "4")
    assert code == 0 and json.loads(out)["count"] == 4
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2]")
    assert run(capsys, "enumerate", "--config", str(bad))[0] == 1


def test_budget_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("TAUTRING_BUDGET", "3")
    assert run(capsys, "enumerate", "--g", "2", "--n", "2")[0] == 2
    assert run(capsys, "enumerate", "--g", "2", "--n", "2", "--budget", "100000")[0] == 0
    monkeypatch.setenv("TAUTRING_BUDGET", "many")
    assert run(capsys, "enumerate", "--g", "0", "--n", "4")[0] == 1


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "tautring", "enumerate", "--g", "1", "--n", "1", "--format", "table"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0 and proc.stdout.startswith("2 stable graphs")
    proc = subprocess.run([sys.executable, "-m", "tautring", "pullback", "--loops", "12"], capture_output=True, text=True)
    assert proc.returncode == 2
