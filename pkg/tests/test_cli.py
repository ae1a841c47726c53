import json
import subprocess
import sys

import pytest

from bispectral.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main, run
from bispectral.exprio import load_report


def report(argv):
    code, text, _ = run(argv)
    return code, (load_report(text) if code != EXIT_USAGE else text)


def test_check_theorem_example1():
    code, doc = report(["check-theorem", "--example", "ex1", "--degree", "4"])
    assert code == EXIT_OK
    assert doc["dimensions"]["solver"][-1] == 14 == doc["dimensions"]["gamma"][-1]


def test_verify_triple_example3():
    code, doc = report(["verify-triple", "examples/example3.json"])
    assert code == EXIT_OK and doc["ok"]


def test_verify_triple_kdv_file():
    assert report(["verify-triple", "kdv_l2.json"])[0] == EXIT_OK


def test_negative_degree(capsys):
    assert main(["solve-algebra", "--example", "ex1", "--degree", "-1"]) == EXIT_USAGE
    assert "degree must be nonnegative" in capsys.readouterr().err


def test_missing_file(capsys):
    assert main(["verify-triple", "nowhere/none.json"]) == EXIT_USAGE
    assert "nowhere/none.json" in capsys.readouterr().err


def test_unknown_example():
    code, text = report(["check-theorem", "--example", "ex7"])
    assert code == EXIT_USAGE and "unknown example" in text


def test_malformed_command_line():
    with pytest.raises(SystemExit) as e:
        main(["solve-algebra"])
    assert e.value.code == 2


def test_solve_algebra_modes():
    code, doc = report(["solve-algebra", "--example", "ex1", "--degree", "3"])
    assert code == EXIT_OK and doc["dimensions"]["3"] == 10
    code, doc = report(["solve-algebra", "--example", "ex3", "--degree", "2", "--mode", "subspace"])
    assert doc["inputs"]["kind"] == "subspace" and doc["dimensions"]["2"] == 5
    assert "degree-bounded" in doc["details"]["scope"]


def test_check_theorem_example2_fallback_and_strict():
    code, doc = report(["check-theorem", "--example", "ex2"])
    assert code == EXIT_OK and "ex2-free32" in doc["verdict"]
    assert report(["check-theorem", "--example", "ex2", "--strict"])[0] == EXIT_FAIL


def test_check_presentation(tmp_path):
    prob = {"n": 2, "factors": [], "psi": [["1", "0"], ["0", "1"]],
            "assignment": {"a0": [["0", "1"], ["0", "0"]], "a1": [["x", "0"], ["x^2", "x"]]}}
    path = tmp_path / "a.json"
    path.write_text(json.dumps(prob))
    code, doc = report(["check-presentation", "--example", "ex1", "--assignment", str(path)])
    assert code == EXIT_OK and doc["details"]["surjectivity"]["degree"] == 6
    prob["assignment"]["a0"] = [["1", "0"], ["0", "1"]]
    path.write_text(json.dumps(prob))
    code, doc = report(["check-presentation", "--example", "ex1", "--assignment", str(path)])
    assert code == EXIT_FAIL and "a0^2" in doc["residuals"]


def test_synth_kdv():
    assert report(["synth-kdv"])[0] == EXIT_OK
    assert report(["synth-kdv", "--strict"])[0] == EXIT_FAIL
    code, doc = report(["synth-kdv", "--potential", "2/x^2", "--factors", "x"])
    assert code == EXIT_OK and doc["details"]["K"] == 1
    code, doc = report(["synth-kdv", "--potential", "1/x", "--factors", "x"])
    assert code == EXIT_FAIL and doc["verdict"] == "non-rational antiderivative"


def test_prolate(tmp_path):
    out = tmp_path / "r.json"
    csv = tmp_path / "v.csv"
    assert main(["--out", str(out), "prolate", "--csv", str(csv)]) == EXIT_OK
    doc = load_report(out.read_text())
    assert doc["dimensions"]["shannon_count"] == 5 and csv.exists()
    code, _ = report(["prolate", "--modes", "40", "--quad", "20"])
    assert code == EXIT_USAGE


def test_reports_are_deterministic():
    a = report(["solve-algebra", "--example", "ex1", "--degree", "2"])[1]
    b = report(["solve-algebra", "--example", "ex1", "--degree", "2"])[1]
    for d in (a, b):
        d.pop("seconds")
        for s in d["details"]["convergence"].get("lookahead", []):
            s.pop("seconds", None)
        for s in d["details"]["convergence"]["steps"]:
            s.pop("seconds", None)
    assert a == b


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "bispectral.cli", "verify-triple", "example1.json"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["ok"]
