import json

import pytest

from tworo import io
from tworo.cli import main, verify_instances


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _report(out):
    doc = json.loads(out)
    assert doc["format_version"] == 1
    return doc["report"]


def test_solve_t1_bnb(capsys):
    code, out, _ = _run(capsys, "solve", "--problem", "explicit", "--instance", "t1", "--algo", "bnb")
    rep = _report(out)
    assert code == 0 and rep["value"] == pytest.approx(1.5)
    assert rep["adaptivity_gap"] == pytest.approx(50.0) and rep["policy_gap"] == pytest.approx(0.0)
    for key in ("time_s", "nodes", "root_gap", "oracle_calls", "i_lb", "i_ub", "n_solutions"):
        assert key in rep


def test_solve_t1_brute_and_ccg(capsys):
    for algo in ("brute", "ccg"):
        code, out, _ = _run(capsys, "solve", "--instance", "t1", "--algo", algo)
        assert code == 0 and _report(out)["value"] == pytest.approx(1.5)


def test_lb_only_has_no_incumbent(capsys):
    code, out, _ = _run(capsys, "solve", "--instance", "t1", "--algo", "lb-only")
    rep = _report(out)
    assert code == 0 and rep["value"] is None and rep["incumbent_x"] is None
    assert rep["root_bound"] == pytest.approx(1.5) and rep["c_star"] == [1.0]
    assert rep["n_solutions"] == 2


@pytest.mark.parametrize("argv", [
    ["solve", "--instance", "nope"],
    ["solve", "--problem", "sahlp", "--instance", "t1"],
    ["solve", "--problem", "sahlp", "--gamma-frac", "0.5"],
    ["solve", "--problem", "sahlp", "--gamma-frac", "custom"],
    ["solve", "--problem", "sahlp", "--deviation-mult", "3"],
    ["solve", "--problem", "sahlp", "--n", "0"],
    ["solve", "--algo", "magic", "--instance", "t1"],
    ["solve"],
    ["frobnicate"],
])
def test_bad_input_exit_code(capsys, argv):
    code, out, err = _run(capsys, *argv)
    assert code == 4 and out == ""
    doc = json.loads(err)
    assert doc["error"]["code"] == 4 and doc["error"]["message"]


def test_limit_exit_code(capsys):
    code, out, _ = _run(capsys, "solve", "--instance", "t2", "--node-limit", "1")
    assert code == 3 and _report(out)["status"] == "limit_reached"


def test_infeasible_exit_code(capsys, monkeypatch):
    # no shipped family can be infeasible, so the runner is stubbed
    import tworo.cli
    from tworo.report import RunReport
    monkeypatch.setattr(tworo.cli, "run",
                        lambda *a, **k: RunReport("bnb", "t1", "minimize", "infeasible"))
    code, out, _ = _run(capsys, "solve", "--instance", "t1")
    assert code == 2 and _report(out)["status"] == "infeasible"


def test_generate_solve_evaluate(capsys, tmp_path):
    inst_path, rep_path = tmp_path / "i.json", tmp_path / "r.json"
    code, _, _ = _run(capsys, "generate", "--problem", "sahlp", "--n", "4", "--gamma-frac", "0.1",
                      "--seed", "3", "--out", str(inst_path))
    assert code == 0
    code, _, _ = _run(capsys, "solve", "--instance", str(inst_path), "--out", str(rep_path))
    assert code == 0
    rep = io.load_report(rep_path)
    code, out, _ = _run(capsys, "evaluate", "--instance", str(inst_path), "--report", str(rep_path),
                        "--scenarios", "4", "--seed", "2")
    doc = json.loads(out)
    assert code == 0 and len(doc["per_scenario"]) + doc["skipped"] == 4
    assert all(v >= -1e-6 for v in doc["per_scenario"])
    assert rep.value is not None


def test_solve_is_deterministic(capsys):
    argv = ["solve", "--problem", "cb", "--n", "3", "--m", "2", "--seed", "5", "--scenarios", "3"]
    a, b = _report(_run(capsys, *argv)[1]), _report(_run(capsys, *argv)[1])
    a.pop("time_s")
    b.pop("time_s")
    assert a == b


def test_verify(capsys):
    code, out, _ = _run(capsys, "verify", "--count", "3", "--seed", "1")
    doc = json.loads(out)
    assert code == 0 and doc["agree"] and len(doc["instances"]) == 3
    assert [type(i).__name__ for i in verify_instances(3, 0)] == \
        ["ExplicitInstance", "CbInstance", "SahlpInstance"]


def test_help_exits_cleanly(capsys):
    assert main(["--help"]) == 0
