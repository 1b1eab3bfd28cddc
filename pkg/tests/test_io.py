import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tworo import io
from tworo.problems import generate_cb, generate_sahlp, random_explicit, toy_t1
from tworo.report import RunReport
from tworo.runner import add_metrics, prepare, run


def _same_instance(a, b):
    return io.instance_to_dict(a) == io.instance_to_dict(b)


@pytest.mark.parametrize("inst", [toy_t1(), generate_sahlp(4, seed=1), generate_cb(3, 2, seed=1),
                                  random_explicit(np.random.default_rng(0), 2, 2, 3)],
                         ids=lambda i: i.name)
def test_instance_round_trip(inst, tmp_path):
    path = tmp_path / "inst.json"
    io.save_instance(inst, path)
    back = io.load_instance(path)
    assert _same_instance(inst, back)
    a, b = prepare(inst), prepare(back)
    assert run(a).value == run(b).value


def test_report_round_trip(tmp_path):
    prep = prepare(toy_t1())
    rep = add_metrics(prep, run(prep), scenarios=5, seed=1)
    path = tmp_path / "rep.json"
    io.save_report(rep, path)
    assert io.load_report(path) == rep


@given(st.integers(0, 2**31))
def test_report_round_trip_random(seed):
    prep = prepare(random_explicit(np.random.default_rng(seed), 2, 2, 2))
    for algo in ("bnb", "ccg", "lb-only", "brute"):
        rep = run(prep, algo)
        text = io.dumps(io.report_to_dict(rep))
        assert io.report_from_dict(json.loads(text)) == rep


def test_version_and_field_checks():
    with pytest.raises(io.FormatError):
        io.instance_from_dict({"format_version": 2, "kind": "sahlp"})
    with pytest.raises(io.FormatError):
        io.instance_from_dict({"format_version": 1, "kind": "hub"})
    with pytest.raises(io.FormatError):
        io.instance_from_dict({"format_version": 1, "kind": "cb", "cost": [1.0]})
    with pytest.raises(io.FormatError):
        io.report_from_dict({"format_version": 1})
    with pytest.raises(ValueError):
        RunReport.from_dict({"algorithm": "bnb", "problem": "p", "sense": "minimize",
                             "status": "optimal", "colour": 1})


def test_malformed_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(io.FormatError):
        io.load_instance(path)


def test_dumps_is_canonical():
    doc = {"b": 1, "a": [1.5, 2]}
    assert io.dumps(doc) == io.dumps(dict(reversed(list(doc.items()))))
    with pytest.raises(ValueError):
        io.dumps({"x": float("nan")})
