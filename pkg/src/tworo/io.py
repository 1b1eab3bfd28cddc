"""JSON documents for instances and run reports.

Every document carries ``format_version``; readers reject versions they do
not know.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .model import Sense, UncertaintySet
from .problems.capital_budgeting import CbInstance
from .problems.explicit import ExplicitInstance
from .problems.sahlp import SahlpInstance
from .report import RunReport
from .runner import Instance, problem_kind

FORMAT_VERSION = 1


class FormatError(ValueError):
    """A document is malformed or has an unsupported version."""


def _list(a):
    return np.asarray(a, dtype=float).tolist()


def uncertainty_to_dict(U: UncertaintySet) -> dict:
    return {"kind": U.kind, "gamma": U.gamma, "c_bar": _list(U.c_bar), "P": _list(U.P),
            "delta_lower": _list(U.delta_lower), "delta_upper": _list(U.delta_upper),
            "A": _list(U.A), "b": _list(U.b)}


def uncertainty_from_dict(d: dict) -> UncertaintySet:
    p = len(d["delta_lower"])
    A = np.asarray(d.get("A", []), dtype=float).reshape(-1, p)
    return UncertaintySet(d["c_bar"], np.asarray(d["P"], dtype=float), d["delta_lower"],
                          d["delta_upper"], A, d.get("b", []), kind=d.get("kind", "polyhedral"),
                          gamma=d.get("gamma"))


def instance_to_dict(inst: Instance) -> dict:
    kind = problem_kind(inst)
    doc = {"format_version": FORMAT_VERSION, "kind": kind}
    if kind == "explicit":
        doc.update(name=inst.name, n1=inst.n1, n2=inst.n2, m=inst.m, sense=inst.sense.value,
                   solutions=[{"x": list(x), "y": list(y), "g": g, "h": list(h)}
                              for x, y, g, h in inst.solutions],
                   uncertainty=uncertainty_to_dict(inst.uncertainty))
    elif kind == "sahlp":
        doc.update(name=inst.name, d=_list(inst.d), w_bar=_list(inst.w_bar), w_hat=_list(inst.w_hat),
                   setup=_list(inst.setup), chi=inst.chi, alpha=inst.alpha,
                   delta_cost=inst.delta_cost, gamma=inst.gamma)
    else:
        doc.update(name=inst.name, cost=_list(inst.cost), p_bar=_list(inst.p_bar), Q=_list(inst.Q),
                   f_defer=inst.f_defer, budget=inst.budget, C1=inst.C1, C2=inst.C2,
                   lambda_loan=inst.lambda_loan, mu_loan=inst.mu_loan)
    return doc


def _check_version(doc: dict) -> None:
    if not isinstance(doc, dict):
        raise FormatError("document must be a JSON object")
    if doc.get("format_version") != FORMAT_VERSION:
        raise FormatError(f"unsupported format_version {doc.get('format_version')!r}")


def instance_from_dict(doc: dict) -> Instance:
    _check_version(doc)
    kind = doc.get("kind")
    try:
        if kind == "explicit":
            sols = tuple((s["x"], s["y"], s["g"], s["h"]) for s in doc["solutions"])
            return ExplicitInstance(doc["n1"], doc["n2"], doc["m"], sols,
                                    uncertainty_from_dict(doc["uncertainty"]),
                                    Sense(doc.get("sense", "minimize")), doc.get("name", "explicit"))
        if kind == "sahlp":
            return SahlpInstance(doc["d"], doc["w_bar"], doc["w_hat"], doc["setup"], doc["chi"],
                                 doc["alpha"], doc["delta_cost"], doc["gamma"], doc.get("name", "sahlp"))
        if kind == "cb":
            return CbInstance(doc["cost"], doc["p_bar"], doc["Q"], doc["f_defer"], doc["budget"],
                              doc["C1"], doc["C2"], doc["lambda_loan"], doc["mu_loan"],
                              doc.get("name", "cb"))
    except KeyError as e:
        raise FormatError(f"{kind} instance is missing field {e}") from None
    raise FormatError(f"unknown instance kind {kind!r}")


def report_to_dict(report: RunReport) -> dict:
    return {"format_version": FORMAT_VERSION, "report": report.to_dict()}


def report_from_dict(doc: dict) -> RunReport:
    _check_version(doc)
    if "report" not in doc:
        raise FormatError("missing 'report' object")
    return RunReport.from_dict(doc["report"])


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def save_instance(inst: Instance, path) -> None:
    Path(path).write_text(dumps(instance_to_dict(inst)))


def load_instance(path) -> Instance:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise FormatError(f"{path}: {e}") from None
    return instance_from_dict(doc)


def save_report(report: RunReport, path) -> None:
    Path(path).write_text(dumps(report_to_dict(report)))


def load_report(path) -> RunReport:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise FormatError(f"{path}: {e}") from None
    return report_from_dict(doc)
