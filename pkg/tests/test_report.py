"""Check reports."""
import json

import numpy as np

from hylyap.report import collect


def test_collect_orders_worst_first_and_limits():
    m = np.array([-1.0, 0.5, 2.0, 0.1, -3.0])
    X = np.arange(10.0).reshape(5, 2)
    rep = collect("demo", m, X, {"N": 5}, limit=2)
    assert not rep.passed and rep.n_violations == 3
    assert [c["value"] for c in rep.counterexamples] == [2.0, 0.5]
    assert rep.counterexamples[0]["x"] == [4.0, 5.0]
    assert rep.worst_margin == 2.0


def test_passing_and_empty_reports():
    assert collect("demo", [-1.0, -2.0], [[1.0, 0.0], [0.0, 1.0]], {}).passed
    empty = collect("demo", [], np.empty((0, 2)), {})
    assert empty.passed and empty.worst_margin == float("-inf")


def test_json_is_canonical():
    rep = collect("demo", np.array([0.25]), np.array([[1.0, 2.0]]), {"b": 1, "a": np.float64(2.0)})
    text = rep.to_json()
    doc = json.loads(text)
    assert doc["check"] == "demo" and doc["pass"] is False
    assert doc["params"]["a"] == 2.0 and "evidence" in doc["params"]
    assert text == json.dumps(doc, sort_keys=True, indent=2)
