"""JSON round trips for regions, functions and systems."""
import json

import numpy as np
import pytest

from hylyap import presets
from hylyap.errors import UsageError
from hylyap.serialize import dumps, lyapunov_from_json, ppf_to_json, system_from_json, system_to_json


@pytest.mark.parametrize("make", [presets.clegg_VM, presets.clegg_Vmid, presets.clegg_Vconv,
                                  presets.circle_V, presets.flower_V])
def test_function_round_trip(make, rng):
    V = make()
    W = lyapunov_from_json(json.loads(dumps(ppf_to_json(V))))
    assert len(W) == len(V)
    X = rng.normal(size=(300, 2))
    if V.name == "Vcircle":
        X = np.array([presets.CIRCLE_ARC.point(t) for t in np.linspace(-0.7, 3.9, 300)])
    np.testing.assert_array_equal(W(X), V(X))


@pytest.mark.parametrize("name", ["flower", "circle", "clegg-max", "rotation"])
def test_system_round_trip(name):
    sys = presets.registry()[name].system()
    text = dumps(system_to_json(sys))
    again = system_from_json(json.loads(text))
    assert dumps(system_to_json(again)) == text


def test_expression_form():
    obj = {"type": "mid", "args": [{"type": "quad", "P": presets.VMID_P1.tolist()},
                                   {"type": "quad", "P": presets.VMID_P2.tolist()},
                                   {"type": "quad", "P": presets.VMID_P3.tolist()}]}
    V = lyapunov_from_json(obj)
    assert V([0.0, 1.0]) == pytest.approx(0.25)


@pytest.mark.parametrize("bad", [
    {"type": "max", "args": []},
    {"type": "mid", "args": [{"type": "quad", "P": [[1, 0], [0, 1]]}]},
    {"type": "quad", "P": [[1, 2], [0, 1]]},
    {"type": "cubic"},
])
def test_malformed_function(bad):
    with pytest.raises(UsageError):
        lyapunov_from_json(bad)


def test_malformed_system():
    with pytest.raises(UsageError):
        system_from_json({"C": {"constraints": []}})
    with pytest.raises(UsageError):
        system_from_json({"flow": {"type": "linear", "A": [[0, 1], [-1, 0]]}, "jump": {"type": "teleport"}})
