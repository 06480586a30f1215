"""JSON encodings of regions, Lyapunov functions, flow maps and systems.

Matrices are row-major lists of lists. Decoders raise
:class:`~hylyap.errors.UsageError` on malformed input.
"""
from __future__ import annotations

import json

import numpy as np

from .errors import UsageError
from .geometry import CircleArc, QuadConstraint, Region
from .hybrid import HybridSystem, IdentityJump, LinearJump
from .piecewise import (
    Affine,
    Leaf,
    Max,
    Mid,
    Min,
    ProperPiecewiseFn,
    Quadratic,
    SquaredLinear,
    flatten,
)
from .setvalued import Filippov2, Linear, NormScaledAffine


def matrix_to_json(M):
    return np.asarray(M, dtype=float).tolist()


def _mat(obj, key):
    try:
        M = np.array(obj[key], dtype=float)
    except (KeyError, TypeError, ValueError) as e:
        raise UsageError(f"missing or malformed matrix {key!r}") from e
    if M.ndim != 2:
        raise UsageError(f"{key!r} must be a list of rows")
    return M


def _vec(obj, key):
    try:
        v = np.array(obj[key], dtype=float)
    except (KeyError, TypeError, ValueError) as e:
        raise UsageError(f"missing or malformed vector {key!r}") from e
    if v.ndim != 1:
        raise UsageError(f"{key!r} must be a flat list")
    return v


# -- regions ---------------------------------------------------------------

def region_to_json(r: Region) -> dict:
    cons = []
    for c in r.constraints:
        d = {"R": matrix_to_json(c.R), "sense": c.sense}
        if c.q is not None:
            d["q"] = c.q.tolist()
        if c.c != 0.0:
            d["c"] = c.c
        cons.append(d)
    out = {"constraints": cons}
    if r.curve is not None:
        a = r.curve
        out["curve"] = {"type": "circle_arc", "center": list(a.center), "radius": a.radius,
                        "theta": [a.theta0, a.theta1]}
    return out


def region_from_json(obj) -> Region:
    if obj is None:
        return None
    if not isinstance(obj, dict) or "constraints" not in obj:
        raise UsageError("region must be an object with a 'constraints' list")
    cons = []
    for c in obj["constraints"]:
        q = c.get("q")
        cons.append(QuadConstraint(_mat(c, "R"), c.get("sense", "geq"),
                                   None if q is None else np.asarray(q, float), c.get("c", 0.0)))
    curve = None
    if obj.get("curve"):
        cv = obj["curve"]
        if cv.get("type") != "circle_arc":
            raise UsageError(f"unsupported curve type {cv.get('type')!r}")
        curve = CircleArc(tuple(cv["center"]), float(cv["radius"]), *map(float, cv["theta"]))
    return Region(tuple(cons), curve)


# -- Lyapunov functions -------------------------------------------------------

def piece_to_json(p) -> dict:
    if isinstance(p, Quadratic):
        return {"type": "quad", "P": matrix_to_json(p.matrix)}
    if isinstance(p, SquaredLinear):
        return {"type": "sqlinear", "w": p.w.tolist()}
    return {"type": "affine", "a": p.a.tolist(), "b": p.b}


def piece_from_json(obj):
    t = obj.get("type")
    if t == "quad":
        return Quadratic(_mat(obj, "P"))
    if t == "sqlinear":
        return SquaredLinear(_vec(obj, "w"))
    if t == "affine":
        return Affine(_vec(obj, "a"), obj.get("b", 0.0))
    raise UsageError(f"unknown piece type {t!r}")


def expr_to_json(e) -> dict:
    if isinstance(e, Leaf):
        return piece_to_json(e.piece)
    if isinstance(e, Mid):
        return {"type": "mid", "args": [expr_to_json(e.a), expr_to_json(e.b), expr_to_json(e.c)]}
    kind = "max" if isinstance(e, Max) else "min"
    return {"type": kind, "args": [expr_to_json(c) for c in e.children]}


def expr_from_json(obj):
    if not isinstance(obj, dict):
        raise UsageError("Lyapunov expression must be a JSON object")
    t = obj.get("type")
    if t in ("quad", "sqlinear", "affine"):
        return Leaf(piece_from_json(obj))
    args = obj.get("args")
    if not isinstance(args, list) or not args:
        raise UsageError(f"{t!r} needs a non-empty 'args' list")
    kids = [expr_from_json(a) for a in args]
    if t == "max":
        return Max(*kids)
    if t == "min":
        return Min(*kids)
    if t == "mid":
        if len(kids) != 3:
            raise UsageError("mid takes exactly three arguments")
        return Mid(*kids)
    raise UsageError(f"unknown expression type {t!r}")


def ppf_to_json(f: ProperPiecewiseFn) -> dict:
    pieces = []
    for r, p in f.pieces:
        d = {"region": region_to_json(r)}
        if isinstance(p, Quadratic):
            d["P"] = matrix_to_json(p.matrix)
        else:
            d["piece"] = piece_to_json(p)
        pieces.append(d)
    out = {"type": "pieces", "pieces": pieces}
    if f.name:
        out["name"] = f.name
    return out


def lyapunov_from_json(obj) -> ProperPiecewiseFn:
    """Any Lyapunov encoding, returned in flat piecewise form."""
    if obj.get("type") == "pieces":
        pieces = []
        for d in obj.get("pieces", []):
            r = region_from_json(d.get("region", {"constraints": []}))
            p = Quadratic(_mat(d, "P")) if "P" in d else piece_from_json(d["piece"])
            pieces.append((r, p))
        return ProperPiecewiseFn(pieces, obj.get("name", ""))
    e = expr_from_json(obj)
    if isinstance(e, Leaf) and isinstance(e.piece, Affine):
        return ProperPiecewiseFn([(Region(), e.piece)], obj.get("name", ""))
    return flatten(e, obj.get("name", ""))


# -- flow maps and systems -------------------------------------------------------

def flow_to_json(F) -> dict:
    if isinstance(F, Linear):
        return {"type": "linear", "A": matrix_to_json(F.A)}
    if isinstance(F, NormScaledAffine):
        return {"type": "norm_scaled_affine", "A": matrix_to_json(F.A), "b": F.b.tolist()}
    return {"type": "filippov2", "A1": matrix_to_json(F.A1), "A2": matrix_to_json(F.A2),
            "Q": matrix_to_json(F.Q)}


def flow_from_json(obj):
    t = obj.get("type")
    if t == "linear":
        return Linear(_mat(obj, "A"))
    if t == "norm_scaled_affine":
        return NormScaledAffine(_mat(obj, "A"), _vec(obj, "b"))
    if t == "filippov2":
        return Filippov2(_mat(obj, "A1"), _mat(obj, "A2"), _mat(obj, "Q"))
    raise UsageError(f"unknown flow map type {t!r}")


def system_to_json(sys: HybridSystem) -> dict:
    jump = None
    if isinstance(sys.G, LinearJump):
        jump = {"type": "linear", "A": matrix_to_json(sys.G.A)}
    elif isinstance(sys.G, IdentityJump):
        jump = {"type": "identity"}
    return {
        "name": sys.name,
        "C": region_to_json(sys.C),
        "D": None if sys.D is None else region_to_json(sys.D),
        "flow": flow_to_json(sys.F),
        "jump": jump,
    }


def system_from_json(obj) -> HybridSystem:
    if not isinstance(obj, dict) or "flow" not in obj:
        raise UsageError("system JSON needs at least a 'flow' entry")
    F = flow_from_json(obj["flow"])
    C = region_from_json(obj.get("C", {"constraints": []}))
    D = region_from_json(obj.get("D"))
    G = None
    jump = obj.get("jump")
    if jump is not None:
        if jump.get("type") == "linear":
            G = LinearJump(_mat(jump, "A"))
        elif jump.get("type") == "identity":
            G = IdentityJump(F.n)
        else:
            raise UsageError(f"unknown jump type {jump.get('type')!r}")
    return HybridSystem(C, F, D, G, obj.get("name", ""))


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)
