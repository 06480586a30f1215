"""Built-in example systems and Lyapunov candidates.

This module is the one place where example constants live. Derived
quantities (the corrected V_conv weight vector) are computed here from
those constants, never typed in.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import CircleArc, QuadConstraint, Region, conic, halfspace
from .hybrid import HybridSystem, LinearJump
from .piecewise import Affine, Max, Mid, ProperPiecewiseFn, Quadratic, SquaredLinear, flatten
from .setvalued import Filippov2, Linear, NormScaledAffine

# -- "flower": Filippov regularization of a two-mode linear system ---------
FLOWER_A1 = np.array([[-0.3, -1.0], [5.0, -0.3]])
FLOWER_A2 = np.array([[-0.3, 5.0], [-1.0, -0.3]])
FLOWER_Q = np.array([[1.0, 0.0], [0.0, -1.0]])
FLOWER_P1 = np.array([[5.0, 0.0], [0.0, 1.0]])
FLOWER_P2 = np.array([[1.0, 0.0], [0.0, 5.0]])
# switching locus x1 = ±x2
FLOWER_LOCUS_ANGLES = (np.pi / 4, 3 * np.pi / 4, 5 * np.pi / 4, 7 * np.pi / 4)

# -- "circle": flow constrained to a circular arc -------------------------
CIRCLE_A = np.array([[0.0, -1.0], [1.0, 0.0]])
CIRCLE_B = np.array([1.0, -1.0])
CIRCLE_CENTER = (1.0, 1.0)
CIRCLE_RADIUS = np.sqrt(2.0)
# arc with x2 >= 0 runs from (2, 0) counter-clockwise over the top to the origin
CIRCLE_ARC = CircleArc(CIRCLE_CENTER, CIRCLE_RADIUS, -np.pi / 4, 5 * np.pi / 4)
CIRCLE_Z = {"z1": (0.0, 2.0), "z2": (2.0, 2.0), "z3": (2.0, 0.0)}

# -- Clegg integrator with an integrating plant, eps = 0.1 ------------------
CLEGG_EPS = 0.1
CLEGG_AF = np.array([[0.0, 1.0], [-1.0, 0.0]])
CLEGG_AJ = np.array([[1.0, 0.0], [0.0, 0.0]])


def clegg_Q(eps: float = CLEGG_EPS) -> np.ndarray:
    return np.array([[1.0, -1.0 / (2 * eps)], [-1.0 / (2 * eps), 0.0]])


CLEGG_Q = clegg_Q()
# max of two sign-indefinite quadratics
VM_P1 = np.array([[1.0, -0.1], [-0.1, 0.5]])
VM_P2 = np.array([[2.5, 1.4], [1.4, 0.5]])
# mid of three quadratics; P3 has entries 25/16 and 49/160
VMID_P1 = np.array([[1.0, 0.25], [0.25, 0.7]])
VMID_P2 = np.array([[0.55, -0.2], [-0.2, 0.25]])
VMID_P3 = np.array([[25 / 16, 49 / 160], [49 / 160, 0.25]])
# printed weight of the convex candidate; fails continuity on x1 = 0
VCONV_W_PRINTED = np.array([0.9574, 0.7071])
CLEGG_PROBES = ((-1.0, 0.0), (0.0, 1.0))


# -- systems -------------------------------------------------------------------

def flower_system() -> HybridSystem:
    return HybridSystem(Region(), Filippov2(FLOWER_A1, FLOWER_A2, FLOWER_Q), name="flower")


def circle_flow_set() -> Region:
    circ = np.eye(2)
    q = -2.0 * np.asarray(CIRCLE_CENTER)
    c = float(np.dot(CIRCLE_CENTER, CIRCLE_CENTER)) - CIRCLE_RADIUS ** 2
    return Region(
        (
            QuadConstraint(circ, "geq", q, c),
            QuadConstraint(circ, "leq", q, c),
            halfspace([0.0, 1.0], 0.0, "geq"),
        ),
        curve=CIRCLE_ARC,
    )


def circle_system() -> HybridSystem:
    return HybridSystem(circle_flow_set(), NormScaledAffine(CIRCLE_A, CIRCLE_B), name="circle")


def clegg_system(eps: float = CLEGG_EPS) -> HybridSystem:
    Q = clegg_Q(eps)
    return HybridSystem(
        Region((conic(Q, "geq"),)),
        Linear(CLEGG_AF),
        Region((conic(Q, "leq"),)),
        LinearJump(CLEGG_AJ),
        name="clegg",
    )


def rotation_system() -> HybridSystem:
    return HybridSystem(Region(), Linear(CLEGG_AF), name="rotation")


# -- Lyapunov candidates ----------------------------------------------------------

def flower_V() -> ProperPiecewiseFn:
    return flatten(Max(FLOWER_P1, FLOWER_P2), "Vflower").checked()


def circle_V() -> ProperPiecewiseFn:
    """Affine pieces x2, x1 + 2, 6 − x2 glued along x1 = 0 and x1 = 2.

    The middle piece is kept on the upper arc (x2 >= 1); the function is
    continuous on the arc only.
    """
    e1 = np.array([1.0, 0.0])
    return ProperPiecewiseFn(
        [
            (Region((halfspace(e1, 0.0, "leq"),)), Affine([0.0, 1.0], 0.0)),
            (Region((halfspace(e1, 0.0, "geq"), halfspace(e1, -2.0, "leq"),
                     halfspace([0.0, 1.0], -1.0, "geq"))), Affine([1.0, 0.0], 2.0)),
            (Region((halfspace(e1, -2.0, "geq"),)), Affine([0.0, -1.0], 6.0)),
        ],
        "Vcircle",
    )


def clegg_VM() -> ProperPiecewiseFn:
    return flatten(Max(VM_P1, VM_P2), "VM").checked()


def clegg_Vmid() -> ProperPiecewiseFn:
    return flatten(Mid(VMID_P1, VMID_P2, VMID_P3), "Vmid").checked()


def vmid_value(x) -> float:
    X = np.asarray(x, dtype=float)
    v = [X @ P @ X for P in (VMID_P1, VMID_P2, VMID_P3)]
    return float(np.median(v))


def derived_conv_weight(eps: float = CLEGG_EPS) -> np.ndarray:
    """Weight w making ⟨w, x⟩² agree with V_mid on both boundary rays of D.

    The rays are x1 = 0 and x1 = x2/eps; on each, ⟨w, x⟩ is taken
    positive, giving two scalar equations with a unique solution.
    """
    r1 = np.array([0.0, 1.0])
    r2 = np.array([1.0 / eps, 1.0])
    s1 = np.sqrt(vmid_value(r1))
    s2 = np.sqrt(vmid_value(r2))
    return np.linalg.solve(np.vstack([r1, r2]), np.array([s1, s2]))


def clegg_Vconv(w=None, eps: float = CLEGG_EPS, check: bool = True) -> ProperPiecewiseFn:
    w = derived_conv_weight(eps) if w is None else np.asarray(w, dtype=float)
    Q = clegg_Q(eps)
    mid = flatten(Mid(VMID_P1, VMID_P2, VMID_P3)).restrict(Region((conic(Q, "geq"),)))
    jump = ProperPiecewiseFn([(Region((conic(Q, "leq"),)), SquaredLinear(w))])
    f = ProperPiecewiseFn((mid + jump).pieces, "Vconv")
    return f.checked() if check else f


def quadratic_V(P=None) -> ProperPiecewiseFn:
    P = np.eye(2) if P is None else P
    return ProperPiecewiseFn([(Region(), Quadratic(P))], "quad")


# -- registry -------------------------------------------------------------------

@dataclass(frozen=True)
class Preset:
    name: str
    system: object
    lyapunov: dict = field(default_factory=dict)
    default: str = ""


def registry() -> dict:
    return {
        "flower": Preset("flower", flower_system, {"Vflower": flower_V, "V": flower_V}, "Vflower"),
        "circle": Preset("circle", circle_system, {"Vcircle": circle_V, "V": circle_V}, "Vcircle"),
        "clegg-max": Preset("clegg-max", clegg_system, {"VM": clegg_VM}, "VM"),
        "clegg-mid": Preset("clegg-mid", clegg_system, {"Vmid": clegg_Vmid}, "Vmid"),
        "clegg-conv": Preset(
            "clegg-conv",
            clegg_system,
            {
                "Vconv": clegg_Vconv,
                "Vconv-derived": clegg_Vconv,
                "Vconv-printed": lambda: clegg_Vconv(VCONV_W_PRINTED, check=False),
            },
            "Vconv",
        ),
        "rotation": Preset("rotation", rotation_system, {"quad": quadratic_V}, "quad"),
    }


def lyapunov_by_name(name: str):
    for p in registry().values():
        if name in p.lyapunov:
            return p.lyapunov[name]()
    raise KeyError(name)
