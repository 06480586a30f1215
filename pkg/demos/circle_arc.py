"""A flow confined to a circular arc, certified with a nonsmooth V.

The flow set is the upper part of the circle through the origin centred
at (1, 1). The field |x|(Ax + b) is tangent to it, and the piecewise
affine V below is not differentiable at three points of the arc.
Those points have measure zero on the arc, so the decrease is checked
everywhere else.

    python3 demos/circle_arc.py
"""
import numpy as np

from hylyap import certify as cert
from hylyap import presets
from hylyap.geometry import Monomial
from hylyap.hybrid import SimConfig, simulate

sys = presets.circle_system()
V = presets.circle_V()
kinks = tuple(float(presets.CIRCLE_ARC.param(z)) for z in presets.CIRCLE_Z.values())
grid = cert.CurveGrid(presets.CIRCLE_ARC, 10_000, kinks)

b = cert.bounds_check(V, grid, cert.BoundsSpec(Monomial(0.5, 1), Monomial(3.0, 1)))
print(f"|x|/2 <= V(x) <= 3|x| on the arc: {'pass' if b.passed else 'FAIL'} "
      f"(V/|x| ranges over [{b.details['min_ratio']:.3f}, {b.details['max_ratio']:.3f}])")

d = cert.dense_decrease_check(V, sys.F, sys.C, grid, Monomial(1.0, 1))
print(f"<∇V, f> <= -|x| away from the kinks: {'pass' if d.passed else 'FAIL'} ({d.params['tested']} points)")

arc = simulate(sys, [2.0, 2.0], SimConfig(t_max=20.0))
for t, _, x in arc.samples():
    if np.linalg.norm(x) < 1e-3:
        print(f"starting at (2, 2), |x| drops below 1e-3 at t = {t:.2f}")
        break
