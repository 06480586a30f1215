"""Reset control: a Clegg integrator on an integrating plant.

No quadratic function works for this hybrid system, but a max of two
indefinite quadratics, and a mid of three, both satisfy the sampled
flow and jump conditions. Neither satisfies the Clarke-gradient
conditions on the reset line x1 = 0, which is fine because that line is
never crossed by flow. A convex candidate glued from V_mid needs its
weight vector solved for; the two-ray continuity condition below gives it.

    python3 demos/clegg_reset.py [outdir]
"""
import sys
from pathlib import Path

import numpy as np

from hylyap import certify as cert
from hylyap import presets
from hylyap.geometry import Monomial
from hylyap.hybrid import SimConfig, monitor, simulate
from hylyap.levelset import level_set, midpoint_convexity, render_svg
from hylyap.piecewise import continuity_check
from hylyap.setvalued import Linear

out = Path(sys.argv[1]) if len(sys.argv) > 1 else None
AF, AJ, Q = presets.CLEGG_AF, presets.CLEGG_AJ, presets.CLEGG_Q
reset_line = cert.line_points([0.0, 1.0], 0.1, 10.0, 100)

demo = cert.quadratic_infeasibility_demo(AF, presets.CLEGG_PROBES, np.eye(2))
print(f"V = |x|²: probe values {demo.values} -> {'no' if demo.infeasible else 'possible'} strict decrease")

w = presets.derived_conv_weight()
print(f"convex candidate weight from continuity on both edges of D: w = ({w[0]:.6f}, {w[1]:.6f})")
printed = presets.clegg_Vconv(presets.VCONV_W_PRINTED, check=False)
bad = continuity_check(printed, reset_line)
print(f"with w = ({presets.VCONV_W_PRINTED[0]}, {presets.VCONV_W_PRINTED[1]}) the pieces disagree on x1 = 0 by a factor "
      f"{bad.counterexamples[0]['ratio']:.3f}")

system = presets.clegg_system()
for V in (presets.clegg_VM(), presets.clegg_Vmid(), presets.clegg_Vconv()):
    res = cert.corollary_check(V, AF, Q, AJ, -Q)
    clarke = cert.clarke_check(V, Linear(AF), reset_line)
    arc = simulate(system, [-2.0, 0.5], SimConfig(t_max=20.0))
    mon = monitor(arc, V, Monomial(1e-6, 2))
    lines = level_set(V, 1.0, (-3, -3, 3, 3), 400)
    convex, _ = midpoint_convexity(V, np.vstack(lines), 1.0)
    print(f"{V.name:5s}: {res['verdict']}, lambda1 = {res['bounds'].details['lambda1']:.3f}; "
          f"Clarke on x1 = 0 fails at {clarke.n_violations}/100; "
          f"V along a solution with {len(arc.jumps)} jumps: {'monotone' if mon.passed else 'NOT monotone'}; "
          f"level set {'convex' if convex else 'nonconvex'}")
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        traj = [seg.x for seg in arc.segments if len(seg.x) > 1]
        (out / f"{V.name}.svg").write_text(render_svg({1.0: lines}, (-3, -3, 3, 3), overlay=traj))
