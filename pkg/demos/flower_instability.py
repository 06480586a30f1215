"""A Lyapunov function that decreases almost everywhere, on an unstable system.

Two linear modes are switched on the sign of x1² − x2². Each mode has its
own quadratic Lyapunov function, and their maximum decreases along both
modes away from the switching lines. Yet the Filippov solutions slide
along x1 = x2 and grow like e^{1.7t}: checking the decrease only on a
dense set is unsound when the right-hand side is not inner
semicontinuous.

    python3 demos/flower_instability.py
"""
import numpy as np

from hylyap import certify as cert
from hylyap import presets
from hylyap.geometry import Monomial, eigen_extremes, sym_part
from hylyap.hybrid import SimConfig, monitor, simulate

sys = presets.flower_system()
V = presets.flower_V()

for name, P, A in (("mode 1", presets.FLOWER_P1, presets.FLOWER_A1), ("mode 2", presets.FLOWER_P2, presets.FLOWER_A2)):
    print(f"{name}: eigenvalues of PA + AᵀP = {eigen_extremes(sym_part(P @ A))}")

dense = cert.dense_decrease_check(V, sys.F, sys.C, cert.UnitCircleGrid(3600, presets.FLOWER_LOCUS_ANGLES),
                                  Monomial(1e-6, 2))
print(f"decrease off the switching lines: {'pass' if dense.passed else 'FAIL'} "
      f"(worst {dense.worst_margin:.3f})")

clarke = cert.clarke_check(V, sys.F, cert.line_points(np.array([1.0, 1.0]) / np.sqrt(2), 0.1, 5.0, 20))
print(f"Clarke condition on x1 = x2: {'pass' if clarke.passed else 'FAIL'} "
      f"({clarke.n_violations}/20 points violate)")

arc = simulate(sys, [1.0, 1.0], SimConfig(t_max=2.0))
r = np.linalg.norm(arc.final_state)
print(f"|x(2)| = {r:.4f}; sliding prediction √2·e^3.4 = {np.sqrt(2) * np.exp(3.4):.4f}")
mon = monitor(arc, V, Monomial(1e-6, 2))
print(f"V along the sliding solution: worst dV/dt margin {mon.worst_margin:.1f} (positive means V grows)")
