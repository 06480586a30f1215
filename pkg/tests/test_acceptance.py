"""Exit criteria for the package, one test per criterion.

Run ``pytest tests/test_acceptance.py`` (or this file as a script); the
terminal summary lists one PASS/FAIL line per criterion.
"""
import json

import numpy as np
import pytest

from hylyap import certify as cert
from hylyap import presets
from hylyap.geometry import Monomial, Region, eigen_extremes, sym_part
from hylyap.hybrid import SLIDING, SimConfig, monitor, simulate, values_along
from hylyap.piecewise import Max, Min, boundary_points, continuity_check, flatten, lattice_eval
from hylyap.setvalued import Linear

pytestmark = pytest.mark.acceptance

RHO = Monomial(1e-6, 2)
RESET_LINE = cert.line_points([0.0, 1.0], 0.1, 10.0, 100)


@pytest.fixture
def record(acceptance_log):
    def _record(n, title, ok, note=""):
        acceptance_log[n] = (title, bool(ok), note)
        assert ok, f"criterion {n} ({title}) failed: {note}"
    return _record


def test_c01_flower_definiteness(record):
    lams = []
    for P, A, exact in ((presets.FLOWER_P1, presets.FLOWER_A1, (-3.0, -0.6)),
                        (presets.FLOWER_P2, presets.FLOWER_A2, (-3.0, -0.6))):
        lo, hi = eigen_extremes(sym_part(P @ A))
        lams.append((lo, hi))
        if abs(lo - exact[0]) > 1e-9 or abs(hi - exact[1]) > 1e-9:
            record(1, "flower definiteness", False, f"eigenvalues {lo}, {hi}")
    ok = all(hi < -0.5 for _, hi in lams)
    record(1, "flower definiteness", ok, f"eigenvalue pairs {lams}")


def test_c02_flower_ae_decrease(record):
    sys = presets.flower_system()
    rep = cert.dense_decrease_check(presets.flower_V(), sys.F, sys.C,
                                    cert.UnitCircleGrid(3600, presets.FLOWER_LOCUS_ANGLES), RHO)
    record(2, "flower a.e. decrease", rep.passed and rep.params["tested"] >= 3590,
           f"worst margin {rep.worst_margin:.6g} over {rep.params['tested']} directions")


def test_c03_flower_instability(record):
    arc = simulate(presets.flower_system(), [1.0, 1.0], SimConfig(t_max=2.0))
    ratio = np.linalg.norm(arc.final_state) / (np.sqrt(2.0) * np.exp(3.4))
    mon = monitor(arc, presets.flower_V(), RHO)
    slide = [m for m in mon.sliding_margins if m is not None]
    ok = 0.99 <= ratio <= 1.01 and bool(slide) and max(slide) > 0
    record(3, "flower instability", ok,
           f"|x(2)|/(sqrt2 e^3.4) = {ratio:.7f}, max sliding dV/dt margin {max(slide) if slide else None}")


def test_c04_clegg_no_quadratic(record):
    rng = np.random.default_rng(4)
    M = rng.normal(size=(10_000, 2, 2))
    P = M @ M.transpose(0, 2, 1) + 1e-3 * np.eye(2)
    fails = 0
    for Pk in P:
        Pk = 0.5 * (Pk + Pk.T)
        rep = cert.quadratic_infeasibility_demo(presets.CLEGG_AF, presets.CLEGG_PROBES, Pk)
        # closed form: probe values are (-2 p12, 2 p12)
        if not rep.infeasible or not np.allclose(rep.values, [-2 * Pk[0, 1], 2 * Pk[0, 1]], atol=1e-12):
            fails += 1
    record(4, "Clegg has no quadratic certificate", fails == 0, f"{10_000 - fails}/10000 infeasible")


def test_c05_clegg_vm_vmid(record):
    notes, ok = [], True
    for V in (presets.clegg_VM(), presets.clegg_Vmid()):
        res = cert.corollary_check(V, presets.CLEGG_AF, presets.CLEGG_Q, presets.CLEGG_AJ, -presets.CLEGG_Q,
                                   N=3600, delta_c=1e-8)
        lam1 = res["bounds"].details["lambda1"]
        good = res["flow"].passed and res["jump"].passed and lam1 > 0 and res["verdict"] == "UGAS"
        ok &= good
        notes.append(f"{V.name}: {res['verdict']}, lambda1 {lam1:.4g}, flow {res['flow'].worst_margin:.4g}, "
                     f"jump {res['jump'].worst_margin:.4g}")
    record(5, "Clegg V_M and V_mid certify", ok, "; ".join(notes))


def test_c06_clarke_fails_on_reset_line(record):
    notes, ok = [], True
    F = Linear(presets.CLEGG_AF)
    for V in (presets.clegg_VM(), presets.clegg_Vmid(), presets.clegg_Vconv()):
        rep = cert.clarke_check(V, F, RESET_LINE)
        ok &= rep.n_violations == len(RESET_LINE)
        notes.append(f"{V.name} {rep.n_violations}/100")
    record(6, "Clarke conditions fail on x1 = 0", ok, ", ".join(notes))


def test_c07_vconv_continuity(record):
    printed = presets.clegg_Vconv(presets.VCONV_W_PRINTED, check=False)
    bad = continuity_check(printed, RESET_LINE)
    ratio = bad.counterexamples[0]["ratio"] if bad.counterexamples else None
    derived = presets.clegg_Vconv(check=False)
    good = continuity_check(derived, np.vstack([boundary_points(derived, 360), RESET_LINE]), tol=1e-9)
    res = cert.corollary_check(derived, presets.CLEGG_AF, presets.CLEGG_Q, presets.CLEGG_AJ, -presets.CLEGG_Q)
    ok = (not bad.passed and ratio is not None and 1.9 <= ratio <= 2.1 and good.passed
          and res["flow"].passed and res["jump"].passed)
    w = presets.derived_conv_weight()
    record(7, "V_conv continuity ledger", ok,
           f"printed w ratio {ratio}, derived w = ({w[0]:.8f}, {w[1]:.8f}) gap {good.worst_margin:.2g}, "
           f"flow/jump {res['flow'].passed}/{res['jump'].passed}")


def test_c08_circle(record):
    sys = presets.circle_system()
    V = presets.circle_V()
    ex = tuple(float(presets.CIRCLE_ARC.param(z)) for z in presets.CIRCLE_Z.values())
    grid = cert.CurveGrid(presets.CIRCLE_ARC, 10_000, ex)
    b = cert.bounds_check(V, grid, cert.BoundsSpec(Monomial(0.5, 1), Monomial(3.0, 1)))
    d = cert.dense_decrease_check(V, sys.F, sys.C, grid, Monomial(1.0, 1))
    arc = simulate(sys, [2.0, 2.0], SimConfig(t_max=20.0))
    hit = next((t for t, _, x in arc.samples() if np.linalg.norm(x) < 1e-3), None)
    ok = b.passed and d.passed and hit is not None and hit < 20.0
    record(8, "circle example", ok, f"bounds {b.passed} ({len(grid.points())} arc samples), dense {d.passed} "
           f"({d.params['tested']} tested), |x| < 1e-3 at t = {hit}")


def test_c09_trajectory_monotonicity(record):
    sys = presets.clegg_system()
    V = presets.clegg_VM()
    rng = np.random.default_rng(9)
    worst_step, min_jumps, fails = -np.inf, np.inf, 0
    for _ in range(20):
        th, r = rng.uniform(0, 2 * np.pi), rng.uniform(0.5, 5.0)
        x0 = r * np.array([np.cos(th), np.sin(th)])
        assert sys.in_C(x0) or sys.in_D(x0)
        arc = simulate(sys, x0, SimConfig(t_max=10.0, j_max=200))
        step = float(np.max(np.diff(values_along(arc, V))))
        mon = monitor(arc, V, RHO)
        worst_step = max(worst_step, step)
        min_jumps = min(min_jumps, len(arc.jumps))
        fails += not (mon.passed and step <= 1e-6 and len(arc.jumps) >= 5)
    record(9, "trajectory monotonicity", fails == 0,
           f"worst per-step V change {worst_step:.3g}, fewest jumps {min_jumps}, {20 - fails}/20 runs pass")


def _random_lattice(rng, depth=0):
    if depth >= 3 or rng.random() < 0.35:
        M = rng.normal(size=(2, 2))
        return M + M.T
    kids = [_random_lattice(rng, depth + 1) for _ in range(2)]
    return (Max if rng.random() < 0.5 else Min)(*kids)


def _leaf_count(e):
    return 1 if isinstance(e, np.ndarray) else sum(_leaf_count(c) for c in getattr(e, "children", ())) or 1


def test_c10_structural_properties(record):
    rng = np.random.default_rng(10)
    notes, ok = [], True

    # flatten soundness
    worst, tried = 0.0, 0
    while tried < 20:
        e = _random_lattice(rng)
        if isinstance(e, np.ndarray) or _leaf_count(e) > 4:
            continue
        tried += 1
        X = rng.normal(scale=2.0, size=(10_000, 2))
        want = lattice_eval(e, X)
        got = flatten(e)(X)
        worst = max(worst, float(np.max(np.abs(got - want) / np.maximum(np.abs(want), 1e-300))))
    ok &= worst <= 1e-10
    notes.append(f"flatten rel err {worst:.2g}")

    # Clarke vertex sufficiency
    excess = -np.inf
    for _ in range(200):
        verts = rng.normal(size=(rng.integers(1, 7), 2))
        f = rng.normal(size=2)
        hull = rng.dirichlet(np.ones(len(verts)), size=500) @ verts
        excess = max(excess, float((hull @ f).max() - (verts @ f).max()))
    ok &= excess <= 1e-12
    notes.append(f"hull excess {excess:.2g}")

    # RK4 order on the rotation flow
    exact = np.array([np.cos(-3.0), np.sin(-3.0)])
    errs = [np.linalg.norm(simulate(presets.rotation_system(), [1.0, 0.0],
                                    SimConfig(dt=dt, t_max=3.0)).final_state - exact) for dt in (0.1, 0.05)]
    ok &= errs[0] / errs[1] >= 12
    notes.append(f"RK4 ratio {errs[0] / errs[1]:.2f}")

    # byte-identical reports
    def reports():
        V = presets.clegg_Vmid()
        res = cert.corollary_check(V, presets.CLEGG_AF, presets.CLEGG_Q, presets.CLEGG_AJ, -presets.CLEGG_Q)
        cl = cert.clarke_check(V, Linear(presets.CLEGG_AF), RESET_LINE, seed=10)
        return json.dumps([res[k].to_dict() for k in ("bounds", "flow", "jump")] + [cl.to_dict()], sort_keys=True)
    same = reports() == reports()
    ok &= same
    notes.append(f"reports identical {same}")
    record(10, "structural property suites", ok, ", ".join(notes))


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
