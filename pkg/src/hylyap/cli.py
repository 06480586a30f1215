"""Command-line interface: ``hylyap {simulate,certify,levelset,reproduce}``.

Exit codes: 0 pass / clean run, 1 certification failure, 2 numeric
failure, 64 usage error, 65 domain error.
"""
from __future__ import annotations

import argparse
import json
import os
import re
import sys
from pathlib import Path

import numpy as np

from . import certify as cert
from . import presets
from .errors import DomainError, HypothesisError, NumericError, UsageError
from .geometry import Monomial, Region
from .hybrid import LinearJump, SimConfig, monitor, read_trajectory_csv, simulate
from .levelset import level_set, marching_squares, midpoint_convexity, raster, render_svg
from .piecewise import boundary_points, continuity_check
from .serialize import dumps, lyapunov_from_json, ppf_to_json, system_from_json, system_to_json
from .setvalued import Linear

EXIT_OK, EXIT_FAIL, EXIT_NUMERIC, EXIT_USAGE, EXIT_DOMAIN = 0, 1, 2, 64, 65


class _Parser(argparse.ArgumentParser):
    def __init__(self, *a, **kw):
        super().__init__(*a, **kw)
        # let values such as "-2,0.5" through as arguments rather than options
        self._negative_number_matcher = re.compile(r"^-\.?\d")

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def seed_from_env(default: int = 0) -> int:
    v = os.environ.get("HYLYAP_SEED")
    if v is None:
        return default
    try:
        return int(v)
    except ValueError as e:
        raise UsageError(f"HYLYAP_SEED must be an integer, got {v!r}") from e


def floats(text: str, count: int | None = None) -> list[float]:
    try:
        vals = [float(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError as e:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from e
    if count is not None and len(vals) != count:
        raise UsageError(f"expected {count} numbers, got {len(vals)} in {text!r}")
    return vals


def load_system(spec: str):
    """System from a JSON file path or a preset name; returns (system, preset or None)."""
    reg = presets.registry()
    if spec in reg:
        return reg[spec].system(), reg[spec]
    p = Path(spec)
    if p.is_file():
        try:
            return system_from_json(json.loads(p.read_text())), None
        except json.JSONDecodeError as e:
            raise UsageError(f"{spec}: invalid JSON ({e})") from e
    raise UsageError(f"unknown system {spec!r} (not a file or preset: {', '.join(sorted(reg))})")


def load_lyapunov(spec: str | None, preset=None):
    if spec is None:
        if preset is None:
            raise UsageError("--lyapunov is required for this system")
        return preset.lyapunov[preset.default]()
    p = Path(spec)
    if p.is_file():
        try:
            return lyapunov_from_json(json.loads(p.read_text()))
        except json.JSONDecodeError as e:
            raise UsageError(f"{spec}: invalid JSON ({e})") from e
    if preset is not None and spec in preset.lyapunov:
        return preset.lyapunov[spec]()
    try:
        return presets.lyapunov_by_name(spec)
    except KeyError:
        raise UsageError(f"unknown Lyapunov function {spec!r}") from None


def parse_points(spec: str, V=None, count: int = 100) -> np.ndarray:
    """``line-x1=0``, ``line-x1=x2``, ``boundary`` or ``"a,b;c,d"``."""
    if spec.startswith("line-"):
        lines = {"x1=0": (0.0, 1.0), "x2=0": (1.0, 0.0), "x1=x2": (1.0, 1.0), "x1=-x2": (1.0, -1.0)}
        key = spec[5:]
        if key not in lines:
            raise UsageError(f"unknown line {key!r}; choose from {', '.join(lines)}")
        d = np.asarray(lines[key]) / np.linalg.norm(lines[key])
        return cert.line_points(d, 0.1, 10.0, count)
    if spec == "boundary":
        if V is None:
            raise UsageError("boundary points need a Lyapunov function")
        return boundary_points(V, count)
    p = Path(spec)
    if p.is_file():
        spec = p.read_text().strip().replace("\n", ";")
    return np.array([floats(chunk) for chunk in spec.split(";") if chunk.strip()])


def _write(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)


# -- simulate -----------------------------------------------------------------

def cmd_simulate(args) -> int:
    system, preset = load_system(args.system)
    x0 = floats(args.x0, system.n)
    V = load_lyapunov(args.lyapunov, preset) if args.lyapunov else None
    cfg = SimConfig(dt=args.dt, t_max=args.tmax, j_max=args.jmax, priority=args.priority)
    try:
        arc = simulate(system, x0, cfg)
    except DomainError as e:
        print(f"domain error: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    except NumericError as e:
        print(f"numeric error: {e}; last state {e.last_state}", file=sys.stderr)
        return EXIT_NUMERIC
    _write(args.out, arc.to_csv(V))
    print(f"termination: {arc.termination}; jumps: {len(arc.jumps)}; final: "
          f"{np.asarray(arc.final_state).tolist()}", file=sys.stderr)
    return EXIT_OK


# -- certify --------------------------------------------------------------------

def _single_conic(region: Region | None, what: str):
    if region is None or len(region.constraints) != 1 or not region.conic:
        raise UsageError(f"{what} must be a single conic constraint for homogeneous checks")
    c = region.constraints[0]
    return c.sign * c.R


def _homogeneous_data(system):
    if not isinstance(system.F, Linear):
        raise UsageError("flow/jump checks need a linear flow map")
    Q_F = _single_conic(system.C, "C")
    if not isinstance(system.G, LinearJump):
        raise UsageError("jump checks need a linear jump map")
    Q_J = _single_conic(system.D, "D")
    return system.F.A, Q_F, system.G.A, Q_J


def _default_sampler(system, preset, N):
    if system.C.curve is not None:
        ex = ()
        if preset is not None and preset.name == "circle":
            ex = tuple(float(presets.CIRCLE_ARC.param(z)) for z in presets.CIRCLE_Z.values())
        return cert.CurveGrid(system.C.curve, max(N, 10_000), ex)
    ex = presets.FLOWER_LOCUS_ANGLES if preset is not None and preset.name == "flower" else ()
    return cert.UnitCircleGrid(N, ex)


def run_checks(system, preset, V, checks, N, rho, points=None, alpha=None, seed=0) -> dict:
    out = {}
    for name in checks:
        if name == "bounds":
            if alpha is not None:
                spec = cert.BoundsSpec(*alpha)
                out[name] = cert.bounds_check(V, _default_sampler(system, preset, N), spec)
            elif system.homogeneous and V.homogeneous and system.D is not None:
                A_F, Q_F, A_J, Q_J = _homogeneous_data(system)
                out[name] = cert.bounds_check(V, cert.homogeneous_bound_samples(A_J, Q_F, Q_J, N))
            elif V.homogeneous:
                out[name] = cert.bounds_check(V, cert.UnitCircleGrid(N))
            else:
                raise UsageError("bounds for a non-homogeneous function need --alpha1/--alpha2")
        elif name == "flow":
            A_F, Q_F, _, _ = _homogeneous_data(system)
            out[name] = cert.homogeneous_flow_check(V, A_F, Q_F, cert.UnitCircleGrid(N))
        elif name == "jump":
            _, _, A_J, Q_J = _homogeneous_data(system)
            out[name] = cert.homogeneous_jump_check(V, A_J, Q_J, cert.UnitCircleGrid(N))
        elif name == "dense":
            out[name] = cert.dense_decrease_check(V, system.F, system.C,
                                                  _default_sampler(system, preset, N), rho)
        elif name == "clarke":
            pts = points if points is not None else boundary_points(V, 100)
            out[name] = cert.clarke_check(V, system.F, pts, rho, seed=seed)
        elif name == "continuity":
            out[name] = continuity_check(V, boundary_points(V, 360))
        else:
            raise UsageError(f"unknown check {name!r}")
    return out


def _monomial(text):
    c, p = floats(text, 2)
    return Monomial(c, p)


def cmd_certify(args) -> int:
    system, preset = load_system(args.system)
    V = load_lyapunov(args.lyapunov, preset)
    checks = [c.strip() for c in args.checks.split(",") if c.strip()]
    points = parse_points(args.points, V) if args.points else None
    alpha = None
    if args.alpha1 or args.alpha2:
        if not (args.alpha1 and args.alpha2):
            raise UsageError("--alpha1 and --alpha2 go together")
        alpha = (_monomial(args.alpha1), _monomial(args.alpha2))
    try:
        reports = run_checks(system, preset, V, checks, args.grid, _monomial(args.rho), points, alpha,
                             seed_from_env())
    except HypothesisError as e:
        raise UsageError(str(e)) from e
    ok = all(r.passed for r in reports.values())
    doc = {
        "system": args.system,
        "lyapunov": args.lyapunov or (preset.default if preset else ""),
        "pass": ok,
        "checks": {k: r.to_dict() for k, r in reports.items()},
    }
    if args.report:
        _write(args.report, dumps(doc))
    for k, r in reports.items():
        print(f"{k}: {'pass' if r.passed else 'FAIL'} (worst margin {r.worst_margin:.6g})", file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


# -- levelset ---------------------------------------------------------------------

def _overlay(path):
    head, data = read_trajectory_csv(Path(path).read_text())
    if "x1" not in head or "x2" not in head:
        raise UsageError("overlay CSV needs x1 and x2 columns")
    jcol, i1, i2 = head.index("j"), head.index("x1"), head.index("x2")
    lines = []
    for j in np.unique(data[:, jcol]):
        seg = data[data[:, jcol] == j][:, [i1, i2]]
        if len(seg) > 1:
            lines.append(seg)
    return lines


def cmd_levelset(args) -> int:
    V = load_lyapunov(args.lyapunov)
    if V.n != 2:
        raise UsageError("level sets are drawn for planar functions only")
    levels = floats(args.levels)
    bbox = floats(args.bbox, 4)
    xs, ys, Z = raster(V, bbox, args.res)
    contours = {}
    for lv in levels:
        lines = marching_squares(Z, xs, ys, lv)
        if not lines:
            print(f"warning: empty contour for level {lv}", file=sys.stderr)
        contours[lv] = lines
    overlay = _overlay(args.overlay) if args.overlay else None
    _write(args.out, render_svg(contours, bbox, overlay=overlay))
    return EXIT_OK


# -- reproduce --------------------------------------------------------------------

def _reproduce_clegg(name, outdir, seed):
    system = presets.clegg_system()
    reg = presets.registry()[name]
    profile, expected = {}, {}
    keys = ["VM"] if name == "clegg-max" else ["Vmid"] if name == "clegg-mid" else []
    if name == "clegg-conv":
        printed = presets.clegg_Vconv(presets.VCONV_W_PRINTED, check=False)
        derived = presets.clegg_Vconv(check=False)
        line = parse_points("line-x1=0")
        c_pr = continuity_check(printed, line)
        c_de = continuity_check(derived, boundary_points(derived, 360))
        profile["continuity_printed"] = c_pr.passed
        profile["continuity_derived"] = c_de.passed
        profile["printed_ratio_on_x1_0"] = c_pr.counterexamples[0]["ratio"] if c_pr.counterexamples else None
        profile["derived_w"] = presets.derived_conv_weight().tolist()
        expected.update(continuity_printed=False, continuity_derived=True)
        _write(str(outdir / "continuity_printed.json"), c_pr.to_json())
        _write(str(outdir / "continuity_derived.json"), c_de.to_json())
        keys = ["Vconv"]
    for key in keys:
        V = reg.lyapunov[key]()
        _write(str(outdir / f"{key}.json"), dumps(ppf_to_json(V)))
        res = cert.corollary_check(V, presets.CLEGG_AF, presets.CLEGG_Q, presets.CLEGG_AJ, -presets.CLEGG_Q)
        for k in ("bounds", "flow", "jump"):
            profile[k] = res[k].passed
            expected[k] = True
            _write(str(outdir / f"report_{k}.json"), res[k].to_json())
        profile["verdict"] = res["verdict"]
        expected["verdict"] = "UGAS"
        cl = cert.clarke_check(V, system.F, parse_points("line-x1=0"), seed=seed)
        profile["clarke_on_reset_line"] = cl.passed
        expected["clarke_on_reset_line"] = False
        _write(str(outdir / "report_clarke.json"), cl.to_json())
        arc = simulate(system, [-2.0, 0.5], SimConfig(t_max=20.0, j_max=20))
        _write(str(outdir / "trajectory.csv"), arc.to_csv(V))
        mon = monitor(arc, V, Monomial(1e-6, 2))
        profile["monitor"] = mon.passed
        expected["monitor"] = True
        _write(str(outdir / "monitor.json"), dumps(mon.to_dict()))
        lines = level_set(V, 1.0, (-3, -3, 3, 3), 400)
        convex, _ = midpoint_convexity(V, np.vstack(lines), 1.0, seed=seed)
        profile["level1_convex"] = convex
        expected["level1_convex"] = key == "Vconv"
        pts = [s[:, :2] for s in _arc_lines(arc)]
        _write(str(outdir / "levelset.svg"), render_svg({1.0: lines}, (-3, -3, 3, 3), overlay=pts))
    demo = cert.quadratic_infeasibility_demo(presets.CLEGG_AF, presets.CLEGG_PROBES, np.eye(2))
    profile["no_quadratic_identity_probe"] = demo.infeasible
    expected["no_quadratic_identity_probe"] = True
    return profile, expected


def _arc_lines(arc):
    return [seg.x for seg in arc.segments if len(seg.x) > 1]


def _reproduce_flower(outdir, seed):
    system = presets.flower_system()
    V = presets.flower_V()
    _write(str(outdir / "V.json"), dumps(ppf_to_json(V)))
    dense = cert.dense_decrease_check(V, system.F, system.C,
                                      cert.UnitCircleGrid(3600, presets.FLOWER_LOCUS_ANGLES), Monomial(1e-6, 2))
    cl = cert.clarke_check(V, system.F, parse_points("line-x1=x2"), seed=seed)
    arc = simulate(system, [1.0, 1.0], SimConfig(t_max=2.0))
    r = float(np.linalg.norm(arc.final_state))
    target = np.sqrt(2) * np.exp(3.4)
    mon = monitor(arc, V, Monomial(1e-6, 2))
    _write(str(outdir / "report_dense.json"), dense.to_json())
    _write(str(outdir / "report_clarke.json"), cl.to_json())
    _write(str(outdir / "trajectory.csv"), arc.to_csv(V))
    _write(str(outdir / "monitor.json"), dumps(mon.to_dict()))
    lines = level_set(V, 1.0, (-1.5, -1.5, 1.5, 1.5), 400)
    _write(str(outdir / "levelset.svg"), render_svg({1.0: lines}, (-1.5, -1.5, 1.5, 1.5)))
    profile = {
        "dense": dense.passed,
        "clarke_on_locus": cl.passed,
        "escape": bool(0.99 * target <= r) and not mon.passed,
        "final_radius": r,
    }
    expected = {"dense": True, "clarke_on_locus": False, "escape": True}
    return profile, expected


def _reproduce_circle(outdir, seed):
    system = presets.circle_system()
    V = presets.circle_V()
    _write(str(outdir / "V.json"), dumps(ppf_to_json(V)))
    ex = tuple(float(presets.CIRCLE_ARC.param(z)) for z in presets.CIRCLE_Z.values())
    grid = cert.CurveGrid(presets.CIRCLE_ARC, 10_000, ex)
    b = cert.bounds_check(V, grid, cert.BoundsSpec(Monomial(0.5, 1), Monomial(3.0, 1)))
    d = cert.dense_decrease_check(V, system.F, system.C, grid, Monomial(1.0, 1))
    arc = simulate(system, [2.0, 2.0], SimConfig(t_max=20.0))
    radii = np.array([np.linalg.norm(x) for _, _, x in arc.samples()])
    times = np.array([t for t, _, _ in arc.samples()])
    hit = times[radii < 1e-3]
    _write(str(outdir / "report_bounds.json"), b.to_json())
    _write(str(outdir / "report_dense.json"), d.to_json())
    _write(str(outdir / "trajectory.csv"), arc.to_csv(V))
    profile = {"bounds": b.passed, "dense": d.passed, "converges": bool(hit.size and hit[0] < 20.0),
               "time_to_1e-3": float(hit[0]) if hit.size else None}
    expected = {"bounds": True, "dense": True, "converges": True}
    return profile, expected


def cmd_reproduce(args) -> int:
    reg = presets.registry()
    if args.name not in reg or args.name == "rotation":
        raise UsageError(f"unknown example {args.name!r}")
    outdir = Path(args.outdir or f"reproduce-{args.name}")
    outdir.mkdir(parents=True, exist_ok=True)
    seed = seed_from_env()
    system = reg[args.name].system()
    _write(str(outdir / "system.json"), dumps(system_to_json(system)))
    if args.name == "flower":
        profile, expected = _reproduce_flower(outdir, seed)
    elif args.name == "circle":
        profile, expected = _reproduce_circle(outdir, seed)
    else:
        profile, expected = _reproduce_clegg(args.name, outdir, seed)
    match = all(profile.get(k) == v for k, v in expected.items())
    _write(str(outdir / "profile.json"), dumps({"name": args.name, "profile": profile,
                                                "expected": expected, "match": match}))
    print(dumps({"profile": profile, "match": match}))
    return EXIT_OK if match else EXIT_FAIL


# -- entry point ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hylyap", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="simulate a hybrid system and write a trajectory CSV")
    s.add_argument("--system", required=True)
    s.add_argument("--x0", required=True, help='initial state, e.g. "-2,0.5"')
    s.add_argument("--tmax", type=float, default=10.0)
    s.add_argument("--jmax", type=int, default=100)
    s.add_argument("--dt", type=float, default=1e-3)
    s.add_argument("--priority", choices=("jump", "flow"), default="jump")
    s.add_argument("--out")
    s.add_argument("--lyapunov")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("certify", help="run Lyapunov condition checks and write a JSON report")
    c.add_argument("--system", required=True)
    c.add_argument("--lyapunov")
    c.add_argument("--grid", type=int, default=cert.GRID_N)
    c.add_argument("--report")
    c.add_argument("--checks", default="bounds,flow,jump")
    c.add_argument("--points", help="line-x1=0 | line-x1=x2 | boundary | 'a,b;c,d' | file")
    c.add_argument("--rho", default="1e-6,2", help="decrease rate c,p for rho(s) = c*s**p")
    c.add_argument("--alpha1", help="lower bound c,p")
    c.add_argument("--alpha2", help="upper bound c,p")
    c.set_defaults(func=cmd_certify)

    lv = sub.add_parser("levelset", help="draw level sets of a Lyapunov function as SVG")
    lv.add_argument("--lyapunov", required=True)
    lv.add_argument("--levels", default="1")
    lv.add_argument("--bbox", default="-3,-3,3,3")
    lv.add_argument("--res", type=int, default=400)
    lv.add_argument("--out")
    lv.add_argument("--overlay")
    lv.set_defaults(func=cmd_levelset)

    r = sub.add_parser("reproduce", help="run a built-in example end to end")
    r.add_argument("name")
    r.add_argument("--outdir")
    r.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as e:
        print(f"domain error: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    except NumericError as e:
        print(f"numeric error: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
