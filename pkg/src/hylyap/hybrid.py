"""Hybrid systems (C, D, F, G), an event-locating simulator and arc monitoring."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, NumericError, UsageError
from .geometry import ORIGIN, ZERO_RATE, CircleArc, Monomial, Region, SetDistance, as_vec
from .setvalued import Filippov2, GrazingError, sliding_resolve

SIM_SLACK = 1e-7

# per-sample flow mode labels
SMOOTH, MODE1, MODE2, SLIDING = 0, 1, 2, 3


@dataclass(frozen=True, eq=False)
class LinearJump:
    A: np.ndarray

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise UsageError("jump matrix must be square")
        A.flags.writeable = False
        object.__setattr__(self, "A", A)

    n = property(lambda self: self.A.shape[0])

    def __call__(self, x):
        return np.asarray(x, dtype=float) @ self.A.T


@dataclass(frozen=True)
class IdentityJump:
    n: int

    def __call__(self, x):
        return np.array(x, dtype=float)


@dataclass(frozen=True, eq=False)
class HybridSystem:
    C: Region
    F: object
    D: Region | None = None
    G: object = None
    name: str = ""

    def __post_init__(self):
        n = self.F.n
        for r in (self.C, self.D):
            if r is not None and r.n not in (None, n):
                raise UsageError("region dimension does not match the flow map")
        if self.D is not None and self.G is None:
            raise UsageError("a jump set needs a jump map")
        if self.G is not None and self.G.n != n:
            raise UsageError("jump map dimension does not match the flow map")

    @property
    def n(self) -> int:
        return self.F.n

    @property
    def homogeneous(self) -> bool:
        regions_ok = all(
            r is None or (r.conic and len(r.constraints) <= 1) for r in (self.C, self.D)
        )
        jump_ok = self.G is None or isinstance(self.G, (LinearJump, IdentityJump))
        return regions_ok and jump_ok and self.F.homogeneous

    def in_C(self, x, slack=SIM_SLACK) -> bool:
        return bool(self.C.member(x, slack=slack))

    def in_D(self, x, slack=SIM_SLACK) -> bool:
        return self.D is not None and bool(self.D.member(x, slack=slack))


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-3
    t_max: float = 10.0
    j_max: int = 100
    priority: str = "jump"
    event_tol: float = 1e-10
    blow_up_radius: float = 1e6
    manifold_projection: CircleArc | Callable | None = None
    slack: float = SIM_SLACK

    def __post_init__(self):
        if not self.dt > 0 or not self.t_max > 0:
            raise UsageError("dt and t_max must be positive")
        if self.priority not in ("jump", "flow"):
            raise UsageError("priority must be 'jump' or 'flow'")
        if self.j_max < 0:
            raise UsageError("j_max must be non-negative")


@dataclass
class FlowSegment:
    j: int
    t: np.ndarray
    x: np.ndarray
    mode: np.ndarray

    @property
    def t_start(self) -> float:
        return float(self.t[0])

    @property
    def t_end(self) -> float:
        return float(self.t[-1])


@dataclass(frozen=True)
class JumpEvent:
    t: float
    j: int
    x_before: np.ndarray
    x_after: np.ndarray


@dataclass
class HybridArc:
    segments: list
    jumps: list
    termination: str

    @property
    def final_state(self) -> np.ndarray:
        return self.segments[-1].x[-1]

    @property
    def final_time(self) -> float:
        return self.segments[-1].t_end

    def samples(self):
        """All (t, j, x) rows in order; a jump shows up as two rows at one t."""
        for seg in self.segments:
            for t, x in zip(seg.t, seg.x):
                yield float(t), seg.j, x

    def to_csv(self, V=None) -> str:
        n = self.segments[0].x.shape[1]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        head = ["t", "j"] + [f"x{i + 1}" for i in range(n)] + (["V"] if V is not None else [])
        w.writerow(head)
        rows = list(self.samples())
        vals = values_along(self, V) if V is not None else None
        for k, (t, j, x) in enumerate(rows):
            row = [repr(t), str(j)] + [repr(float(v)) for v in x]
            if vals is not None:
                row.append(repr(float(vals[k])))
            w.writerow(row)
        return buf.getvalue()


def read_trajectory_csv(text: str):
    rows = list(csv.reader(io.StringIO(text)))
    head = rows[0]
    data = np.array([[float(v) for v in r] for r in rows[1:]]).reshape(-1, len(head))
    return head, data


# -- integration -----------------------------------------------------------

def rk4_step(f, x, h):
    k1 = f(x)
    k2 = f(x + 0.5 * h * k1)
    k3 = f(x + 0.5 * h * k2)
    k4 = f(x + h * k3)
    return x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _sliding_field(F: Filippov2, x):
    n = 2.0 * F.Q @ x
    f1, f2 = F.modes(x)
    a, b = float(n @ f1), float(n @ f2)
    if b == a:
        return f1
    lam = min(1.0, max(0.0, b / (b - a)))
    return lam * f1 + (1 - lam) * f2


def _projector(p):
    if p is None:
        return lambda x: x
    if isinstance(p, CircleArc):
        return p.project
    return p


class _Flow:
    """Mode bookkeeping for one hybrid system during simulation."""

    def __init__(self, sys: HybridSystem, cfg: SimConfig):
        self.sys = sys
        self.cfg = cfg
        self.F = sys.F
        self.filippov = isinstance(sys.F, Filippov2)
        # a curve declared on C is used unless the config names its own projection
        proj = cfg.manifold_projection if cfg.manifold_projection is not None else sys.C.curve
        self.project_manifold = _projector(proj)

    def field(self, mode):
        F = self.F
        if mode == MODE1:
            return lambda x: F.A1 @ x
        if mode == MODE2:
            return lambda x: F.A2 @ x
        if mode == SLIDING:
            return lambda x: _sliding_field(F, x)
        return lambda x: np.asarray(F(x), dtype=float)

    def post(self, x, mode):
        if mode == SLIDING:
            x = self.F.project(x)
        return self.project_manifold(x)

    def initial_mode(self, x):
        if not self.filippov:
            return SMOOTH
        if not x.any():
            return MODE1
        if self.F.on_locus(x):
            return self.resolve(x)
        return MODE1 if self.F.switching(x) > 0 else MODE2

    def resolve(self, x):
        """Mode to use at a locus point."""
        info = sliding_resolve(self.F, x)
        if info.kind == "attractive":
            return SLIDING
        if info.kind == "repulsive":
            return MODE1
        return MODE1 if info.lam == 1.0 else MODE2

    def crossed(self, x, mode):
        """True when ``x`` has left C, or a mode's side of the locus."""
        if not self.sys.in_C(x, self.cfg.slack):
            return True
        if mode in (MODE1, MODE2) and x.any() and not self.F.on_locus(x):
            s = self.F.switching(x)
            return (s < 0) if mode == MODE1 else (s > 0)
        return False

    def mode_after_step(self, x, mode):
        if mode != SLIDING:
            return mode
        if not x.any():
            return SLIDING
        try:
            return self.resolve(x)
        except GrazingError:
            return SLIDING


def simulate(sys: HybridSystem, x0, cfg: SimConfig | None = None) -> HybridArc:
    cfg = cfg or SimConfig()
    x = as_vec(x0, sys.n).copy()
    if not (sys.in_C(x, cfg.slack) or sys.in_D(x, cfg.slack)):
        raise DomainError(f"initial state {x.tolist()} is outside C ∪ D", x)
    fl = _Flow(sys, cfg)
    t, j = 0.0, 0
    segments, jumps = [], []
    ts, xs, ms = [t], [x.copy()], []
    mode = fl.initial_mode(x) if sys.in_C(x, cfg.slack) else SMOOTH
    ms.append(mode)
    termination = "horizon"

    def close():
        segments.append(FlowSegment(j, np.array(ts), np.array(xs), np.array(ms, dtype=int)))

    def do_jump(xb):
        nonlocal x, j, ts, xs, ms, mode
        close()
        xa = np.asarray(sys.G(xb), dtype=float)
        jumps.append(JumpEvent(t, j, xb.copy(), xa.copy()))
        j += 1
        x = xa
        mode = fl.initial_mode(x) if sys.in_C(x, cfg.slack) else SMOOTH
        ts, xs, ms = [t], [x.copy()], [mode]

    while True:
        r = float(np.linalg.norm(x))
        if r > cfg.blow_up_radius:
            termination = "sliding_escape" if mode == SLIDING else "blow_up"
            break
        if t >= cfg.t_max * (1 - 1e-15):
            termination = "horizon"
            break
        inC = sys.in_C(x, cfg.slack)
        inD = sys.in_D(x, cfg.slack)
        if inD and (cfg.priority == "jump" or not inC):
            if j >= cfg.j_max:
                termination = "max_jumps"
                break
            do_jump(x)
            continue
        if not inC:
            termination = "left_C_and_D"
            break

        h = min(cfg.dt, cfg.t_max - t)
        f = fl.field(mode)
        with np.errstate(over="ignore", invalid="ignore"):
            x_new = fl.post(rk4_step(f, x, h), mode)
        if not np.all(np.isfinite(x_new)):
            close()
            raise NumericError(f"non-finite state at t={t}", x.copy(), t, j)
        if not fl.crossed(x_new, mode):
            t = t + h
            x = x_new
            mode = fl.mode_after_step(x, mode)
            ts.append(t)
            xs.append(x.copy())
            ms.append(mode)
            continue

        # locate the event by bisection on the step fraction
        lo, hi = 0.0, 1.0
        x_lo, x_hi = x, x_new
        while (hi - lo) * h > cfg.event_tol:
            mid = 0.5 * (lo + hi)
            xm = fl.post(rk4_step(f, x, mid * h), mode)
            if fl.crossed(xm, mode):
                hi, x_hi = mid, xm
            else:
                lo, x_lo = mid, xm
        t_ev = t + lo * h
        if lo > 0:
            t, x = t_ev, x_lo
            ts.append(t)
            xs.append(x.copy())
            ms.append(mode)

        if not sys.in_C(x_hi, cfg.slack):
            # leaving the flow set: jump if allowed, otherwise stop
            if sys.in_D(x, cfg.slack) or sys.in_D(x_hi, cfg.slack):
                if j >= cfg.j_max:
                    termination = "max_jumps"
                    break
                xb = x if sys.in_D(x, cfg.slack) else x_hi
                do_jump(xb)
                continue
            termination = "left_C_and_D"
            break

        # reached the Filippov locus
        xl = fl.F.project(x_hi if lo == 0 else x)
        t = t + (hi - lo) * h if lo == 0 else t
        x = xl
        mode = fl.resolve(x)
        ts.append(t)
        xs.append(x.copy())
        ms.append(mode)

    close()
    return HybridArc(segments, jumps, termination)


# -- monitoring ------------------------------------------------------------

@dataclass
class MonitorReport:
    flow_margins: list = field(default_factory=list)
    jump_margins: list = field(default_factory=list)
    worst: dict = field(default_factory=dict)
    tol: float = 1e-6
    sliding_margins: list = field(default_factory=list)

    @property
    def worst_margin(self) -> float:
        vals = [m for m in self.flow_margins + self.jump_margins if m is not None]
        return max(vals) if vals else float("-inf")

    @property
    def passed(self) -> bool:
        return self.worst_margin <= self.tol

    def __bool__(self):
        return self.passed

    def to_dict(self):
        from .report import _plain

        return _plain({
            "check": "monitor",
            "pass": self.passed,
            "worst_margin": self.worst_margin,
            "flow_margins": [m if m is not None else "none" for m in self.flow_margins],
            "jump_margins": self.jump_margins,
            "sliding_margins": self.sliding_margins,
            "worst": self.worst,
            "tol": self.tol,
        })


def _distinct_times(t, min_gap=1e-9):
    keep = [0]
    for k in range(1, len(t)):
        if t[k] - t[keep[-1]] > min_gap:
            keep.append(k)
    if keep[-1] != len(t) - 1:
        keep[-1] = len(t) - 1
    return np.array(keep)


def monitor(arc: HybridArc, V, rho: Monomial = ZERO_RATE, dist: SetDistance = ORIGIN,
            tol: float = 1e-6) -> MonitorReport:
    """Worst decrease margins of ``V`` along the flows and jumps of ``arc``.

    Flow margin: dV/dt + ρ(|x|) from finite differences of the sampled
    values. Jump margin: V(x⁺) − V(x) + ρ(|x|).
    """
    if not arc.segments:
        raise UsageError("empty arc")

    def value(x):
        try:
            return float(V(x))
        except DomainError as e:
            raise DomainError(f"V undefined at sampled state {np.asarray(x).tolist()}", x) from e

    def values(X):
        try:
            return np.asarray(V(X), dtype=float).reshape(len(X))
        except DomainError:
            return np.array([value(x) for x in X])

    rep = MonitorReport(tol=tol)
    worst = -np.inf
    for seg in arc.segments:
        if len(seg.t) < 2:
            rep.flow_margins.append(None)
            rep.sliding_margins.append(None)
            continue
        keep = _distinct_times(seg.t)
        if len(keep) < 2:
            rep.flow_margins.append(None)
            rep.sliding_margins.append(None)
            continue
        tt, xx = seg.t[keep], seg.x[keep]
        vv = values(xx)
        dv = np.gradient(vv, tt)
        m = dv + rho(dist(xx))
        k = int(np.argmax(m))
        rep.flow_margins.append(float(m[k]))
        sl = seg.mode[keep] == SLIDING
        rep.sliding_margins.append(float(m[sl].max()) if sl.any() else None)
        if m[k] > worst:
            worst = m[k]
            rep.worst = {"kind": "flow", "t": float(tt[k]), "j": seg.j, "x": xx[k].tolist(), "margin": float(m[k])}
    for ev in arc.jumps:
        m = value(ev.x_after) - value(ev.x_before) + float(rho(dist(ev.x_before)))
        rep.jump_margins.append(m)
        if m > worst:
            worst = m
            rep.worst = {"kind": "jump", "t": ev.t, "j": ev.j, "x": ev.x_before.tolist(), "margin": m}
    return rep


def values_along(arc: HybridArc, V) -> np.ndarray:
    X = np.array([x for _, _, x in arc.samples()])
    try:
        return np.asarray(V(X), dtype=float).reshape(len(X))
    except DomainError:
        # a point off V's domain; fall back so the error names that point
        return np.array([float(V(x)) for x in X])
