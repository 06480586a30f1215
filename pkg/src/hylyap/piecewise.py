"""Piecewise Lyapunov candidates.

Two representations live here. A :class:`LatticeExpr` is a max/min/mid
tree over smooth leaves and is evaluated directly. A
:class:`ProperPiecewiseFn` is the flat list of ``(region, piece)`` pairs
the certification routines work on; :func:`flatten` turns the former into
the latter by iterated pairwise comparison of leaves.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import DomainError, InconsistencyError, UnsupportedExpressionError, UsageError
from .geometry import (
    MEMBER_SLACK,
    QuadConstraint,
    QuadraticForm,
    Region,
    as_vec,
    conic,
)
from .report import CheckReport

CONTINUITY_TOL = 1e-9
DEFAULT_SAMPLES = 512


# -- smooth pieces ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Quadratic:
    form: QuadraticForm

    def __init__(self, P):
        object.__setattr__(self, "form", P if isinstance(P, QuadraticForm) else QuadraticForm(P))

    n = property(lambda self: self.form.n)
    homogeneous = True

    @property
    def matrix(self):
        return self.form.S

    def value(self, x):
        return self.form.value(x)

    def grad(self, x):
        return self.form.grad(x)

    def __neg__(self):
        return Quadratic(-self.form.S)


@dataclass(frozen=True, eq=False)
class SquaredLinear:
    """x ↦ ⟨w, x⟩²."""

    w: np.ndarray

    def __init__(self, w):
        w = as_vec(w).copy()
        w.flags.writeable = False
        object.__setattr__(self, "w", w)

    n = property(lambda self: self.w.size)
    homogeneous = True

    @property
    def matrix(self):
        return np.outer(self.w, self.w)

    def value(self, x):
        return (np.asarray(x, dtype=float) @ self.w) ** 2

    def grad(self, x):
        s = np.asarray(x, dtype=float) @ self.w
        return 2.0 * np.multiply.outer(s, self.w)

    def __neg__(self):
        return Quadratic(-self.matrix)


@dataclass(frozen=True, eq=False)
class Affine:
    """x ↦ ⟨a, x⟩ + b."""

    a: np.ndarray
    b: float = 0.0

    def __init__(self, a, b=0.0):
        a = as_vec(a).copy()
        a.flags.writeable = False
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", float(b))

    n = property(lambda self: self.a.size)
    homogeneous = False

    @property
    def matrix(self):
        raise UnsupportedExpressionError("affine pieces have no quadratic matrix")

    def value(self, x):
        return np.asarray(x, dtype=float) @ self.a + self.b

    def grad(self, x):
        X = np.asarray(x, dtype=float)
        return np.broadcast_to(self.a, X.shape).copy()

    def __neg__(self):
        return Affine(-self.a, -self.b)


SmoothPiece = Quadratic | SquaredLinear | Affine


# -- lattice expressions ---------------------------------------------------

@dataclass(frozen=True)
class Leaf:
    piece: SmoothPiece


@dataclass(frozen=True)
class Max:
    children: tuple

    def __init__(self, *children):
        object.__setattr__(self, "children", tuple(_expr(c) for c in children))
        if not self.children:
            raise UsageError("Max needs at least one argument")


@dataclass(frozen=True)
class Min:
    children: tuple

    def __init__(self, *children):
        object.__setattr__(self, "children", tuple(_expr(c) for c in children))
        if not self.children:
            raise UsageError("Min needs at least one argument")


@dataclass(frozen=True)
class Mid:
    a: object
    b: object
    c: object

    def __init__(self, a, b, c):
        object.__setattr__(self, "a", _expr(a))
        object.__setattr__(self, "b", _expr(b))
        object.__setattr__(self, "c", _expr(c))

    def expand(self):
        a, b, c = self.a, self.b, self.c
        return Max(Min(a, b), Min(b, c), Min(a, c))


LatticeExpr = Leaf | Max | Min | Mid


def _expr(e):
    if isinstance(e, (Leaf, Max, Min, Mid)):
        return e
    if isinstance(e, (Quadratic, SquaredLinear, Affine)):
        return Leaf(e)
    if isinstance(e, QuadraticForm):
        return Leaf(Quadratic(e))
    return Leaf(Quadratic(np.asarray(e, dtype=float)))


def leaves(e) -> list:
    if isinstance(e, Leaf):
        return [e.piece]
    if isinstance(e, Mid):
        return leaves(e.a) + leaves(e.b) + leaves(e.c)
    return [p for c in e.children for p in leaves(c)]


def lattice_eval(e, x):
    X = np.asarray(x, dtype=float)
    if isinstance(e, Leaf):
        return e.piece.value(X)
    if isinstance(e, Mid):
        return lattice_eval(e.expand(), X)
    vals = [lattice_eval(c, X) for c in e.children]
    op = np.maximum if isinstance(e, Max) else np.minimum
    return op.reduce(vals) if len(vals) > 1 else vals[0]


def negate(e):
    """Expression for −e (max and min swap)."""
    if isinstance(e, Leaf):
        return Leaf(-e.piece)
    if isinstance(e, Mid):
        return Mid(negate(e.a), negate(e.b), negate(e.c))
    if isinstance(e, Max):
        return Min(*[negate(c) for c in e.children])
    return Max(*[negate(c) for c in e.children])


# -- proper piecewise functions --------------------------------------------

@dataclass(frozen=True)
class ProperPiecewiseFn:
    """Finite list of ``(region, piece)`` pairs; V(x) = piece_i(x) on region_i."""

    pieces: tuple
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple((r, p) for r, p in self.pieces))
        if not self.pieces:
            raise UsageError("a piecewise function needs at least one piece")
        dims = {p.n for _, p in self.pieces} | {r.n for r, _ in self.pieces if r.n is not None}
        if len(dims) != 1:
            raise UsageError(f"pieces and regions of mixed dimension {sorted(dims)}")

    @property
    def n(self) -> int:
        return self.pieces[0][1].n

    def __len__(self):
        return len(self.pieces)

    @property
    def regions(self):
        return [r for r, _ in self.pieces]

    @property
    def homogeneous(self) -> bool:
        return all(p.homogeneous and r.conic for r, p in self.pieces)

    def piece_values(self, x):
        X = np.asarray(x, dtype=float)
        return np.stack([p.value(X) for _, p in self.pieces], axis=-1)

    def memberships(self, x, strict=False, slack=MEMBER_SLACK):
        X = np.asarray(x, dtype=float)
        return np.stack([np.asarray(r.member(X, strict=strict, slack=slack)) for r, _ in self.pieces], axis=-1)

    def evaluate(self, x, slack=MEMBER_SLACK):
        """Values and chosen piece indices for one point or a batch."""
        X = np.asarray(x, dtype=float)
        if X.shape[-1] != self.n:
            raise UsageError(f"dimension mismatch: expected {self.n}, got {X.shape[-1]}")
        mem = self.memberships(X, slack=slack)
        has = mem.any(axis=-1)
        if not np.all(has):
            bad = X if X.ndim == 1 else X[np.flatnonzero(~has)[0]]
            raise DomainError(f"point {bad.tolist()} lies outside every region", bad)
        idx = np.argmax(mem, axis=-1)
        vals = np.take_along_axis(self.piece_values(X), np.asarray(idx)[..., None], axis=-1)[..., 0]
        return vals, idx

    def __call__(self, x):
        return self.evaluate(x)[0]

    def grad_piece(self, i, x):
        return self.pieces[i][1].grad(np.asarray(x, dtype=float))

    def restrict(self, region: Region) -> "ProperPiecewiseFn":
        return ProperPiecewiseFn([(r & region, p) for r, p in self.pieces], self.name)

    def __add__(self, other: "ProperPiecewiseFn") -> "ProperPiecewiseFn":
        return ProperPiecewiseFn(self.pieces + other.pieces, self.name or other.name)

    def __neg__(self):
        return ProperPiecewiseFn([(r, -p) for r, p in self.pieces], self.name)

    def checked(self, tol: float = CONTINUITY_TOL, points=None) -> "ProperPiecewiseFn":
        """Return self after verifying continuity across region boundaries.

        Boundary points are generated automatically for planar conic
        functions; otherwise ``points`` must be supplied.
        """
        from .errors import ContinuityError

        if points is None:
            points = boundary_points(self)
        rep = continuity_check(self, points, tol)
        if not rep.passed:
            raise ContinuityError(f"piece values disagree on region overlaps ({rep.n_violations} points)", rep)
        return self


def eval(f, x):
    """Evaluate ``f`` at a single point; returns ``(value, index)``.

    For a lattice expression the index is None.
    """
    x = as_vec(x)
    if isinstance(f, ProperPiecewiseFn):
        v, i = f.evaluate(x)
        return float(v), int(i)
    return float(lattice_eval(f, x)), None


# -- flattening ------------------------------------------------------------

def _same(a: QuadConstraint, b: QuadConstraint) -> bool:
    return a.sense == b.sense and a.conic and b.conic and np.array_equal(a.R, b.R)


def _opposite(a: QuadConstraint, b: QuadConstraint) -> bool:
    return a.sense == b.sense == "geq" and a.conic and b.conic and np.array_equal(a.R, -b.R)


def _join(r1: Region, r2: Region, extra: QuadConstraint | None):
    cons = list(r1.constraints)
    for c in list(r2.constraints) + ([extra] if extra is not None else []):
        if not any(_same(c, d) for d in cons):
            cons.append(c)
    # {D >= 0} and {-D >= 0} with D != 0 is a null set, never regular-closed
    for i, a in enumerate(cons):
        for b in cons[i + 1:]:
            if _opposite(a, b):
                return None
    return Region(tuple(cons))


def _combine(f: ProperPiecewiseFn, g: ProperPiecewiseFn, take_max: bool) -> ProperPiecewiseFn:
    out = []
    for ra, pa in f.pieces:
        for rb, pb in g.pieces:
            D = pa.matrix - pb.matrix
            if not take_max:
                D = -D
            if not D.any():
                # identical pieces: no separating constraint
                for p in (pa, pb):
                    r = _join(ra, rb, None)
                    if r is not None:
                        out.append((r, p))
                continue
            for sgn, p in ((1.0, pa), (-1.0, pb)):
                r = _join(ra, rb, conic(sgn * D))
                if r is not None:
                    out.append((r, p))
    return ProperPiecewiseFn(out)


def flatten(expr, name: str = "") -> ProperPiecewiseFn:
    """Compile a quadratic max/min/mid expression into proper piecewise form.

    Regions are conjunctions of difference-form constraints
    ``xᵀ(P_a − P_b)x >= 0``, so the result is homogeneous of degree two.
    """
    expr = _expr(expr)
    if isinstance(expr, Leaf):
        if isinstance(expr.piece, Affine):
            raise UnsupportedExpressionError("affine leaf in a homogeneous flatten")
        return ProperPiecewiseFn([(Region(), expr.piece)], name)
    if isinstance(expr, Mid):
        return flatten(expr.expand(), name)
    parts = [flatten(c) for c in expr.children]
    acc = parts[0]
    for nxt in parts[1:]:
        acc = _combine(acc, nxt, isinstance(expr, Max))
    return ProperPiecewiseFn(acc.pieces, name)


# -- active sets and Clarke gradients -------------------------------------

def active_indices(f: ProperPiecewiseFn, x, tol: float = CONTINUITY_TOL) -> list[int]:
    x = as_vec(x, f.n)
    V, _ = f.evaluate(x, slack=tol)
    mem = f.memberships(x, slack=tol)
    vals = f.piece_values(x)
    ok = mem & (np.abs(vals - V) <= tol * (1 + abs(V)))
    out = [int(i) for i in np.flatnonzero(ok)]
    if not out:
        raise InconsistencyError(f"no active piece at {x.tolist()}")
    return out


def _ball(x, radius, samples, seed):
    rng = np.random.default_rng(seed)
    n = x.size
    d = rng.standard_normal((samples, n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = radius * rng.random(samples) ** (1.0 / n)
    return x + d * r[:, None]


def default_radius(x) -> float:
    return 1e-4 * (1 + float(np.linalg.norm(x)))


def essentially_active(f: ProperPiecewiseFn, x, radius: float | None = None,
                       samples: int = DEFAULT_SAMPLES, seed: int = 0) -> list[int]:
    """Pieces whose region has interior accumulating at ``x`` (sampled).

    A piece counts when some seeded sample of the ball B(x, radius) lies
    strictly inside its region; the result is intersected with the active
    set at ``x`` itself.
    """
    if samples < 100:
        raise UsageError("essentially_active needs at least 100 samples")
    x = as_vec(x, f.n)
    radius = default_radius(x) if radius is None else radius
    Y = _ball(x, radius, samples, seed)
    inside = f.memberships(Y, strict=True).any(axis=0)
    active = set(active_indices(f, x))
    return [i for i in np.flatnonzero(inside).tolist() if i in active]


@dataclass(frozen=True)
class GradientPolytope:
    """Convex hull of ``vertices``; the Clarke gradient at ``x``."""

    x: np.ndarray
    vertices: np.ndarray
    indices: tuple

    def support(self, direction) -> float:
        """max over the hull of ⟨v, direction⟩ (attained at a vertex)."""
        return float(np.max(self.vertices @ np.asarray(direction, dtype=float)))

    def __len__(self):
        return len(self.vertices)


def dedupe_rows(A, tol=1e-12):
    keep = []
    for row in np.asarray(A, dtype=float):
        if not any(np.abs(row - k).max() <= tol * (1 + np.abs(k).max()) for k in keep):
            keep.append(row)
    return np.array(keep).reshape(len(keep), np.asarray(A).shape[-1])


def clarke_polytope(f: ProperPiecewiseFn, x, radius: float | None = None,
                    samples: int = DEFAULT_SAMPLES, seed: int = 0) -> GradientPolytope:
    x = as_vec(x, f.n)
    idx = essentially_active(f, x, radius, samples, seed)
    G = np.array([f.grad_piece(i, x) for i in idx]).reshape(len(idx), f.n)
    return GradientPolytope(x, dedupe_rows(G), tuple(idx))


# -- continuity -----------------------------------------------------------

def conic_zero_angles(R) -> list[float]:
    """Angles θ in [0, π) where u(θ)ᵀRu(θ) = 0 for a 2×2 symmetric R."""
    R = np.asarray(R, dtype=float)
    # uᵀRu = A cos2θ + B sin2θ + C
    A = 0.5 * (R[0, 0] - R[1, 1])
    B = R[0, 1]
    C = 0.5 * (R[0, 0] + R[1, 1])
    amp = np.hypot(A, B)
    if amp == 0 or abs(C) > amp * (1 + 1e-12):
        return []
    phi = np.arctan2(B, A)
    a = np.arccos(np.clip(-C / amp, -1.0, 1.0))
    out = sorted({float(np.mod((phi + s * a) / 2, np.pi)) for s in (1, -1)})
    return out


def boundary_rays(f: ProperPiecewiseFn) -> np.ndarray:
    """Unit directions (both orientations) of every conic boundary of a planar function."""
    if f.n != 2 or not all(r.conic for r in f.regions):
        raise UsageError("automatic boundary sampling needs a planar conic function")
    angles = set()
    for r in f.regions:
        for c in r.constraints:
            for th in conic_zero_angles(c.R):
                angles.add(round(th, 14))
                angles.add(round(th + np.pi, 14))
    th = np.array(sorted(angles))
    return np.stack([np.cos(th), np.sin(th)], axis=1) if th.size else np.zeros((0, 2))


def boundary_points(f: ProperPiecewiseFn, count: int = 360, rmax: float = 10.0) -> np.ndarray:
    rays = boundary_rays(f)
    if len(rays) == 0:
        return np.zeros((0, f.n))
    per = max(1, int(np.ceil(count / len(rays))))
    radii = np.linspace(rmax / per, rmax, per)
    return (rays[:, None, :] * radii[None, :, None]).reshape(-1, 2)


def continuity_check(f: ProperPiecewiseFn, points: Iterable, tol: float = CONTINUITY_TOL) -> CheckReport:
    """Report points where two regions both contain x but their pieces disagree."""
    X = np.asarray(list(points) if not isinstance(points, np.ndarray) else points, dtype=float)
    X = X.reshape(-1, f.n)
    params = {"tol": tol, "points": int(len(X))}
    if len(X) == 0 or len(f) == 1:
        return CheckReport("continuity", float("-inf"), [], params)
    mem = f.memberships(X, slack=tol)
    vals = f.piece_values(X)
    found = []
    worst = float("-inf")
    for k in range(len(X)):
        idx = np.flatnonzero(mem[k])
        if idx.size < 2:
            continue
        v = vals[k, idx]
        gap = float(v.max() - v.min())
        allowed = tol * (1 + float(np.abs(v).max()))
        worst = max(worst, gap - allowed)
        if gap > allowed:
            lo = float(v.min())
            found.append({
                "x": X[k].tolist(),
                "pieces": idx.tolist(),
                "values": v.tolist(),
                "value": gap,
                "ratio": float(v.max() / lo) if lo != 0 else float("inf"),
            })
    found.sort(key=lambda c: -c["value"])
    return CheckReport("continuity", worst, found[:50], params, len(found))
