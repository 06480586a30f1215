"""Grid-based certification of Lyapunov conditions.

Every strict inequality becomes a margin test: hypotheses must exceed a
slack ``delta_h`` and conclusions must hold with margin ``delta_c``, both
measured on unit-sphere-normalized quantities. Reports echo these values.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import HypothesisError, UsageError
from .geometry import (
    ORIGIN,
    ZERO_RATE,
    CircleArc,
    Monomial,
    Region,
    SetDistance,
    conic,
    eigen_extremes,
    sym_matrix,
    sym_part,
    unit_circle,
)
from .piecewise import ProperPiecewiseFn, clarke_polytope, conic_zero_angles
from .report import CheckReport, collect
from .setvalued import Filippov2, LOCUS_TOL

DELTA_H = 1e-6
DELTA_C = 1e-8
DELTA_INT = 1e-9
GRID_N = 3600
EXCLUDE_MARGIN = 1e-6


# -- samplers ---------------------------------------------------------------

@dataclass(frozen=True)
class UnitCircleGrid:
    N: int = GRID_N
    exclude: tuple = ()
    margin: float = EXCLUDE_MARGIN

    def points(self):
        return unit_circle(self.N, self.exclude, self.margin)[0]

    def params(self):
        return {"sampler": "unit_circle", "N": self.N, "excluded_angles": list(self.exclude),
                "exclude_margin": self.margin}


@dataclass(frozen=True)
class CurveGrid:
    curve: CircleArc
    N: int = 10_000
    exclude: tuple = ()
    margin: float = EXCLUDE_MARGIN

    def points(self):
        th = np.linspace(self.curve.theta0, self.curve.theta1, self.N)
        keep = np.ones(th.size, dtype=bool)
        for a in self.exclude:
            keep &= np.abs(th - a) > self.margin
        return self.curve.point(th[keep])

    def params(self):
        return {"sampler": "curve", "N": self.N, "excluded_params": list(self.exclude),
                "exclude_margin": self.margin}


@dataclass(frozen=True)
class BallGrid:
    center: tuple
    radius: float
    N: int = 101

    def points(self):
        c = np.asarray(self.center, dtype=float)
        axes = [np.linspace(-self.radius, self.radius, self.N)] * c.size
        G = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, c.size)
        G = G[np.linalg.norm(G, axis=1) < self.radius]
        return G + c

    def params(self):
        return {"sampler": "ball", "center": list(self.center), "radius": self.radius, "N": self.N}


@dataclass(frozen=True)
class PointList:
    pts: tuple
    label: str = "points"

    def points(self):
        return np.asarray(self.pts, dtype=float)

    def params(self):
        return {"sampler": self.label, "count": len(self.pts)}


def _points(sampler):
    X = sampler.points() if hasattr(sampler, "points") else np.asarray(sampler, dtype=float)
    params = sampler.params() if hasattr(sampler, "params") else {"sampler": "array", "count": len(X)}
    return np.asarray(X, dtype=float), params


@dataclass(frozen=True)
class BoundsSpec:
    alpha1: Monomial
    alpha2: Monomial

    def __post_init__(self):
        if not (self.alpha1.coeff > 0 and self.alpha2.coeff > 0):
            raise UsageError("class-K∞ bounds need positive coefficients")


# -- bounds ------------------------------------------------------------------

def bounds_check(V, sampler, spec: BoundsSpec | None = None, dist: SetDistance = ORIGIN,
                 margin: float = 1e-9, rel_tol: float = 1e-12) -> CheckReport:
    """Sandwich bounds α₁(|x|) ≤ V(x) ≤ α₂(|x|) on the sampled set.

    Without ``spec``, V must be homogeneous of degree two; λ₁, λ₂ are
    inferred as the extreme values of V on the normalized samples.
    """
    X, params = _points(sampler)
    if len(X) == 0:
        raise UsageError("bounds_check needs a non-empty sampler")
    d = np.asarray(dist(X), dtype=float)
    if spec is None:
        keep = d > 0
        U = X[keep] / d[keep, None]
        vals = np.asarray(V(U), dtype=float)
        lam1, lam2 = float(vals.min()), float(vals.max())
        params = dict(params, mode="infer", margin=margin)
        rep = collect("bounds", margin - vals, U, params, extra=lambda k: {"V": float(vals[k])})
        rep.details = {"lambda1": lam1, "lambda2": lam2}
        return rep
    vals = np.asarray(V(X), dtype=float)
    lo = spec.alpha1(d)
    hi = spec.alpha2(d)
    m = np.maximum(lo - vals, vals - hi)
    params = dict(params, mode="spec", alpha1=[spec.alpha1.coeff, spec.alpha1.power],
                  alpha2=[spec.alpha2.coeff, spec.alpha2.power], rel_tol=rel_tol)
    scale = rel_tol * (1 + np.abs(vals))
    rep = collect("bounds", m - scale, X, params,
                  extra=lambda k: {"V": float(vals[k]), "lower": float(lo[k]), "upper": float(hi[k])})
    # ratios at points numerically on the set carry no information
    far = d > 1e-9 * max(1.0, float(d.max()))
    rep.details = {"min_ratio": float(np.min(vals[far] / d[far])) if far.any() else None,
                   "max_ratio": float(np.max(vals[far] / d[far])) if far.any() else None}
    return rep


# -- decrease on dense sets ----------------------------------------------------

def _interior_of_C(C: Region, X, delta_int):
    if C.curve is not None:
        # measure-zero flow set: relative interior, exceptional points come from the sampler
        return np.asarray(C.member(X), dtype=bool)
    return np.asarray(C.member(X, strict=True, slack=delta_int), dtype=bool) if C.constraints else np.ones(len(X), bool)


def dense_decrease_check(V: ProperPiecewiseFn, F, C: Region, sampler, rho: Monomial = ZERO_RATE,
                         dist: SetDistance = ORIGIN, delta_int: float = DELTA_INT) -> CheckReport:
    """⟨∇V_i(x), f(x)⟩ ≤ −ρ(|x|) at samples in int(X_i) ∩ int(C)."""
    X, params = _points(sampler)
    params = dict(params, delta_int=delta_int, rho=[rho.coeff, rho.power])
    ok = _interior_of_C(C, X, delta_int)
    if isinstance(F, Filippov2):
        s = np.abs(F.switching(X))
        qn = np.abs(np.linalg.eigvalsh(F.Q)).max()
        ok &= s > LOCUS_TOL * qn * np.einsum("ij,ij->i", X, X)
    mem = V.memberships(X, strict=True, slack=delta_int) & ok[:, None]
    tested = mem.any(axis=1)
    fx = np.asarray(F(X), dtype=float)
    r = rho(dist(X))
    margins = np.full(len(X), -np.inf)
    piece = np.full(len(X), -1)
    for i, (_, p) in enumerate(V.pieces):
        sel = mem[:, i]
        if not sel.any():
            continue
        m = np.einsum("ij,ij->i", p.grad(X[sel]), fx[sel]) + r[sel]
        upd = m > margins[sel]
        idx = np.flatnonzero(sel)[upd]
        margins[idx] = m[upd]
        piece[idx] = i
    params["tested"] = int(tested.sum())
    Xt, mt, pt = X[tested], margins[tested], piece[tested]
    return collect("dense_decrease", mt, Xt, params,
                   extra=lambda k: {"piece": int(pt[k]), "f": fx[tested][k].tolist()})


# -- homogeneous hybrid conditions ---------------------------------------------

def _require_pq(V: ProperPiecewiseFn):
    if not V.homogeneous:
        raise UsageError("homogeneous checks need a piecewise quadratic function with conic regions")


def _grid(grid):
    return grid if hasattr(grid, "points") else UnitCircleGrid(int(grid))


def _region_margins(V: ProperPiecewiseFn, X):
    """(m, K) smallest normalized constraint value per piece, scaled by |x|²."""
    r2 = np.einsum("ij,ij->i", X, X)
    out = np.empty((len(X), len(V)))
    for i, (reg, _) in enumerate(V.pieces):
        out[:, i] = reg.margin(X)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(r2[:, None] > 0, out / np.where(r2 > 0, r2, 1)[:, None], 0.0)
    return out


BOUNDARY_OFFSETS = (0.0, 1e-6, -1e-6, 1e-5, -1e-5, 1e-4, -1e-4, 1e-3, -1e-3)


def _boundary_directions(mats) -> np.ndarray:
    """Unit directions on and just beside the zero set of each planar conic.

    The worst margin of a homogeneous check usually sits where a hypothesis
    switches on; a uniform grid reaches it only to O(1/N), these extra
    directions pin it down.
    """
    th = []
    for R in mats:
        for z in conic_zero_angles(R):
            for half in (z, z + np.pi):
                th.extend(half + o for o in BOUNDARY_OFFSETS)
    th = np.array(sorted(th))
    return np.stack([np.cos(th), np.sin(th)], axis=1) if len(th) else np.empty((0, 2))


def _refine(U, params, mats):
    if U.shape[1] != 2:
        return U, params
    B = _boundary_directions(mats)
    return np.vstack([U, B]), dict(params, boundary_directions=len(B))


def _region_mats(V: ProperPiecewiseFn, A=None):
    A = None if A is None else np.asarray(A, dtype=float)
    out = []
    for reg, _ in V.pieces:
        for c in reg.constraints:
            out.append(c.R if A is None else A.T @ c.R @ A)
    return out


def homogeneous_flow_check(V: ProperPiecewiseFn, A_F, Q_F, grid=GRID_N,
                           delta_h: float = DELTA_H, delta_c: float = DELTA_C,
                           refine: bool = True) -> CheckReport:
    """xᵀQ_F x > 0 ∧ xᵀR_i x > 0 ⇒ xᵀP_iA_F x < 0, on unit directions.

    Margins are reported as the directional derivative 2xᵀP_iA_F x + δ_c.
    """
    _require_pq(V)
    Q_F = sym_matrix(Q_F)
    if eigen_extremes(Q_F)[1] <= 0:
        raise HypothesisError("Q_F is negative semi-definite; the flow set has empty interior")
    A_F = np.asarray(A_F, dtype=float)
    g = _grid(grid)
    U, params = _points(g)
    if refine:
        U, params = _refine(U, params, [Q_F] + _region_mats(V))
    params = dict(params, delta_h=delta_h, delta_c=delta_c)
    hq = conic(Q_F).normalized(U) > delta_h
    reg = _region_margins(V, U) > delta_h
    hyp = hq[:, None] & reg
    vals = np.stack([np.einsum("ij,jk,ik->i", U, sym_part(p.matrix @ A_F), U) for _, p in V.pieces], 1)
    m = np.where(hyp, vals + delta_c, -np.inf)
    worst = m.max(axis=1)
    arg = m.argmax(axis=1)
    sel = np.isfinite(worst)
    params["tested"] = int(sel.sum())
    Us, ws, ar = U[sel], worst[sel], arg[sel]
    return collect("homogeneous_flow", ws, Us,
                   params, extra=lambda k: {"piece": int(ar[k]), "dVdt": float(ws[k] - delta_c)})


def homogeneous_jump_check(V: ProperPiecewiseFn, A_J, Q_J, grid=GRID_N,
                           delta_h: float = DELTA_H, delta_c: float = DELTA_C,
                           refine: bool = True) -> CheckReport:
    """xᵀQ_J x ≥ 0 ∧ xᵀR_j x ≥ 0 ∧ (A_J x)ᵀR_i(A_J x) ≥ 0 ⇒ V_i(A_J x) − V_j(x) < 0."""
    _require_pq(V)
    Q_J = sym_matrix(Q_J)
    A_J = np.asarray(A_J, dtype=float)
    g = _grid(grid)
    U, params = _points(g)
    if refine:
        U, params = _refine(U, params, [Q_J] + _region_mats(V) + _region_mats(V, A_J))
    params = dict(params, delta_h=delta_h, delta_c=delta_c)
    Y = U @ A_J.T
    hq = conic(Q_J).normalized(U) >= -delta_h
    hj = _region_margins(V, U) >= -delta_h
    hi = _region_margins(V, Y) >= -delta_h
    vj = np.stack([p.value(U) for _, p in V.pieces], 1)
    vi = np.stack([p.value(Y) for _, p in V.pieces], 1)
    hyp = hq[:, None, None] & hj[:, :, None] & hi[:, None, :]
    m = np.where(hyp, vi[:, None, :] - vj[:, :, None] + delta_c, -np.inf)
    K = len(V)
    flat = m.reshape(len(U), K * K)
    worst = flat.max(axis=1)
    arg = flat.argmax(axis=1)
    sel = np.isfinite(worst)
    params["tested"] = int(sel.sum())
    Us, ws, ar = U[sel], worst[sel], arg[sel]
    return collect("homogeneous_jump", ws, Us, params,
                   extra=lambda k: {"piece": [int(ar[k] // K), int(ar[k] % K)],
                                    "difference": float(ws[k] - delta_c)})


def homogeneous_bound_samples(A_J, Q_F, Q_J, N: int = GRID_N):
    """Unit directions covering C ∪ D ∪ A_J(D) for a homogeneous system."""
    U, _ = unit_circle(N)
    inC = np.asarray(conic(Q_F).holds(U), bool)
    inD = np.asarray(conic(Q_J).holds(U), bool)
    Y = U[inD] @ np.asarray(A_J, dtype=float).T
    r = np.linalg.norm(Y, axis=1)
    Y = Y[r > 0] / r[r > 0, None]
    return PointList(tuple(map(tuple, np.vstack([U[inC | inD], Y]))), "C∪D∪A_J(D) unit samples")


def corollary_check(V: ProperPiecewiseFn, A_F, Q_F, A_J, Q_J, N: int = GRID_N,
                    delta_h: float = DELTA_H, delta_c: float = DELTA_C) -> dict:
    """Bounds, flow and jump conditions for homogeneous hybrid systems."""
    b = bounds_check(V, homogeneous_bound_samples(A_J, Q_F, Q_J, N))
    fl = homogeneous_flow_check(V, A_F, Q_F, UnitCircleGrid(N), delta_h, delta_c)
    jp = homogeneous_jump_check(V, A_J, Q_J, UnitCircleGrid(N), delta_h, delta_c)
    ok = b.passed and fl.passed and jp.passed
    return {"bounds": b, "flow": fl, "jump": jp, "verdict": "UGAS" if ok else "inconclusive"}


# -- Clarke conditions -----------------------------------------------------------

def clarke_check(V: ProperPiecewiseFn, F, points, rho: Monomial = ZERO_RATE, dist: SetDistance = ORIGIN,
                 radius: float | None = None, samples: int = 512, seed: int = 0) -> CheckReport:
    """max over Clarke vertices v and field selections f of ⟨v, f⟩ + ρ(|x|)."""
    X, params = _points(points)
    params = dict(params, rho=[rho.coeff, rho.power], samples=samples, seed=seed,
                  radius="1e-4*(1+|x|)" if radius is None else radius)
    margins = np.empty(len(X))
    info = []
    for k, x in enumerate(X):
        poly = clarke_polytope(V, x, radius, samples, seed)
        best = (-np.inf, None, None)
        for f in F.selections(x):
            vals = poly.vertices @ f
            a = int(np.argmax(vals))
            if vals[a] > best[0]:
                best = (float(vals[a]), poly.vertices[a], f)
        margins[k] = best[0] + float(rho(dist(x)))
        info.append({"vertex": best[1].tolist(), "f": np.asarray(best[2]).tolist(),
                     "pieces": list(poly.indices), "n_vertices": len(poly)})
    return collect("clarke", margins, X, params, extra=lambda k: info[k])


# -- no quadratic Lyapunov function ------------------------------------------------

@dataclass
class InfeasibilityReport:
    probes: list
    values: list
    infeasible: bool
    P: list = field(default_factory=list)

    def to_dict(self):
        return {"check": "quadratic_infeasibility", "probes": self.probes, "values": self.values,
                "verdict": "infeasible" if self.infeasible else "not refuted", "P": self.P}


def quadratic_infeasibility_demo(A_F, probes, P) -> InfeasibilityReport:
    """zᵀ(PA_F + A_FᵀP)z at each probe; infeasible when some value is ≥ 0."""
    P = sym_matrix(P)
    Z = np.asarray(probes, dtype=float).reshape(-1, P.shape[0])
    if len(Z) == 0:
        raise UsageError("need at least one probe")
    M = sym_part(P @ np.asarray(A_F, dtype=float))
    vals = np.einsum("ij,jk,ik->i", Z, M, Z)
    return InfeasibilityReport(Z.tolist(), vals.tolist(), bool(np.any(vals >= 0)), P.tolist())


# -- a.e. versus Clarke ---------------------------------------------------------------

@dataclass
class ComparisonReport:
    dense: CheckReport
    clarke: CheckReport

    @property
    def consistent(self) -> bool:
        # a passing dense check with a failing Clarke vertex contradicts the a.e. ⇒ Clarke implication
        return not (self.dense.passed and not self.clarke.passed)

    def to_dict(self):
        return {"check": "ae_vs_clarke", "consistent": self.consistent,
                "dense": self.dense.to_dict(), "clarke": self.clarke.to_dict()}


def ae_implies_clarke_compare(V: ProperPiecewiseFn, F, open_sampler, boundary_points,
                              rho: Monomial = ZERO_RATE, dist: SetDistance = ORIGIN) -> ComparisonReport:
    if not getattr(F, "continuous", False):
        raise HypothesisError("the comparison needs an inner semicontinuous (continuous) flow map")
    dense = dense_decrease_check(V, F, Region(), open_sampler, rho, dist)
    clarke = clarke_check(V, F, boundary_points, rho, dist)
    return ComparisonReport(dense, clarke)


def line_points(direction, lo: float, hi: float, count: int = 100):
    """``count`` points t·direction for t evenly spaced in [lo, hi]."""
    d = np.asarray(direction, dtype=float)
    return np.linspace(lo, hi, count)[:, None] * d[None, :]
