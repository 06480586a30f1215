"""Vectors, symmetric quadratic forms, quadratic constraints and regions.

Everything here is an immutable value. Functions accept either a single
point of shape ``(n,)`` or a batch of shape ``(m, n)``; batched calls
return arrays of length ``m``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import UsageError

MAX_DIM = 8
MEMBER_SLACK = 1e-9
SYMMETRY_TOL = 1e-12

SENSES = ("geq", "gt", "leq", "lt")


def as_vec(x, n: int | None = None) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.size < 1:
        raise UsageError(f"expected a non-empty 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise UsageError(f"vector has non-finite entries: {v}")
    if n is not None and v.size != n:
        raise UsageError(f"dimension mismatch: expected {n}, got {v.size}")
    return v


def _points(x, n: int) -> np.ndarray:
    X = np.asarray(x, dtype=float)
    if X.ndim not in (1, 2) or X.shape[-1] != n:
        raise UsageError(f"dimension mismatch: expected (..., {n}), got {X.shape}")
    return X


def sym_matrix(M, tol: float = SYMMETRY_TOL) -> np.ndarray:
    """Return a read-only, exactly symmetric copy of ``M``.

    The upper triangle is authoritative; ``M`` must already be symmetric to
    ``tol`` (relative to its largest entry).
    """
    A = np.array(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise UsageError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise UsageError("matrix has non-finite entries")
    scale = max(1.0, float(np.abs(A).max()))
    if np.abs(A - A.T).max() > tol * scale:
        raise UsageError("matrix is not symmetric")
    U = np.triu(A)
    S = U + np.triu(A, 1).T
    S.flags.writeable = False
    return S


def sym_part(M) -> np.ndarray:
    """``M + Mᵀ``, the matrix of the quadratic form x ↦ 2xᵀMx."""
    A = np.asarray(M, dtype=float)
    return sym_matrix(A + A.T)


def eigen_extremes(S) -> tuple[float, float]:
    S = sym_matrix(S)
    if S.shape[0] > MAX_DIM:
        raise UsageError(f"dimension {S.shape[0]} exceeds the supported maximum {MAX_DIM}")
    w = np.linalg.eigvalsh(S)
    return float(w[0]), float(w[-1])


@dataclass(frozen=True, eq=False)
class QuadraticForm:
    """x ↦ xᵀSx with gradient 2Sx."""

    S: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "S", sym_matrix(self.S))

    @property
    def n(self) -> int:
        return self.S.shape[0]

    def value(self, x):
        X = _points(x, self.n)
        return np.einsum("...i,ij,...j->...", X, self.S, X)

    def grad(self, x):
        X = _points(x, self.n)
        return 2.0 * X @ self.S

    def __neg__(self):
        return QuadraticForm(-self.S)

    def __sub__(self, other: "QuadraticForm"):
        return QuadraticForm(self.S - other.S)

    def __eq__(self, other):
        return isinstance(other, QuadraticForm) and np.array_equal(self.S, other.S)

    def __hash__(self):
        return hash(self.S.tobytes())


def quad_eval(form: QuadraticForm, x) -> float:
    return float(form.value(as_vec(x, form.n)))


def quad_grad(form: QuadraticForm, x) -> np.ndarray:
    return form.grad(as_vec(x, form.n))


@dataclass(frozen=True, eq=False)
class QuadConstraint:
    """Sign condition on ``xᵀRx + qᵀx + c``.

    With ``q`` and ``c`` zero this is a conic constraint, whose truth value
    is invariant under x ↦ λx. The affine and shifted terms exist for the
    non-homogeneous regions of curve-constrained examples.
    """

    R: np.ndarray
    sense: str = "geq"
    q: np.ndarray | None = None
    c: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "R", sym_matrix(self.R))
        if self.sense not in SENSES:
            raise UsageError(f"unknown constraint sense {self.sense!r}")
        n = self.R.shape[0]
        if self.q is not None:
            q = as_vec(self.q, n).copy()
            q.flags.writeable = False
            object.__setattr__(self, "q", None if not q.any() else q)
        object.__setattr__(self, "c", float(self.c))
        object.__setattr__(self, "_norm", float(np.abs(np.linalg.eigvalsh(self.R)).max()))
        object.__setattr__(self, "_qnorm", 0.0 if self.q is None else float(np.linalg.norm(self.q)))

    @property
    def n(self) -> int:
        return self.R.shape[0]

    @property
    def conic(self) -> bool:
        return self.q is None and self.c == 0.0

    @property
    def strict(self) -> bool:
        return self.sense in ("gt", "lt")

    @property
    def sign(self) -> float:
        return 1.0 if self.sense in ("geq", "gt") else -1.0

    def raw(self, x):
        X = _points(x, self.n)
        v = np.einsum("...i,ij,...j->...", X, self.R, X)
        if self.q is not None:
            v = v + X @ self.q
        return v + self.c

    def signed(self, x):
        """Constraint value oriented so that the constraint reads ``>= 0``."""
        return self.sign * self.raw(x)

    def scale(self, x):
        # magnitude used to turn absolute slacks into relative ones
        X = _points(x, self.n)
        r2 = np.einsum("...i,...i->...", X, X)
        s = self.norm * r2
        if self.q is not None:
            s = s + self._qnorm * np.sqrt(r2)
        return s + abs(self.c)

    @property
    def norm(self) -> float:
        return self._norm

    def normalized(self, x):
        """Signed value divided by the spectral norm of R (conic only).

        On the unit sphere this lies in [-1, 1].
        """
        nrm = self.norm
        return self.signed(x) / (nrm if nrm > 0 else 1.0)

    def holds(self, x, strict: bool = False, slack: float = MEMBER_SLACK):
        v = self.signed(x)
        tol = slack * self.scale(x)
        if strict or self.strict:
            return v > tol
        return v >= -tol

    def negated(self) -> "QuadConstraint":
        flip = {"geq": "lt", "gt": "leq", "leq": "gt", "lt": "geq"}
        return QuadConstraint(self.R, flip[self.sense], self.q, self.c)


def conic(R, sense: str = "geq") -> QuadConstraint:
    return QuadConstraint(R, sense)


def halfspace(a, b: float = 0.0, sense: str = "geq") -> QuadConstraint:
    """``⟨a, x⟩ + b`` compared with zero."""
    a = as_vec(a)
    return QuadConstraint(np.zeros((a.size, a.size)), sense, a, b)


@dataclass(frozen=True)
class CircleArc:
    """Arc of the circle |x - center| = radius, angles in [theta0, theta1]."""

    center: tuple
    radius: float
    theta0: float
    theta1: float

    def point(self, theta):
        th = np.asarray(theta, dtype=float)
        c = np.asarray(self.center, dtype=float)
        return c + self.radius * np.stack([np.cos(th), np.sin(th)], axis=-1)

    def param(self, x):
        X = np.asarray(x, dtype=float)
        d = X - np.asarray(self.center, dtype=float)
        th = np.arctan2(d[..., 1], d[..., 0])
        # lift into the arc's angular window
        lo = self.theta0
        return lo + np.mod(th - lo, 2 * np.pi)

    def project(self, x):
        c = np.asarray(self.center, dtype=float)
        d = np.asarray(x, dtype=float) - c
        r = np.linalg.norm(d)
        if r == 0:
            return np.asarray(x, dtype=float)
        return c + d * (self.radius / r)


@dataclass(frozen=True)
class Region:
    """Conjunction of quadratic constraints, optionally carrying a curve."""

    constraints: tuple = ()
    curve: CircleArc | None = None

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        dims = {c.n for c in self.constraints}
        if len(dims) > 1:
            raise UsageError(f"constraints of mixed dimension {sorted(dims)}")

    @property
    def n(self) -> int | None:
        return self.constraints[0].n if self.constraints else None

    @property
    def conic(self) -> bool:
        return all(c.conic for c in self.constraints)

    def member(self, x, strict: bool = False, slack: float = MEMBER_SLACK):
        X = np.asarray(x, dtype=float)
        out = np.ones(X.shape[:-1], dtype=bool)
        for c in self.constraints:
            out &= c.holds(X, strict=strict, slack=slack)
        return out if X.ndim > 1 else bool(out)

    def margin(self, x):
        """Smallest normalized constraint value; +inf without constraints."""
        X = np.asarray(x, dtype=float)
        m = np.full(X.shape[:-1], np.inf)
        for c in self.constraints:
            m = np.minimum(m, c.normalized(X))
        return m

    def __and__(self, other: "Region") -> "Region":
        return Region(self.constraints + other.constraints, self.curve or other.curve)


def region_member(r: Region, x, strict: bool = False, slack: float = MEMBER_SLACK) -> bool:
    if r.n is not None:
        as_vec(x, r.n)
    return bool(r.member(as_vec(x), strict=strict, slack=slack))


def regular_closed_proxy(r: Region) -> bool:
    """Sufficient test that each conic factor of ``r`` has nonempty interior.

    This is a proxy: it does not certify regular-closedness of the
    intersection.
    """
    for c in r.constraints:
        if c.strict:
            raise UsageError("regular_closed_proxy needs non-strict constraints")
        if not c.conic:
            raise UsageError("regular_closed_proxy is only defined for conic constraints")
        _, top = eigen_extremes(c.sign * c.R)
        if not top > 0:
            return False
    return True


@dataclass(frozen=True)
class Monomial:
    """s ↦ coeff·s**power, used for class-K∞ bounds and decrease rates."""

    coeff: float
    power: float = 2.0

    def __post_init__(self):
        if self.coeff < 0 or not self.power > 0:
            raise UsageError("monomial needs coeff >= 0 and power > 0")

    def __call__(self, s):
        return self.coeff * np.power(np.asarray(s, dtype=float), self.power)


ZERO_RATE = Monomial(0.0, 1.0)


@dataclass(frozen=True)
class SetDistance:
    """Distance to a closed target set; the origin unless ``fn`` is given."""

    fn: Callable | None = field(default=None, compare=False)
    name: str = "origin"

    def __call__(self, x):
        X = np.asarray(x, dtype=float)
        if self.fn is None:
            return np.linalg.norm(X, axis=-1)
        return self.fn(X)


ORIGIN = SetDistance()


def unit_circle(N: int, exclude: Sequence[float] = (), margin: float = 1e-6):
    """``N`` equally spaced unit vectors, minus those within ``margin`` of excluded angles."""
    th = np.arange(N) * (2 * np.pi / N)
    keep = np.ones(N, dtype=bool)
    for a in exclude:
        d = np.abs(np.angle(np.exp(1j * (th - a))))
        keep &= d > margin
    th = th[keep]
    return np.stack([np.cos(th), np.sin(th)], axis=1), th
