"""Flow maps: linear fields, |x|-scaled affine fields, two-mode Filippov systems."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, GrazingError, SingularPointError, UsageError
from .geometry import as_vec, sym_matrix

LOCUS_TOL = 1e-9
ATTRACT_MARGIN = 1e-9


def _square(A, name="A"):
    M = np.array(A, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise UsageError(f"{name} must be square, got shape {M.shape}")
    M.flags.writeable = False
    return M


@dataclass(frozen=True, eq=False)
class Linear:
    A: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "A", _square(self.A))

    n = property(lambda self: self.A.shape[0])
    continuous = True
    homogeneous = True

    def __call__(self, x):
        return np.asarray(x, dtype=float) @ self.A.T

    def selections(self, x):
        return [self(x)]


@dataclass(frozen=True, eq=False)
class NormScaledAffine:
    """f(x) = |x|·(Ax + b)."""

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "A", _square(self.A))
        b = as_vec(self.b, self.A.shape[0]).copy()
        b.flags.writeable = False
        object.__setattr__(self, "b", b)

    n = property(lambda self: self.A.shape[0])
    continuous = True
    homogeneous = False

    def __call__(self, x):
        X = np.asarray(x, dtype=float)
        r = np.linalg.norm(X, axis=-1, keepdims=True)
        return r * (X @ self.A.T + self.b)

    def selections(self, x):
        return [self(x)]


@dataclass(frozen=True)
class SlidingInfo:
    on_surface: bool
    lam: float
    field: np.ndarray
    normal: np.ndarray
    kind: str  # attractive | crossing | repulsive


@dataclass(frozen=True, eq=False)
class Filippov2:
    """Mode 1 where xᵀQx > 0, mode 2 where xᵀQx < 0, hull of both on the locus."""

    A1: np.ndarray
    A2: np.ndarray
    Q: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "A1", _square(self.A1, "A1"))
        object.__setattr__(self, "A2", _square(self.A2, "A2"))
        object.__setattr__(self, "Q", sym_matrix(self.Q))
        if not (self.A1.shape == self.A2.shape == self.Q.shape):
            raise UsageError("A1, A2 and Q must share one dimension")

    n = property(lambda self: self.A1.shape[0])
    continuous = False
    homogeneous = True

    def switching(self, x):
        X = np.asarray(x, dtype=float)
        return np.einsum("...i,ij,...j->...", X, self.Q, X)

    def on_locus(self, x, tol: float = LOCUS_TOL) -> bool:
        x = np.asarray(x, dtype=float)
        qn = np.abs(np.linalg.eigvalsh(self.Q)).max()
        return bool(abs(self.switching(x)) <= tol * qn * float(x @ x))

    def modes(self, x):
        X = np.asarray(x, dtype=float)
        return X @ self.A1.T, X @ self.A2.T

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            if not x.any():
                return np.zeros_like(x)
            if self.on_locus(x):
                raise DomainError("point lies on the switching locus; use sliding_resolve", x)
        s = self.switching(x)
        f1, f2 = self.modes(x)
        return np.where((s > 0)[..., None], f1, f2)

    def selections(self, x):
        x = np.asarray(x, dtype=float)
        if self.on_locus(x):
            return list(self.modes(x))
        return [self(x)]

    def project(self, x, iters: int = 3):
        """Pull ``x`` onto {xᵀQx = 0} by Newton steps along 2Qx."""
        x = np.array(x, dtype=float)
        for _ in range(iters):
            g = 2.0 * self.Q @ x
            gg = float(g @ g)
            if gg == 0:
                break
            x = x - self.switching(x) / gg * g
        return x


FlowMap = Linear | NormScaledAffine | Filippov2


def flow_eval(F, x):
    if F.n != np.asarray(x).shape[-1]:
        raise UsageError(f"dimension mismatch: expected {F.n}")
    return F(as_vec(x))


def sliding_resolve(F: Filippov2, x, tol: float = LOCUS_TOL, margin: float = ATTRACT_MARGIN) -> SlidingInfo:
    """Classify the Filippov hull at a locus point and pick the tangent selection."""
    if not isinstance(F, Filippov2):
        raise UsageError("sliding_resolve needs a Filippov2 flow map")
    x = as_vec(x, F.n)
    if not F.on_locus(x, tol):
        raise UsageError(f"point {x.tolist()} is not on the switching locus")
    normal = 2.0 * F.Q @ x
    if not normal.any():
        raise SingularPointError(f"switching locus is singular at {x.tolist()}")
    f1, f2 = F.modes(x)
    if np.array_equal(f1, f2):
        return SlidingInfo(False, 1.0, f1, normal, "crossing")
    a = float(normal @ f1)
    b = float(normal @ f2)
    m = margin * float(np.linalg.norm(normal)) * max(np.linalg.norm(f1), np.linalg.norm(f2))
    if a < -m and b > m:
        lam = b / (b - a)
        return SlidingInfo(True, lam, lam * f1 + (1 - lam) * f2, normal, "attractive")
    if a > m and b > m:
        return SlidingInfo(False, 1.0, f1, normal, "crossing")
    if a < -m and b < -m:
        return SlidingInfo(False, 0.0, f2, normal, "crossing")
    if a > m and b < -m:
        return SlidingInfo(False, 1.0, f1, normal, "repulsive")
    raise GrazingError(f"grazing contact at {x.tolist()}: a={a:.3g}, b={b:.3g}")
