"""Piecewise Lyapunov certificates for constrained differential inclusions and hybrid systems."""
from .certify import (
    BallGrid,
    BoundsSpec,
    CurveGrid,
    PointList,
    UnitCircleGrid,
    ae_implies_clarke_compare,
    bounds_check,
    clarke_check,
    corollary_check,
    dense_decrease_check,
    homogeneous_flow_check,
    homogeneous_jump_check,
    quadratic_infeasibility_demo,
)
from .errors import (
    ContinuityError,
    DomainError,
    GrazingError,
    HylyapError,
    HypothesisError,
    InconsistencyError,
    NumericError,
    SingularPointError,
    UnsupportedExpressionError,
    UsageError,
)
from .geometry import CircleArc, Monomial, QuadConstraint, QuadraticForm, Region, conic, halfspace
from .hybrid import HybridArc, HybridSystem, IdentityJump, LinearJump, SimConfig, monitor, simulate
from .piecewise import (
    Affine,
    Max,
    Mid,
    Min,
    ProperPiecewiseFn,
    Quadratic,
    SquaredLinear,
    active_indices,
    clarke_polytope,
    continuity_check,
    essentially_active,
    flatten,
)
from .report import CheckReport
from .setvalued import Filippov2, Linear, NormScaledAffine, sliding_resolve

__version__ = "0.1.0"
