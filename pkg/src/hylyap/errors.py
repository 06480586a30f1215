"""Exception hierarchy shared by all modules."""


class HylyapError(Exception):
    pass


class UsageError(HylyapError, ValueError):
    """Bad arguments: dimension mismatch, unsupported option, empty input."""


class DomainError(HylyapError, ValueError):
    """A point lies outside the set on which an object is defined."""

    def __init__(self, message, x=None):
        super().__init__(message)
        self.x = None if x is None else [float(v) for v in x]


class NumericError(HylyapError, ArithmeticError):
    """Integration produced a non-finite state."""

    def __init__(self, message, last_state=None, t=None, j=None):
        super().__init__(message)
        self.last_state = last_state
        self.t = t
        self.j = j


class HypothesisError(HylyapError, ValueError):
    """A theorem hypothesis required by a check does not hold."""


class UnsupportedExpressionError(HylyapError, ValueError):
    pass


class ContinuityError(HylyapError, ValueError):
    """Piece values disagree where two regions overlap."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class SingularPointError(HylyapError, ValueError):
    pass


class GrazingError(HylyapError, ValueError):
    """Filippov field is (nearly) tangent to the switching locus from one side."""


class InconsistencyError(HylyapError, RuntimeError):
    """Internal invariant (e.g. region covering) violated."""
