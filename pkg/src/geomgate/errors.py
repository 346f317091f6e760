"""Exception and warning types shared across the package."""


class InvalidParameterError(ValueError):
    """A constructor or operation received parameters outside its domain."""


class InvalidStateError(ValueError):
    """A matrix failed the density-matrix invariants (Hermiticity, trace, positivity)."""


class TruncationOverflowError(RuntimeError):
    """Population reached the top Fock level; the truncation is too small to trust."""


class ConvergenceError(RuntimeError):
    """The step-halving certificate of the fixed-step integrator missed its tolerance."""

    def __init__(self, message, achieved=None, tolerance=None):
        super().__init__(message)
        self.achieved = achieved
        self.tolerance = tolerance


class QuadratureError(RuntimeError):
    """Adaptive quadrature could not reach the requested tolerance."""

    def __init__(self, message, achieved=None, tolerance=None):
        super().__init__(message)
        self.achieved = achieved
        self.tolerance = tolerance


class NumericalConsistencyError(RuntimeError):
    """An internal identity (e.g. Hermiticity of a propagated state) drifted past its bound."""


class TruncationWarning(UserWarning):
    """Top-level Fock population is large enough to distort the result."""
