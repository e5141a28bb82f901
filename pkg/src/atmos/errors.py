"""Exception types shared across the package."""


class ParameterDomainError(ValueError):
    """A model parameter lies outside its admissible range."""


class DomainError(ValueError):
    """A coordinate argument lies outside the chart or profile domain."""


class StateAdmissibilityError(ValueError):
    """A perturbation state violates 1+y > 0, 1+y+v > 0 or |y|+|v| < 1."""


class QuadratureError(ArithmeticError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, msg, residual=None):
        super().__init__(msg)
        self.residual = residual


class GridError(ValueError):
    """Grid too small or under-resolved for the requested operation."""


class OrderError(ValueError):
    """Requested differentiation/series order exceeds what is supported."""


class BracketError(ValueError):
    """A root bracket contains no sign change."""


class IntegrationError(RuntimeError):
    """ODE integration failed; message carries the failure location."""


class SymmetryViolationError(RuntimeError):
    """Discrete eigenproblem produced complex eigenvalues beyond tolerance."""


class StabilityError(RuntimeError):
    """Time integration diverged (CFL violation caught by the energy guard)."""


class MappingError(RuntimeError):
    """The Lagrangian-to-Euler map is not monotone (particle crossing)."""


class InsufficientDataError(ValueError):
    """A measurement needs more data than the series provides."""


class AccuracyError(ArithmeticError):
    """A special-function evaluation cannot reach the requested accuracy."""
