"""Exception types.  Each carries enough context to diagnose the failure."""


class FixgenError(Exception):
    """Base class for all package errors."""


class CertificateError(FixgenError):
    """A supplied witness (orthonormal basis, certificate fields) is malformed
    or inconsistent."""


class DimensionError(FixgenError):
    """Vector lengths disagree or the ambient dimension is exhausted."""


class DomainError(FixgenError):
    """A point or parameter lies outside an operation's domain."""


class ConvergenceError(FixgenError):
    """An iterative solver stopped without meeting its tolerance.

    Attributes
    ----------
    residual : float
        Last residual reached.
    iterations : int
        Iterations spent.
    """

    def __init__(self, message, residual=float("nan"), iterations=0):
        super().__init__(f"{message} (residual={residual:.3e}, iterations={iterations})")
        self.residual = residual
        self.iterations = iterations


class CompositionError(FixgenError):
    """Maps were chained over incompatible domains."""


class ConstructionError(FixgenError):
    """A perturbation construction violated one of its own requirements."""


class InfeasibleExtensionError(FixgenError):
    """The Lipschitz extension could not reach a point of the ball
    intersection, which means the anchor data is not 1-Lipschitz."""

    def __init__(self, message, value):
        super().__init__(f"{message} (max slack {value:.3e})")
        self.value = value


class CoveringError(FixgenError):
    """No point of the covering set E_F(lambda, t) was found."""


class SearchFailure(FixgenError):
    """A bounded search exhausted its horizon."""


class BudgetError(FixgenError):
    """An iteration budget ran out before a milestone was reached."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class NotLURError(FixgenError):
    """The convexity modulus vanished where positivity is required."""


class UnboundednessError(FixgenError):
    """The body offers no unbounded direction orthogonal to a subspace."""


class ConfigError(FixgenError):
    """An experiment configuration failed validation.

    Attributes
    ----------
    pointer : str
        JSON pointer to the offending value ("" for the document root).
    """

    def __init__(self, message, pointer=""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer
