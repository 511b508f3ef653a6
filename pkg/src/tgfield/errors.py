"""Exception hierarchy shared by all tgfield modules."""


class TGFieldError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(TGFieldError, ValueError):
    """Bad arguments or an inadmissible configuration."""


class DomainError(TGFieldError, ValueError):
    """A coordinate lies outside the chart where an object is defined."""


class DerivativeUnavailableError(DomainError):
    """A finite-difference stencil would leave the domain."""


class MarginError(DomainError):
    """A point is too close to the domain boundary for the requested stencil."""


class SingularParallelError(TGFieldError, ArithmeticError):
    """The warp factor vanishes (the parallel degenerates to a point)."""


class PoleError(TGFieldError, ArithmeticError):
    """A closed-form expression hits a pole."""


class StationaryPointError(TGFieldError, ArithmeticError):
    """The field has (numerically) vanishing covariant derivative."""


class BranchError(TGFieldError, ArithmeticError):
    """A real power of a non-positive base was requested."""


class DegenerateFieldError(TGFieldError, ValueError):
    """The field makes a closed-form relation undefined."""


class ParameterizationError(TGFieldError, ArithmeticError):
    """A curve parameterization is 0/0 at the requested parameter."""


class NonExistenceError(TGFieldError):
    """The requested geometric object provably does not exist.

    Kept apart from the numeric errors on purpose: callers (the CLI in
    particular) report it as a mathematical verdict, not a failure.
    """
