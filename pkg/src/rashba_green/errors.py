"""Exception hierarchy shared by all evaluators."""


class GreenError(Exception):
    """Base class for every error raised by :mod:`rashba_green`."""


class DomainError(GreenError, ValueError):
    """An argument lies outside the domain where the function is finite."""


class ParameterPole(DomainError):
    """A denominator parameter is a nonpositive integer."""


class OutOfRegion(GreenError, ValueError):
    """The arguments lie outside the convergence region of the series."""


class NoValidRegion(OutOfRegion):
    """None of the admissible series representations converges."""


class InvalidZeta(DomainError):
    """The spectral parameter lies in the essential spectrum."""


class OriginNotAllowed(DomainError):
    """The quantity is singular at the origin."""


class NoConvergence(GreenError, ArithmeticError):
    """A truncation cap was exhausted before reaching the tolerance."""


class QuadFailure(GreenError, ArithmeticError):
    """Adaptive quadrature did not reach the requested tolerance."""
