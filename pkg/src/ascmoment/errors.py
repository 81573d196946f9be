"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class AscMomentError(Exception):
    """Base class for every error raised by the package."""


class PoleError(AscMomentError, ZeroDivisionError):
    """A formula was evaluated at (or numerically on top of) a pole."""


class DomainError(AscMomentError, ValueError):
    """An argument lies outside the domain of the operation."""


class DivergenceError(AscMomentError, ArithmeticError):
    """A non-terminating series does not converge for the given argument."""


class GridMismatch(AscMomentError, ValueError):
    """Two grid functions live on different grids."""


class RangeError(AscMomentError, IndexError):
    """A lattice index lies outside the truncated grid."""


class ContourError(AscMomentError, ArithmeticError):
    """A contour integral is unstable, usually a second singularity nearby."""


class SymmetryError(AscMomentError, ValueError):
    """A function on the spectrum is not invariant under lambda -> 1/lambda."""


class SupportError(AscMomentError, ValueError):
    """A finitely supported function reaches the truncation edge of its grid."""


class DegenerateError(AscMomentError, ZeroDivisionError):
    """Two spectral points share the same eigenvalue mu."""


class ConfigError(AscMomentError, ValueError):
    """Invalid run configuration or parameter preset."""
