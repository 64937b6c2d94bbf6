"""Exception and warning types raised by the plateau package."""


class PlateauError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(PlateauError):
    """A contour spec file could not be parsed."""


class ValidationError(PlateauError, ValueError):
    """Input data violates a contour or configuration invariant."""


class DegreeError(PlateauError, ValueError):
    """Too few samples for the requested Fourier degree."""


class DomainError(PlateauError, ValueError):
    """Evaluation point lies outside the open unit disc."""


class DegenerateContour(PlateauError):
    """Contour collapses to (nearly) a single point."""


class NotConverged(PlateauError):
    """The solver stopped before meeting its tolerances.

    The partial results are attached so callers can still write them out.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class UnivalencyFailure(PlateauError):
    """The planar map failed the argument-principle univalency check."""

    def __init__(self, message, offending=None, result=None):
        super().__init__(message)
        self.offending = offending if offending is not None else []
        self.result = result


class ModulusAtBracketEnd(PlateauError):
    """Modulus search ended on the bracket boundary.

    Either the bracket excludes the optimum or no connected annular
    surface exists for the given pair of contours.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class MismatchedContour(PlateauError, ValueError):
    """Two reports being compared were produced for different contours."""


class PositivityWarning(UserWarning):
    """The kernel g'(t).g'(tau) is not positive everywhere."""
