"""Exception types shared across the package.

Every error raised by the public API is a subclass of HdlError, so callers
can catch one base type. Names mirror the failure they report.
"""


class HdlError(Exception):
    """Base class for all package-specific errors."""


class DimMismatch(HdlError):
    """Operands live over different ambient dimensions."""


class WrongDegree(HdlError):
    """A form does not have the total degree an operation requires."""


class UnsupportedBidegree(HdlError):
    """A decomposition was requested at a bidegree it does not cover."""


class ParseError(HdlError):
    """A model file or model dictionary is malformed."""


class IntegrabilityViolated(HdlError):
    """A structure equation has a (0,2) component."""


class NotClosedSquare(HdlError):
    """The induced differential does not square to zero."""


class NotUnimodular(HdlError):
    """Adjoint-dependent operation on a non-unimodular model."""


class NotInKernel(HdlError):
    """Input form is not closed for the requested theory."""


class NoDClosedRepresentative(HdlError):
    """The d-closed correction system has no solution."""


class NoTrivialization(HdlError):
    """The space of holomorphic top-degree forms is not one-dimensional."""


class VanishingForm(HdlError):
    """A form required to be nowhere vanishing has zero coefficient."""


class ObstructionNotExact(HdlError):
    """An order of the deformation recursion has no potential."""

    def __init__(self, order, residual=None):
        self.order = order
        self.residual = residual
        msg = "order %d right-hand side is not in the required image" % order
        if residual is not None:
            msg += " (residual %.3e)" % residual
        super().__init__(msg)


class OrderOutOfRange(HdlError):
    """A series was queried beyond the computed order."""


class NotBalanced(HdlError):
    """The metric is not balanced, but the construction needs it."""


class NotPrimitiveClass(HdlError):
    """The class fails the primitivity membership criterion."""


class DimTooSmall(HdlError):
    """The construction needs a larger ambient dimension."""


class NotInPlusSpace(HdlError):
    """The class is not in the plus eigenspace of the star operator."""


class Degenerate(HdlError):
    """A pairing or coefficient matrix is singular."""


class NotUnique(HdlError):
    """A space required to be one-dimensional is not."""
