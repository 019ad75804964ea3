"""Exceptions raised while loading, solving, and analyzing M/G/1-type models."""


class MG1TailError(Exception):
    """Base class for all errors raised by mg1tail."""


class ParseError(MG1TailError, ValueError):
    """A model file is malformed or contains unknown fields."""


class ValidationError(MG1TailError, ValueError):
    """
    A model violates a structural invariant.

    Parameters
    ----------
    invariant
        Short description of the violated invariant.
    slack
        The numerical amount by which the invariant is violated, if known.
    """

    def __init__(self, invariant: str, slack: float = None):
        self.invariant = invariant
        self.slack = slack

        if slack is None:
            message = invariant
        else:
            message = f"{invariant} (slack {slack:.6g})"

        super().__init__(message)


class PeriodUndefined(ValidationError):
    """Every cycle of the additive kernel has zero displacement."""


class ShapeViolation(ValidationError):
    """A G or R matrix does not have one of the admissible normal forms."""


class UnsupportedRegime(ValidationError):
    """The model carries no data for the asymptotic regime it falls into."""


class NumericalError(MG1TailError, ArithmeticError):
    """Base class for failures of a numerical procedure."""


class SingularMatrix(NumericalError):
    """A matrix failed the pivot threshold of an LU factorization."""


class NoConvergence(NumericalError):
    """An iteration exhausted its budget."""


class OutsideRadius(NumericalError):
    """A generating function was evaluated outside its convergence disk."""


class AtPole(NumericalError):
    """A generating function was evaluated at a declared pole."""


class PositivityViolation(NumericalError):
    """A prefactor that must be positive is not."""


class EmptyIntersection(NumericalError):
    """The dominant pole sets of the kernel and boundary do not share theta."""


class RemainderTooLarge(NumericalError):
    """The stationary prefix is too short to certify the tail remainder."""


class InsufficientLevels(NumericalError):
    """Too few levels lie above the noise floor for an empirical estimate."""
