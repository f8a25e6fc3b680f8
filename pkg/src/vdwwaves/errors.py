"""Exception types raised across the package."""


class DomainError(ValueError):
    """Gas parameters or a query point lie outside the admissible region."""


class NonFiniteInput(ValueError):
    """An initial condition or sampled field contains NaN or inf."""


class ShapeError(ValueError):
    """Array shapes do not match the grid they claim to live on."""


class StabilityError(ArithmeticError):
    """Time integration produced non-finite samples.

    The offending time level is kept on ``tau`` so drivers can report it.
    """

    def __init__(self, message, tau=None):
        super().__init__(message)
        self.tau = tau


class SingularPointError(ValueError):
    """A closed-form solution was evaluated on its singular set."""


class SingularityError(ArithmeticError):
    """The leading coefficient of an ODE vanished during integration."""


class ComplexSpeedError(ValueError):
    """Jump states give a negative squared shock speed.

    ``where`` holds the (T, X) location when raised mid-integration.
    """

    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where


class ConstraintError(ValueError):
    """A formula was called outside the parameter constraint it relies on."""


class NotFound(LookupError):
    """A root search found no sign change in its bracket."""
