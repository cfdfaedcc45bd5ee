"""Exceptions shared across the plant, control, and physics modules."""


class InvalidInputError(ValueError):
    """An argument violates an operation's stated preconditions."""


class SimulationDivergedError(RuntimeError):
    """A simulated state stopped being finite; the run cannot continue."""


class FitFailureError(RuntimeError):
    """A parameter identification could not reduce the residual below its
    declared threshold.  Carries the best candidate found."""

    def __init__(self, message, best_params=None, residuals=None):
        super().__init__(message)
        self.best_params = best_params
        self.residuals = residuals
