"""Exception types shared across the package.

The CLI maps ConfigurationError to exit code 2 and NumericalFailure (and its
subclasses) to exit code 3.
"""


class ConfigurationError(ValueError):
    """A precondition on sizes, band limits or parameters was violated."""


class NumericalFailure(RuntimeError):
    """A computation failed numerically (non-convergence, blow-up)."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = dict(diagnostics)


class PicardConvergenceError(NumericalFailure):
    """Fixed-point iteration did not contract within the iteration budget."""


class BlowUpError(NumericalFailure):
    """The integrator detected non-finite values or runaway norm growth."""
