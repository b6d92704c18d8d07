"""Exception types raised by the solvers and checks."""


class InvalidInputError(ValueError):
    """Non-finite samples, negative densities, malformed grids."""


class DomainError(ValueError):
    """An argument lies outside the range where the operation is defined."""


class ResolutionError(ValueError):
    """The grid cannot resolve the requested length scale."""


class SolverFailure(RuntimeError):
    """An iterative or shooting solve did not converge.

    ``diagnostics`` carries whatever the solver knew when it gave up
    (bracket ends, residual history, iterate norms).
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
