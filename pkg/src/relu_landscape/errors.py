"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input lies outside the region where a quantity is smooth/defined."""


class StructureError(ValueError):
    """Input does not have the required symmetry or block structure."""


class ConvergenceError(RuntimeError):
    """An iterative solver failed to reach its tolerance.

    ``history`` holds the residual norm after every iteration.
    """

    def __init__(self, message, history=None, last_good=None):
        super().__init__(message)
        self.history = list(history or [])
        self.last_good = last_good


class SingularJacobianError(ConvergenceError):
    """Newton step requested at a numerically singular Jacobian."""


class UnknownFamilyError(ValueError):
    """Requested (type, p, m) combination is not a cataloged family."""
