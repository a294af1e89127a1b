"""Exception types shared across the package."""


class DomainError(ValueError):
    """A parameter lies outside its physical or mathematical domain."""


class StateError(ValueError):
    """A matrix violates density-matrix or unitarity invariants."""


class ConvergenceError(RuntimeError):
    """An iterative estimate failed to converge."""


class VerificationError(AssertionError):
    """A closed-form result disagrees with its exact oracle."""
