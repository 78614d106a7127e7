"""Exception types shared across the package."""


class ContractError(ValueError):
    """An operation was called with arguments violating its preconditions."""


class ConfigError(ValueError):
    """Invalid sampler, model or run configuration."""

    def __init__(self, message, key=None):
        self.key = key
        if key is not None:
            message = f"{key}: {message}"
        super().__init__(message)


class NumericalDegeneracyError(FloatingPointError):
    """Every candidate inside a Hamming ball has zero (or NaN) weight."""

    def __init__(self, block, message="all candidate weights are -inf or NaN"):
        self.block = block
        super().__init__(f"block {block}: {message}")


class MoveBoundViolation(AssertionError):
    """A transition moved further than the Hamming-ball construction allows."""
