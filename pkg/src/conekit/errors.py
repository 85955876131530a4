"""Exception types shared across the package."""


class RejectedInputError(ValueError):
    """An operand violates a documented precondition."""


class UnsupportedInputError(ValueError):
    """The input is well formed but outside the implemented domain."""


class ConvergenceError(ArithmeticError):
    """An iterative routine hit its iteration cap; carries the last residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


class DecodeError(ValueError):
    """A JSON document does not match the expected schema; carries a location."""

    def __init__(self, message: str, location: str = "/"):
        super().__init__(f"{location}: {message}")
        self.location = location
