"""Shared exception types."""


class ValidationError(ValueError):
    """Raised when an input violates a documented precondition.

    ``field`` names the offending parameter so front ends (e.g. the CLI)
    can point at the flag that caused the rejection.
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.reason = message
