"""Exception types shared across the package."""


class UsageError(ValueError):
    """A caller violated an operation's documented precondition."""


class FunctorParseError(UsageError):
    """Malformed functor or certificate JSON; carries the offending path."""

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path


class InsufficientLevelError(UsageError):
    """The functor library is too shallow for a requested decomposition."""

    def __init__(self, message: str, required_level: int):
        super().__init__(message)
        self.required_level = required_level


class HypothesisError(RuntimeError):
    """A nonvanishing hypothesis required by a construction fails on the given input."""
