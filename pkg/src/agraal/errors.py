"""Exception types shared across the package."""


class DomainError(ValueError):
    """An operator was evaluated outside of its domain."""


class CapabilityError(TypeError):
    """An object lacks a capability the caller needs (prox value, L, metric prox...)."""


class NumericalFailure(RuntimeError):
    """A non-finite value appeared in an iterate.

    ``state`` holds the last state whose iterates were all finite.
    """

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class LinesearchFailure(RuntimeError):
    """Backtracking did not find an acceptable step."""


class ConfigError(ValueError):
    """Invalid experiment configuration. ``path`` names the offending field."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


class ParseError(ValueError):
    """Malformed LIBSVM input. ``line`` is 1-based."""

    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


class ConvergenceWarning(UserWarning):
    """An iterative estimate stopped before meeting its tolerance."""
