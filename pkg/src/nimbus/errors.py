"""Package-level error taxonomy, mapped to CLI exit codes."""


class NimbusError(Exception):
    """Base class for operational errors."""


class ConfigError(NimbusError):
    """Invalid configuration or arguments (exit code 1)."""


class NumericalAbort(NimbusError):
    """A computation diverged or produced non-finite values (exit code 2)."""


class ArtifactIOError(NimbusError):
    """Reading or writing an artifact failed (exit code 3)."""


class EmptyFieldError(NimbusError):
    """A generated density field came out (near) empty."""
