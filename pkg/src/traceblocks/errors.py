"""Exception types shared across the package.

The CLI maps these onto its exit-code contract: parameter/domain/usage and
resource-limit problems exit 2, numerical failures exit 1, I/O errors exit 3.
"""


class ParameterError(ValueError):
    """A parameter violates a precondition (e.g. p <= 1, unknown kind)."""


class DomainError(ValueError):
    """An argument is outside the operation's domain (e.g. index out of range)."""


class UsageError(ValueError):
    """Inputs are individually valid but incompatible (e.g. grid mismatch)."""


class ResourceLimitError(RuntimeError):
    """A requested object exceeds the configured dimension cap."""


class NumericalError(RuntimeError):
    """A numerical routine failed or left its accuracy contract."""
