"""Exception hierarchy shared by the library, the CLI, and the service.

The CLI maps these onto stable exit codes (schema/usage -> 1, data -> 2,
capacity -> 3); the HTTP layer maps them onto status codes.
"""


class CausalKcError(Exception):
    """Base class for all causalkc errors."""


class SchemaError(CausalKcError):
    """Invalid names, shapes, configuration, or arguments (exit code 1)."""


class DataError(CausalKcError):
    """Malformed or empty input data (exit code 2)."""


class CapacityError(CausalKcError):
    """Problem size exceeds the exact-inference limits (exit code 3)."""
