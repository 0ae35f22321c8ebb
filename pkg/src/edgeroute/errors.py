"""Exception types shared across the package.

All of these subclass ValueError so callers that do not care about the
distinction can catch a single type; the CLI maps them to exit code 2.
"""


class TraceParseError(ValueError):
    """A trace file line is not valid JSON or is missing/has malformed fields."""


class TraceValidationError(ValueError):
    """Parsed trace records violate a structural invariant."""


class ConfigError(ValueError):
    """A run configuration is inconsistent (duplicate labels, missing scores, ...)."""
