"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration or an operation attempted in an invalid state."""


class StreamFormatError(ValueError):
    """A stream source (CSV file) violates the declared schema."""


class StaleSignatureError(RuntimeError):
    """A leaf signature from an older forest epoch was used after a tree replacement."""
