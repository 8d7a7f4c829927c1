"""Error types shared across the simulator."""


class CapacityError(ValueError):
    """Raised when a request cannot be satisfied by the available samples."""


class FormatError(ValueError):
    """Raised when an input file does not match its declared binary format."""


class InfeasibleError(ValueError):
    """Raised when a target (budget, distance, count) is unreachable."""


class ConfigError(ValueError):
    """Raised for invalid or inconsistent experiment configuration."""
