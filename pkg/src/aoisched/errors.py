"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A statically invalid configuration: cost schedules, channel specs,
    experiment config files."""


class CapacityError(RuntimeError):
    """An instance exceeds the tractable size of an exact solver."""
