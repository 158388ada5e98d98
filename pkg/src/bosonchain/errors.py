"""Exception types raised across the package."""


class BasisSizeError(ValueError):
    """A requested basis would exceed the configured dimension cap."""

    def __init__(self, dim, cap):
        self.dim = dim
        self.cap = cap
        super().__init__(f"basis dimension {dim} exceeds the cap of {cap} states")


class SectorError(ValueError):
    """An operation would leave the symmetry sector of a number-bounded basis."""


class ConfigError(ValueError):
    """Invalid experiment configuration."""

    def __init__(self, message, pointer=""):
        self.pointer = pointer
        super().__init__(f"{pointer or '/'}: {message}")
