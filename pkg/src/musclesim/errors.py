"""Exception types raised across the package."""


class MuscleSimError(ValueError):
    """Base class for invalid inputs and violated contracts."""


class FeasibilityError(MuscleSimError):
    """A requested next activation lies outside the one-step reachable band.

    ``bound`` is ``"lower"`` or ``"upper"``; ``limit`` is the violated value.
    """

    def __init__(self, message, bound, limit):
        super().__init__(message)
        self.bound = bound
        self.limit = limit


class ConfigError(MuscleSimError):
    """A scenario or muscle definition file failed to parse or validate."""

    def __init__(self, message, line=None, source=None):
        where = ""
        if source is not None:
            where = f"{source}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
        self.line = line
        self.source = source
