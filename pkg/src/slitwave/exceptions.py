"""Exception hierarchy shared by every module."""


class SlitwaveError(Exception):
    """Base class for all errors raised by the package."""


class InvalidInputError(SlitwaveError, ValueError):
    """A parameter or argument violates a documented precondition."""


class GridError(InvalidInputError):
    """The simulation box cannot hold the requested packet."""


class NumericalBlowUpError(SlitwaveError, FloatingPointError):
    """Non-finite values appeared while time stepping."""

    def __init__(self, step_index, time):
        self.step_index = step_index
        self.time = time
        super().__init__(f"non-finite field after step {step_index} (t={time:g})")


class ObserverError(SlitwaveError):
    """An observer hook failed during propagation."""

    def __init__(self, step_index, time, cause):
        self.step_index = step_index
        self.time = time
        super().__init__(f"observer failed at step {step_index} (t={time:g}): {cause!r}")


class ConfigurationError(SlitwaveError):
    """An integration or experiment configuration is unusable."""


class ConfigParseError(ConfigurationError):
    """A config file could not be parsed or validated."""

    def __init__(self, message, *, line=None, field=None):
        self.line = line
        self.field = field
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
