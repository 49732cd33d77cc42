"""Exception types shared across modules; the CLI maps them to exit codes."""


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class ConfigurationError(ValueError):
    pass


class ResourceLimitError(ConfigurationError):
    """A run would exceed the memory guard; raised before allocating."""


class NormDriftError(RuntimeError):
    """The state norm left the unit sphere: an implementation defect."""


class NoDominantOscillation(ValueError):
    pass


class InsufficientSpan(ValueError):
    pass


class MalformedInput(ValueError):
    pass


class OutputExists(FileExistsError):
    pass
