"""Exception hierarchy shared by every collspec module."""


class CollspecError(Exception):
    """Base class; ``exit_code`` is what the CLI returns for it."""

    exit_code = 1
    kind = "error"


class InvalidParameterError(CollspecError, ValueError):
    exit_code = 2
    kind = "invalid-parameter"


class ConfigError(InvalidParameterError):
    """Config text could not be parsed; carries the offending line/key."""

    kind = "parse-error"

    def __init__(self, message, line=None, key=None):
        super().__init__(message)
        self.line = line
        self.key = key


class ValidationFailed(CollspecError):
    exit_code = 3
    kind = "validation-failed"

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ResourceError(CollspecError):
    exit_code = 4
    kind = "resource"


class InstabilityError(CollspecError):
    exit_code = 5
    kind = "instability"


class ConsistencyError(CollspecError):
    exit_code = 6
    kind = "internal-consistency"


class DomainError(CollspecError, ValueError):
    exit_code = 2
    kind = "domain"
