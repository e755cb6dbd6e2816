"""Exception hierarchy shared by all modules."""


class RevampError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameterError(RevampError, ValueError):
    """A distribution or problem parameter is outside its legal domain."""


class ImproperBeliefError(RevampError):
    """A belief that must be a proper distribution is not normalizable."""


class SingularUpdateError(RevampError):
    """A rank-one belief update would divide by zero."""


class SingularExtrinsicError(RevampError):
    """Belief precision and incoming message precision cancel exactly."""


class InvariantError(RevampError):
    """An internal invariant promised by a strategy was violated."""


class TooLargeError(RevampError):
    """The brute-force oracle was asked to enumerate too many assignments."""


class ConfigError(RevampError, ValueError):
    """Malformed experiment configuration."""

    def __init__(self, field, message):
        if field is not None and field not in message:
            message = f"{field}: {message}"
        super().__init__(message)
        self.field = field
