"""Exception hierarchy shared across the simulator."""


class AggsimError(Exception):
    """Base class for all errors raised by aggsim."""


class InvalidInput(AggsimError, ValueError):
    """An argument lies outside the domain of an operation."""


class ConfigError(AggsimError, ValueError):
    """A configuration document or scenario failed validation."""


class NegotiationError(AggsimError):
    """Two stations share no usable parameter set."""


class ProtocolStateError(AggsimError, RuntimeError):
    """Sender and receiver state disagree; indicates a simulator bug."""
