"""Exception types shared across pipeline stages."""


class PipelineError(Exception):
    """Base class for failures raised by pipeline stages."""


class InputFormatError(PipelineError):
    """An input file violates its documented format."""


class ConfigError(PipelineError):
    """Invalid or inconsistent run configuration."""


class ScorerError(PipelineError):
    """The scoring backend failed or became unreachable."""


class ProtocolError(ScorerError):
    """The scoring backend answered with a malformed payload."""
