"""Exception hierarchy shared across the pipeline."""


class PipelineError(Exception):
    """Base class for all errors raised by this package."""


class CorpusError(PipelineError):
    """Malformed or inconsistent corpus / vocabulary input."""


class SelectionError(PipelineError):
    """Pivot token or sentence sampling cannot satisfy its request."""


class TransportError(PipelineError):
    """Backend unreachable or overloaded; the call may be retried."""


class ProtocolError(PipelineError):
    """Backend answered, but the response violates the wire contract."""


class ConfigError(PipelineError):
    """Invalid run configuration, or a resume against a different config."""
