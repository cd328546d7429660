class TraceGenError(Exception):
    """Base class for errors raised by tracegen."""


class InputError(TraceGenError, ValueError):
    """Malformed input: unknown letters, bad graph documents, bad arguments."""


class DomainError(TraceGenError, ValueError):
    """A parameter lies outside the region where a law or sampler is defined,
    typically ``p >= p_S``."""
