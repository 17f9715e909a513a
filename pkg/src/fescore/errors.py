"""Exception types shared across the package."""


class FescoreError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatch(FescoreError, ValueError):
    """Vector/matrix dimensions inconsistent with the object they meet."""


class MessageBoundError(FescoreError, ValueError):
    """Plaintext entry exceeds the configured message bound."""


class DlogOutOfRangeError(FescoreError):
    """dlog out of range: no exponent within the configured bound.

    Signals a quantization-bound misconfiguration; never a silent wrong
    answer.
    """


class KeyFunctionMismatch(FescoreError):
    """The function matrix presented at decryption does not match the key."""


class ConfigDigestMismatch(FescoreError):
    """Quantization-config digest differs between producer and consumer."""


class BoundConfigError(FescoreError, ValueError):
    """Derived score bound exceeds the configured dlog ceiling."""


class DegenerateDatasetError(FescoreError):
    """Cleaning removed every row or every feature column."""


class TrainingDivergence(FescoreError):
    """Loss became non-finite during training."""


class ProtocolError(FescoreError):
    """Malformed or unexpected wire envelope."""


class ServiceConnectionError(FescoreError):
    """Could not reach or keep a connection to a remote service."""
