"""Exception types shared across the package."""


class PneumyoError(Exception):
    """Base class for all package errors."""


class WrongLength(PneumyoError, ValueError):
    """A fixed-size notification had the wrong number of bytes."""


class BodyTooLong(PneumyoError, ValueError):
    """Bridge message body exceeds the 64-byte cap."""


class CrcMismatch(PneumyoError, ValueError):
    """Frame checksum did not match its contents."""


class CobsMalformed(PneumyoError, ValueError):
    """Frame byte-stuffing was structurally invalid."""


class LengthMismatch(PneumyoError, ValueError):
    """Frame length field disagrees with the actual body."""


class UnknownType(PneumyoError, ValueError):
    """Frame carried an unrecognized type code."""


class NonMonotonicTime(PneumyoError, ValueError):
    """A timestamp moved backwards."""


class DomainError(PneumyoError, ValueError):
    """A physical quantity left its valid domain."""


class NoConvergence(PneumyoError, ArithmeticError):
    """The equilibrium solver failed to converge (pathological config)."""


class ConfigInvalid(PneumyoError, ValueError):
    """Configuration file or value rejected."""


class TraceMalformed(PneumyoError, ValueError):
    """Input trace file rejected; message names the offending line."""
