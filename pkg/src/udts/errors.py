"""Exception hierarchy.

Detected type errors are never raised: an undefined decode is a value
(``UNDEFINED``) and a stuck run is an ``Outcome``.  Everything here signals a
caller bug or an exhausted resource.
"""


class UdtsError(Exception):
    pass


class OutOfRange(UdtsError, IndexError):
    pass


class NoFreeBits(UdtsError):
    pass


class ValueNotInV(UdtsError, ValueError):
    pass


class AddressNotAligned(UdtsError, ValueError):
    pass


class LengthMismatch(UdtsError, ValueError):
    pass


class EqualPair(UdtsError, ValueError):
    pass


class NoUndefinedRep(UdtsError, ValueError):
    pass


class EmptyInput(UdtsError, ValueError):
    pass


class SizeMismatch(UdtsError, ValueError):
    pass


class BoundExceeded(UdtsError):
    """An enumeration would exceed its configured bound."""


class CapExceeded(BoundExceeded):
    """The product of family sizes exceeds the verification cap."""


class IllFormedProgram(UdtsError, ValueError):
    pass


class FormatError(UdtsError, ValueError):
    """A JSON input does not follow the expected schema."""
