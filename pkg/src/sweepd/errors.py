"""Exception hierarchy shared across the package."""


class SweepdError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(SweepdError):
    """Bad user input: wrong types, unknown names, malformed definitions."""


class UnknownParameter(ValidationError):
    pass


class MissingParameter(ValidationError):
    pass


class TypeMismatch(ValidationError):
    pass


class IllegalTransition(SweepdError):
    pass


class NotFound(SweepdError):
    pass


class DuplicateKey(SweepdError):
    pass


class AlreadySealed(SweepdError):
    pass


class UnknownHost(SweepdError):
    pass


class SubmitRejected(SweepdError):
    pass


class BackendUnreachable(SweepdError):
    pass


class TransportFailure(SweepdError):
    pass


class ArchiveMissing(SweepdError):
    pass


class CorruptArchive(SweepdError):
    pass


class MalformedStatusFile(SweepdError):
    pass


class ScopeMismatch(SweepdError):
    pass


class TargetNotReady(SweepdError):
    pass


class CorruptSnapshot(SweepdError):
    pass


class DigestConflict(SweepdError):
    pass


class ReadOnlyMode(SweepdError):
    """Raised when a mutating operation is attempted on a read-only service."""
