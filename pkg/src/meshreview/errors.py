"""Exception hierarchy shared by the model, store, and service layers."""

from __future__ import annotations


class ReviewError(Exception):
    """Base class; `code` is the stable machine-readable identifier."""

    code = "ERROR"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)


class InvalidAct(ReviewError):
    code = "INVALID_ACT"

    def __init__(self, report):
        self.report = report
        super().__init__(f"invalid act: {', '.join(report.violations)}")


class UnknownDocument(ReviewError):
    code = "UNKNOWN_DOCUMENT"


class UnknownAnnotation(ReviewError):
    code = "UNKNOWN_ANNOTATION"


class InvalidAnchor(ReviewError):
    code = "INVALID_ANCHOR"


class EmptyReply(ReviewError):
    code = "EMPTY_REPLY"


class AnnotationArchived(ReviewError):
    code = "ANNOTATION_ARCHIVED"


class ForbiddenTransition(ReviewError):
    code = "FORBIDDEN_TRANSITION"


class ForbiddenRole(ReviewError):
    code = "FORBIDDEN_ROLE"


class AlreadyPublic(ReviewError):
    code = "ALREADY_PUBLIC"


class VersionConflict(ReviewError):
    code = "VERSION_CONFLICT"

    def __init__(self, current: int):
        self.current = current
        super().__init__(f"stale version, current is {current}")


class InvalidQuery(ReviewError):
    code = "INVALID_QUERY"


class SchemaUnsupported(ReviewError):
    code = "SCHEMA_UNSUPPORTED"


class HashMismatch(ReviewError):
    code = "HASH_MISMATCH"


class ParseError(ReviewError):
    code = "PARSE_ERROR"

    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} (byte offset {offset})")


class EmptyMesh(ReviewError):
    code = "EMPTY_MESH"


class SessionClosed(ReviewError):
    code = "SESSION_CLOSED"


class SessionStillOpen(ReviewError):
    code = "SESSION_STILL_OPEN"


class NotJoined(ReviewError):
    code = "NOT_JOINED"


class RoleRequired(ReviewError):
    code = "ROLE_REQUIRED"


class UnknownSession(ReviewError):
    code = "UNKNOWN_SESSION"
