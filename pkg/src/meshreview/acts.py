"""Annotation act model.

An annotation is a pair: an illocutionary force (the author's intention)
applied to an utterance (the content). The grammar below decides which
force/utterance/reference combinations are well formed, and the lifecycle
operations move annotations through a role-gated status machine.

All types are immutable values; operations return updated copies.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from datetime import datetime
from enum import Enum
from typing import Optional, Sequence

from .errors import (
    AlreadyPublic,
    AnnotationArchived,
    EmptyReply,
    ForbiddenRole,
    ForbiddenTransition,
    InvalidAct,
    InvalidAnchor,
)
from .geometry import Anchor, Mesh


class ForceKind(str, Enum):
    PROPOSITION = "Proposition"
    CLARIFICATION = "Clarification"
    EVALUATION = "Evaluation"
    VALIDATION = "Validation"


class ClarificationKind(str, Enum):
    SOLUTION = "Solution"
    PROBLEM = "Problem"


class Polarity(str, Enum):
    POSITIVE = "Positive"
    NEGATIVE = "Negative"
    NEUTRAL = "Neutral"


class ContentKind(str, Enum):
    CONSTRAINT = "Constraint"
    ACTION = "Action"
    DECISION = "Decision"
    OTHER = "Other"


class Sphere(str, Enum):
    PRIVATE = "Private"
    PUBLIC = "Public"


class Status(str, Enum):
    DRAFT = "Draft"
    OPEN = "Open"
    ANSWERED = "Answered"
    VALIDATED = "Validated"
    REJECTED = "Rejected"
    ARCHIVED = "Archived"


class RefKind(str, Enum):
    ANSWERS = "Answers"
    VALIDATES = "Validates"
    CLARIFIES = "Clarifies"


class Role(str, Enum):
    ARCHITECT = "Architect"
    PMS = "PMS"
    DESIGNER = "Designer"
    SCRIPT_WRITER = "ScriptWriter"
    INDUSTRIAL = "Industrial"


# Violation codes reported by validate_act. Deliberately data, not
# exceptions: a candidate act failing the grammar is a normal outcome.
EMPTY_UTTERANCE = "EMPTY_UTTERANCE"
CLARIFICATION_KIND_REQUIRED = "CLARIFICATION_KIND_REQUIRED"
CLARIFICATION_KIND_FORBIDDEN = "CLARIFICATION_KIND_FORBIDDEN"
POLARITY_FORBIDDEN = "POLARITY_FORBIDDEN"
VALIDATES_SOURCE_NOT_VALIDATION = "VALIDATES_SOURCE_NOT_VALIDATION"
VALIDATES_TARGET_NOT_PROPOSITION = "VALIDATES_TARGET_NOT_PROPOSITION"
ANSWERS_SOURCE_NOT_PROPOSITION = "ANSWERS_SOURCE_NOT_PROPOSITION"

ALL_VIOLATION_CODES = (
    EMPTY_UTTERANCE,
    CLARIFICATION_KIND_REQUIRED,
    CLARIFICATION_KIND_FORBIDDEN,
    POLARITY_FORBIDDEN,
    VALIDATES_SOURCE_NOT_VALIDATION,
    VALIDATES_TARGET_NOT_PROPOSITION,
    ANSWERS_SOURCE_NOT_PROPOSITION,
)


@dataclass(frozen=True)
class IllocutionaryForce:
    """The intention behind an annotation.

    Field coupling is checked by validate_act, not the constructor, so that
    malformed candidates can be represented and classified.
    """

    kind: ForceKind
    clarification_kind: Optional[ClarificationKind] = None
    polarity: Optional[Polarity] = None


@dataclass(frozen=True)
class Utterance:
    """The content an annotation conveys."""

    text: str
    content_kind: ContentKind = ContentKind.OTHER


@dataclass(frozen=True)
class DiscussionEntry:
    author: str
    at: datetime
    text: str


@dataclass(frozen=True)
class Reference:
    """Directed link from the annotation carrying it to another annotation."""

    target: str
    kind: RefKind


@dataclass(frozen=True)
class ResolvedReference:
    """Reference plus the force kind of its target, for grammar checking."""

    target: str
    target_kind: ForceKind
    kind: RefKind


@dataclass(frozen=True)
class StatusChange:
    """Audit record of one status transition."""

    from_status: Status
    to_status: Status
    actor: str
    at: datetime


@dataclass(frozen=True)
class Annotation:
    id: str
    document: str
    document_revision: int
    author: str
    created_at: datetime
    force: IllocutionaryForce
    utterance: Utterance
    anchor: Anchor
    sphere: Sphere
    status: Status
    thread: tuple[DiscussionEntry, ...] = ()
    references: tuple[Reference, ...] = ()
    orphaned: bool = False
    version: int = 0
    audit: tuple[StatusChange, ...] = field(default=(), compare=False)


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_act(
    force: IllocutionaryForce,
    utterance: Utterance,
    references: Sequence[tuple[ForceKind, RefKind]] = (),
) -> ValidationReport:
    """Classify a candidate act against the grammar.

    Total over candidate inputs; reports every violated rule, not just the
    first. `references` pairs each outgoing reference's target force kind
    with the reference kind.
    """
    violations: list[str] = []

    if not utterance.text or not utterance.text.strip():
        violations.append(EMPTY_UTTERANCE)

    if force.kind is ForceKind.CLARIFICATION:
        if force.clarification_kind is None:
            violations.append(CLARIFICATION_KIND_REQUIRED)
    elif force.clarification_kind is not None:
        violations.append(CLARIFICATION_KIND_FORBIDDEN)

    if force.polarity is not None and force.kind is not ForceKind.EVALUATION:
        violations.append(POLARITY_FORBIDDEN)

    for target_kind, ref_kind in references:
        if ref_kind is RefKind.VALIDATES:
            if force.kind is not ForceKind.VALIDATION:
                _append_once(violations, VALIDATES_SOURCE_NOT_VALIDATION)
            if target_kind is not ForceKind.PROPOSITION:
                _append_once(violations, VALIDATES_TARGET_NOT_PROPOSITION)
        elif ref_kind is RefKind.ANSWERS:
            if force.kind is not ForceKind.PROPOSITION:
                _append_once(violations, ANSWERS_SOURCE_NOT_PROPOSITION)
        # Clarifies may originate anywhere and target any annotation.

    return ValidationReport(violations=tuple(violations))


def _append_once(violations: list[str], code: str) -> None:
    if code not in violations:
        violations.append(code)


def check_anchor(mesh: Mesh, anchor: Anchor) -> None:
    """Raise InvalidAnchor unless `anchor` is valid for `mesh`."""
    if not 0 <= anchor.face < len(mesh.faces):
        raise InvalidAnchor(f"face {anchor.face} out of range (mesh has {len(mesh.faces)} faces)")
    b0, b1, b2 = anchor.bary
    if min(b0, b1, b2) < -1e-12:
        raise InvalidAnchor(f"negative barycentric coordinate in {anchor.bary}")
    if abs(b0 + b1 + b2 - 1.0) > 1e-9:
        raise InvalidAnchor(f"barycentric coordinates {anchor.bary} do not sum to 1")


def create_annotation(
    author: str,
    role: Role,
    document: str,
    revision: int,
    force: IllocutionaryForce,
    utterance: Utterance,
    anchor: Anchor,
    sphere: Sphere,
    *,
    mesh: Mesh,
    annotation_id: str,
    created_at: datetime,
    references: Sequence[ResolvedReference] = (),
) -> Annotation:
    """Build a well-formed annotation or raise.

    The caller (normally the store) resolves the document's mesh, the
    reference targets' force kinds, the fresh id, and the clock; this keeps
    the model a pure value layer. Any role may create annotations.
    """
    Role(role)  # reject unknown roles early
    report = validate_act(force, utterance, [(r.target_kind, r.kind) for r in references])
    if not report.ok:
        raise InvalidAct(report)
    check_anchor(mesh, anchor)
    return Annotation(
        id=annotation_id,
        document=document,
        document_revision=revision,
        author=author,
        created_at=created_at,
        force=force,
        utterance=utterance,
        anchor=anchor,
        sphere=Sphere(sphere),
        status=Status.DRAFT if sphere is Sphere.PRIVATE else Status.OPEN,
        thread=(),
        references=tuple(Reference(r.target, r.kind) for r in references),
    )


def append_reply(annotation: Annotation, author: str, text: str, at: datetime) -> Annotation:
    """Append a discussion entry; prior entries are never altered.

    Entry timestamps are clamped to keep the thread non-decreasing even if
    callers' clocks disagree.
    """
    if not text or not text.strip():
        raise EmptyReply("reply text must be non-empty")
    if annotation.status is Status.ARCHIVED:
        raise AnnotationArchived(f"annotation {annotation.id} is archived")
    if annotation.thread and at < annotation.thread[-1].at:
        at = annotation.thread[-1].at
    entry = DiscussionEntry(author=author, at=at, text=text)
    return replace(annotation, thread=annotation.thread + (entry,))


# Status machine: (from, to) -> (roles allowed, or None for any role).
# The Open -> Answered edge additionally requires discussion: at least one
# incoming Answers reference or one thread entry.
_ANY = None
TRANSITIONS: dict[tuple[Status, Status], Optional[frozenset[Role]]] = {
    (Status.DRAFT, Status.OPEN): _ANY,
    (Status.OPEN, Status.ANSWERED): _ANY,
    (Status.OPEN, Status.VALIDATED): frozenset({Role.ARCHITECT}),
    (Status.ANSWERED, Status.VALIDATED): frozenset({Role.ARCHITECT}),
    (Status.OPEN, Status.REJECTED): frozenset({Role.ARCHITECT}),
    (Status.ANSWERED, Status.REJECTED): frozenset({Role.ARCHITECT}),
    (Status.VALIDATED, Status.ARCHIVED): frozenset({Role.PMS}),
    (Status.REJECTED, Status.ARCHIVED): frozenset({Role.PMS}),
}


def transition_status(
    annotation: Annotation,
    actor: str,
    actor_role: Role,
    new_status: Status,
    at: datetime,
    *,
    incoming_answers: int = 0,
) -> Annotation:
    """Move the annotation along one edge of the status machine.

    `incoming_answers` is the number of annotations holding an Answers
    reference targeting this one (store knowledge, injected by the caller).
    """
    edge = (annotation.status, Status(new_status))
    if edge not in TRANSITIONS:
        raise ForbiddenTransition(f"{edge[0].value} -> {edge[1].value} is not a permitted transition")
    allowed = TRANSITIONS[edge]
    if allowed is not None and actor_role not in allowed:
        raise ForbiddenRole(
            f"{edge[0].value} -> {edge[1].value} requires role "
            f"{' or '.join(sorted(r.value for r in allowed))}, got {Role(actor_role).value}"
        )
    if edge == (Status.OPEN, Status.ANSWERED) and incoming_answers < 1 and not annotation.thread:
        raise ForbiddenTransition(
            "Open -> Answered requires at least one Answers reference or thread entry"
        )
    change = StatusChange(from_status=edge[0], to_status=edge[1], actor=actor, at=at)
    return replace(annotation, status=edge[1], audit=annotation.audit + (change,))


def publish(annotation: Annotation, actor: str, at: datetime) -> Annotation:
    """Make a private annotation public. Public -> private does not exist."""
    if annotation.sphere is Sphere.PUBLIC:
        raise AlreadyPublic(f"annotation {annotation.id} is already public")
    updated = replace(annotation, sphere=Sphere.PUBLIC)
    if updated.status is Status.DRAFT:
        change = StatusChange(Status.DRAFT, Status.OPEN, actor, at)
        updated = replace(updated, status=Status.OPEN, audit=updated.audit + (change,))
    return updated
