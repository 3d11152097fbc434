"""Design-minute compilation and rendering.

A minute is the ordered public record of a review: every public annotation
the session touched, grouped by illocutionary force, each entry paired with
the camera viewpoint that was active when it appeared (or a deterministic
default framing its anchor). Generation is a pure function of the store
snapshot and event log, so regenerating over unchanged state is
byte-identical.
"""

from __future__ import annotations

import dataclasses
import html
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import TYPE_CHECKING, Optional

from . import codec
from .acts import Annotation, ForceKind, Sphere
from .errors import SessionStillOpen, UnknownDocument
from .geometry import Mesh, anchor_to_point, face_normal
from .store import Query, Store

if TYPE_CHECKING:
    from .sessions import ReviewSession

SECTION_ORDER = (
    ForceKind.VALIDATION,
    ForceKind.PROPOSITION,
    ForceKind.EVALUATION,
    ForceKind.CLARIFICATION,
)

_MINUTE_NAMESPACE = uuid.UUID("8a6e2b8c-5f1d-4a79-9a43-2b1347d0f7c2")
_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)


@dataclass(frozen=True)
class Viewpoint:
    position: tuple[float, float, float]
    target: tuple[float, float, float]
    up: tuple[float, float, float]
    source: str  # "shared" or "default"


@dataclass(frozen=True)
class MinuteEntry:
    annotation: Annotation  # snapshot at generation time
    viewpoint: Viewpoint


@dataclass(frozen=True)
class DesignMinute:
    id: str
    session: Optional[str]
    document: str
    revision: int
    generated_at: datetime
    sections: tuple[tuple[ForceKind, tuple[MinuteEntry, ...]], ...]

    def entries(self) -> list[MinuteEntry]:
        return [entry for _, group in self.sections for entry in group]


def default_viewpoint(mesh: Optional[Mesh], annotation: Annotation) -> Viewpoint:
    """Deterministic fallback camera: frame the anchor from 3x the bounding
    sphere radius along the face normal."""
    if mesh is None:
        return Viewpoint((0.0, 0.0, 3.0), (0.0, 0.0, 0.0), (0.0, 1.0, 0.0), "default")
    point = anchor_to_point(mesh, annotation.anchor)
    normal = face_normal(mesh, annotation.anchor.face)
    _, radius = mesh.bounding_sphere()
    position = point + 3.0 * max(radius, 1e-9) * normal
    up = (0.0, 1.0, 0.0) if abs(float(normal[2])) > 1.0 - 1e-6 else (0.0, 0.0, 1.0)
    return Viewpoint(
        tuple(float(x) for x in position),
        tuple(float(x) for x in point),
        up,
        "default",
    )


def generate_minute(
    store: Store,
    session: Optional["ReviewSession"] = None,
    document: Optional[str] = None,
    revision: Optional[int] = None,
    query: Optional[Query] = None,
) -> DesignMinute:
    """Compile a minute from a closed session or an ad-hoc document query."""
    if session is not None:
        return _from_session(store, session)
    if document is None:
        raise ValueError("either a session or a document is required")
    doc = store.get_document(document)  # raises UnknownDocument
    revision = revision if revision is not None else doc.latest_revision
    if doc.hash_at(revision) is None:
        raise UnknownDocument(f"document {document} has no revision {revision}")
    q = query or Query()
    if q.document is None:
        q = dataclasses.replace(q, document=document)
    candidates = [a for a in store.query(q) if a.sphere is Sphere.PUBLIC]
    mesh = store.get_mesh(document, revision)
    entries = {a.id: MinuteEntry(a, default_viewpoint(mesh, a)) for a in candidates}
    generated_at = _latest_timestamp(candidates) or _revision_time(store, document, revision)
    return _assemble(None, document, revision, generated_at, entries)


def _from_session(store: Store, session: "ReviewSession") -> DesignMinute:
    from .sessions import EventKind, SessionState

    if session.state is not SessionState.CLOSED:
        raise SessionStillOpen(f"session {session.id} is still open")

    first_seen: dict[str, int] = {}
    viewpoints: list[tuple[int, Viewpoint]] = []
    for event in session.events:
        ann_id = event.annotation_id()
        if ann_id is not None and ann_id not in first_seen:
            first_seen[ann_id] = event.seq
        if event.kind is EventKind.VIEWPOINT_SHARED:
            p = event.payload
            viewpoints.append(
                (
                    event.seq,
                    Viewpoint(tuple(p["position"]), tuple(p["target"]), tuple(p["up"]), "shared"),
                )
            )

    mesh = store.get_mesh(session.document, session.revision)
    entries: dict[str, MinuteEntry] = {}
    for ann_id, seq in first_seen.items():
        try:
            ann = store.get_annotation(ann_id)
        except Exception:
            continue  # destroyed with its document
        if ann.sphere is not Sphere.PUBLIC:
            continue
        chosen = None
        for vp_seq, vp in viewpoints:
            if vp_seq < seq:
                chosen = vp
        entries[ann_id] = MinuteEntry(ann, chosen or default_viewpoint(mesh, ann))
    return _assemble(session.id, session.document, session.revision, session.closed_at, entries)


def _assemble(
    session_id: Optional[str],
    document: str,
    revision: int,
    generated_at: datetime,
    entries: dict[str, MinuteEntry],
) -> DesignMinute:
    sections = []
    for kind in SECTION_ORDER:
        group = sorted(
            (e for e in entries.values() if e.annotation.force.kind is kind),
            key=lambda e: (e.annotation.created_at, e.annotation.id),
        )
        sections.append((kind, tuple(group)))
    fingerprint = "\n".join(
        [session_id or "", document, str(revision), codec.format_timestamp(generated_at)]
        + [f"{e.annotation.id}:{e.annotation.version}" for _, g in sections for e in g]
    )
    minute_id = str(uuid.uuid5(_MINUTE_NAMESPACE, fingerprint))
    return DesignMinute(
        id=minute_id,
        session=session_id,
        document=document,
        revision=revision,
        generated_at=generated_at,
        sections=tuple(sections),
    )


def _latest_timestamp(annotations) -> Optional[datetime]:
    stamps = [a.created_at for a in annotations]
    stamps += [e.at for a in annotations for e in a.thread]
    return max(stamps) if stamps else None


def _revision_time(store: Store, document: str, revision: int) -> datetime:
    for rev in store.get_document(document).revisions:
        if rev.revision == revision:
            return rev.created_at
    return _EPOCH


# ------------------------------------------------------------------ render


def minute_to_json(minute: DesignMinute) -> dict:
    return {
        "id": minute.id,
        "session": minute.session,
        "document": minute.document,
        "revision": minute.revision,
        "generated_at": codec.format_timestamp(minute.generated_at),
        "sections": [
            {
                "force_kind": kind.value,
                "entries": [_entry_to_json(e) for e in group],
            }
            for kind, group in minute.sections
        ],
    }


def _entry_to_json(entry: MinuteEntry) -> dict:
    ann = entry.annotation
    return {
        "annotation": {
            "id": ann.id,
            "force": codec.force_to_json(ann.force),
            "utterance": {"text": ann.utterance.text, "content_kind": ann.utterance.content_kind.value},
            "status": ann.status.value,
            "author": ann.author,
            "anchor": codec.anchor_to_json(ann.anchor),
        },
        "viewpoint": {
            "position": list(entry.viewpoint.position),
            "target": list(entry.viewpoint.target),
            "up": list(entry.viewpoint.up),
            "source": entry.viewpoint.source,
        },
        "thread": [
            {"author": e.author, "at": codec.format_timestamp(e.at), "text": e.text}
            for e in ann.thread
        ],
    }


def render_minute(minute: DesignMinute, fmt: str = "json") -> bytes:
    if fmt == "json":
        return codec.canonical_json(minute_to_json(minute))
    if fmt == "html":
        return _render_html(minute)
    raise ValueError(f"unknown minute format {fmt!r}")


_HTML_STYLE = (
    "body{font-family:sans-serif;margin:2rem;max-width:60rem}"
    "h2{border-bottom:1px solid #ccc;padding-bottom:.25rem}"
    ".entry{margin:1rem 0;padding:.75rem;border:1px solid #ddd;border-radius:4px}"
    ".meta{color:#555;font-size:.85rem}"
    ".thread{margin-top:.5rem;padding-left:1rem;border-left:3px solid #eee}"
    ".viewpoint{font-family:monospace;font-size:.8rem;color:#777}"
)


def _render_html(minute: DesignMinute) -> bytes:
    esc = html.escape
    lines = [
        "<!DOCTYPE html>",
        '<html lang="en">',
        "<head>",
        '<meta charset="utf-8">',
        f"<title>Design minute {esc(minute.id)}</title>",
        f"<style>{_HTML_STYLE}</style>",
        "</head>",
        "<body>",
        "<h1>Design minute</h1>",
        '<p class="meta">',
        f"minute {esc(minute.id)}<br>",
        f"session {esc(minute.session or 'ad hoc')}<br>",
        f"document {esc(minute.document)} revision {minute.revision}<br>",
        f"generated {esc(codec.format_timestamp(minute.generated_at))}",
        "</p>",
    ]
    for kind, group in minute.sections:
        lines.append(f"<section><h2>{esc(kind.value)}</h2>")
        for entry in group:
            ann = entry.annotation
            force = ann.force.kind.value
            if ann.force.clarification_kind is not None:
                force += f" ({ann.force.clarification_kind.value})"
            if ann.force.polarity is not None:
                force += f" [{ann.force.polarity.value}]"
            vp = entry.viewpoint
            lines.append('<div class="entry">')
            lines.append(f"<p>{esc(ann.utterance.text)}</p>")
            lines.append(
                f'<p class="meta">{esc(force)} &middot; {esc(ann.utterance.content_kind.value)}'
                f" &middot; {esc(ann.status.value)} &middot; by {esc(ann.author)}"
                f" &middot; face {ann.anchor.face}</p>"
            )
            lines.append(
                f'<p class="viewpoint">camera {vp.source}: position {_fmt3(vp.position)}'
                f" target {_fmt3(vp.target)} up {_fmt3(vp.up)}</p>"
            )
            if ann.thread:
                lines.append('<div class="thread">')
                for reply in ann.thread:
                    lines.append(
                        f'<p>{esc(reply.text)}<br><span class="meta">{esc(reply.author)}, '
                        f"{esc(codec.format_timestamp(reply.at))}</span></p>"
                    )
                lines.append("</div>")
            lines.append("</div>")
        lines.append("</section>")
    lines.append("</body>")
    lines.append("</html>")
    return ("\n".join(lines) + "\n").encode("utf-8")


def _fmt3(v: tuple[float, float, float]) -> str:
    return "(" + ", ".join(repr(float(x)) for x in v) + ")"
