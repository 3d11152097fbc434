"""HTTP/JSON service: annotation CRUD, review sessions, event streaming.

Request/response bodies reuse the canonical annotation schema. The event
stream is newline-delimited JSON, one event object per line (blank lines
are keepalives). Authentication is a bearer token resolved through a static
token registry mapping token -> participant + role.
"""

from __future__ import annotations

import base64
import json
import queue
from pathlib import Path
from typing import Any, Optional

from fastapi import Depends, FastAPI, Header, Query as QueryParam, Request
from fastapi.responses import JSONResponse, Response, StreamingResponse

from . import codec, minutes
from .acts import (
    ClarificationKind,
    ContentKind,
    ForceKind,
    Polarity,
    RefKind,
    Role,
    Sphere,
    Status,
)
from .errors import (
    AlreadyPublic,
    AnnotationArchived,
    ForbiddenRole,
    ForbiddenTransition,
    InvalidAct,
    InvalidQuery,
    NotJoined,
    ReviewError,
    RoleRequired,
    SessionClosed,
    SessionStillOpen,
    UnknownAnnotation,
    UnknownDocument,
    UnknownSession,
    VersionConflict,
)
from .geometry import MeshFormat, load_mesh
from .geometry.mesh import detect_format
from .sessions import EventKind, SessionManager
from .store import Query, Region, Store

_STATUS_BY_ERROR: dict[type, int] = {
    UnknownDocument: 404,
    UnknownAnnotation: 404,
    UnknownSession: 404,
    RoleRequired: 403,
    ForbiddenRole: 403,
    NotJoined: 403,
    VersionConflict: 409,
    SessionClosed: 409,
    SessionStillOpen: 409,
    AlreadyPublic: 409,
    ForbiddenTransition: 409,
    AnnotationArchived: 409,
}


class AuthError(ReviewError):
    code = "UNAUTHORIZED"


class MalformedBody(ReviewError):
    code = "MALFORMED_BODY"


def load_tokens(path: str | Path) -> dict[str, tuple[str, Role]]:
    """Token file: {"<token>": {"participant": ..., "role": ...}, ...}."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return {
        token: (entry["participant"], Role(entry["role"]))
        for token, entry in raw.items()
    }


def build_app(store: Store, sessions: SessionManager, tokens: dict[str, tuple[str, Role]]) -> FastAPI:
    app = FastAPI(title="meshreview", docs_url=None, redoc_url=None)

    def identity(authorization: Optional[str] = Header(default=None)) -> tuple[str, Role]:
        if authorization is None or not authorization.startswith("Bearer "):
            raise AuthError("missing bearer token")
        token = authorization[len("Bearer ") :].strip()
        if token not in tokens:
            raise AuthError("unknown token")
        return tokens[token]

    @app.exception_handler(ReviewError)
    def on_review_error(_: Request, exc: ReviewError):
        status = 401 if isinstance(exc, AuthError) else _STATUS_BY_ERROR.get(type(exc), 400)
        body: dict[str, Any] = {"error": exc.code, "detail": str(exc)}
        if isinstance(exc, InvalidAct):
            body["violations"] = list(exc.report.violations)
        if isinstance(exc, VersionConflict):
            body["current"] = exc.current
        return JSONResponse(status_code=status, content=body)

    # ------------------------------------------------------------ documents

    @app.get("/documents")
    def list_documents(_: tuple[str, Role] = Depends(identity)):
        return [_document_json(d) for d in store.list_documents()]

    @app.post("/documents")
    def create_document(body: dict, _: tuple[str, Role] = Depends(identity)):
        name = _field(body, "name", str)
        mesh = _decode_mesh(body)
        doc = store.put_document(name, mesh)
        return _document_json(doc)

    @app.get("/documents/{document_id}")
    def get_document(document_id: str, _: tuple[str, Role] = Depends(identity)):
        return _document_json(store.get_document(document_id))

    @app.post("/documents/{document_id}/revisions")
    def add_revision(document_id: str, body: dict, _: tuple[str, Role] = Depends(identity)):
        mesh = _decode_mesh(body)
        revision = store.add_revision(document_id, mesh)
        return {"document": document_id, "revision": revision}

    @app.get("/documents/{document_id}/mesh")
    def get_mesh(
        document_id: str,
        revision: Optional[int] = None,
        _: tuple[str, Role] = Depends(identity),
    ):
        doc = store.get_document(document_id)
        rev = revision if revision is not None else doc.latest_revision
        mesh = store.get_mesh(document_id, rev)
        if mesh is None:
            raise UnknownDocument(f"no stored geometry for {document_id} revision {rev}")
        return {
            "document": document_id,
            "revision": rev,
            "content_hash": mesh.content_hash.hex(),
            "vertices": mesh.vertices.tolist(),
            "faces": mesh.faces.tolist(),
        }

    # ---------------------------------------------------------- annotations

    @app.post("/annotations")
    def create_annotation(body: dict, who: tuple[str, Role] = Depends(identity)):
        participant, role = who
        ann = store.create_annotation(
            participant,
            role,
            _field(body, "document", str),
            _field(body, "revision", int),
            _parse(codec.force_from_json, body.get("force")),
            _parse(_utterance_from_json, body.get("utterance")),
            _parse(codec.anchor_from_json, body.get("anchor")),
            _parse(Sphere, body.get("sphere")),
            [(r["target"], RefKind(r["kind"])) for r in body.get("references", [])],
        )
        return codec.annotation_to_json(ann)

    @app.get("/annotations")
    def query_annotations(
        who: tuple[str, Role] = Depends(identity),
        force_kind: Optional[str] = None,
        clarification_kind: Optional[str] = None,
        polarity: Optional[str] = None,
        content_kind: Optional[str] = None,
        author: Optional[str] = None,
        status: Optional[str] = None,
        sphere: Optional[str] = None,
        document: Optional[str] = None,
        revision: Optional[int] = None,
        text_substring: Optional[str] = None,
        region_center: Optional[str] = QueryParam(default=None, description="x,y,z"),
        region_radius: Optional[float] = None,
    ):
        participant, _ = who
        region = None
        if region_center is not None or region_radius is not None:
            if region_center is None or region_radius is None:
                raise InvalidQuery("region needs both region_center and region_radius")
            try:
                x, y, z = (float(v) for v in region_center.split(","))
            except ValueError:
                raise InvalidQuery("region_center must be 'x,y,z'")
            region = Region(center=(x, y, z), radius=region_radius)
        q = Query(
            force_kind=_parse_opt(ForceKind, force_kind),
            clarification_kind=_parse_opt(ClarificationKind, clarification_kind),
            polarity=_parse_opt(Polarity, polarity),
            content_kind=_parse_opt(ContentKind, content_kind),
            author=author,
            status=_parse_opt(Status, status),
            sphere=_parse_opt(Sphere, sphere),
            document=document,
            revision=revision,
            text_substring=text_substring,
            region=region,
        )
        return [codec.annotation_to_json(a) for a in store.query(q, viewer=participant)]

    @app.post("/annotations/{annotation_id}/replies")
    def add_reply(annotation_id: str, body: dict, who: tuple[str, Role] = Depends(identity)):
        participant, _ = who
        ann = store.append_reply(annotation_id, participant, _field(body, "text", str))
        return codec.annotation_to_json(ann)

    @app.post("/annotations/{annotation_id}/status")
    def change_status(annotation_id: str, body: dict, who: tuple[str, Role] = Depends(identity)):
        participant, role = who
        ann = store.transition(annotation_id, participant, role, _parse(Status, body.get("status")))
        return codec.annotation_to_json(ann)

    @app.post("/annotations/{annotation_id}/publish")
    def publish_annotation(annotation_id: str, who: tuple[str, Role] = Depends(identity)):
        participant, _ = who
        ann = store.publish(annotation_id, participant)
        return codec.annotation_to_json(ann)

    # -------------------------------------------------------------- sessions

    @app.post("/sessions")
    def open_session(body: dict, _: tuple[str, Role] = Depends(identity)):
        chair = _field(body, "chair", str)
        minute_taker = _field(body, "minute_taker", str)
        session = sessions.open_session(
            _field(body, "document", str),
            _field(body, "revision", int),
            chair,
            _role_of(tokens, chair),
            minute_taker,
            _role_of(tokens, minute_taker),
        )
        return _session_json(session)

    @app.post("/sessions/{session_id}/join")
    def join_session(session_id: str, who: tuple[str, Role] = Depends(identity)):
        participant, role = who
        session = sessions.join(session_id, participant, role)
        return _session_json(session)

    @app.post("/sessions/{session_id}/events")
    def post_event(session_id: str, body: dict, who: tuple[str, Role] = Depends(identity)):
        participant, _ = who
        action = _field(body, "action", str)
        if action == "create_annotation":
            event = sessions.act_create_annotation(
                session_id,
                participant,
                _parse(codec.force_from_json, body.get("force")),
                _parse(_utterance_from_json, body.get("utterance")),
                _parse(codec.anchor_from_json, body.get("anchor")),
                _parse(Sphere, body.get("sphere")),
                [(r["target"], RefKind(r["kind"])) for r in body.get("references", [])],
            )
        elif action == "reply":
            event = sessions.act_reply(
                session_id, participant, _field(body, "annotation", str), _field(body, "text", str)
            )
        elif action == "transition_status":
            event = sessions.act_transition(
                session_id,
                participant,
                _field(body, "annotation", str),
                _parse(Status, body.get("status")),
            )
        elif action == "share_viewpoint":
            event = sessions.act_share_viewpoint(
                session_id,
                participant,
                _field(body, "position", list),
                _field(body, "target", list),
                _field(body, "up", list),
            )
        else:
            raise MalformedBody(f"unknown action {action!r}")
        return event.to_wire(participant)

    @app.post("/sessions/{session_id}/close")
    def close_session(session_id: str, who: tuple[str, Role] = Depends(identity)):
        participant, _ = who
        minute_id = sessions.close(session_id, participant)
        return {"session": session_id, "minute_id": minute_id}

    @app.get("/sessions/{session_id}/minute")
    def session_minute(session_id: str, _: tuple[str, Role] = Depends(identity)):
        minute = sessions.minute_for(session_id)
        return Response(content=minutes.render_minute(minute, "json"), media_type="application/json")

    @app.get("/sessions/{session_id}/stream")
    def stream_events(
        session_id: str,
        after: int = 0,
        who: tuple[str, Role] = Depends(identity),
    ):
        participant, _ = who
        sub = sessions.open_subscription(session_id, participant, after)

        def ndjson():
            try:
                closed = False
                for event in sub.backlog:
                    closed = event.kind is EventKind.SESSION_CLOSED
                    yield json.dumps(event.to_wire(participant), sort_keys=True) + "\n"
                    if closed:
                        return
                if sub.live is None:
                    return
                while not closed:
                    try:
                        event = sub.live.get(timeout=15.0)
                    except queue.Empty:
                        yield "\n"  # keepalive
                        continue
                    closed = event.kind is EventKind.SESSION_CLOSED
                    yield json.dumps(event.to_wire(participant), sort_keys=True) + "\n"
            finally:
                sub.close()

        return StreamingResponse(ndjson(), media_type="application/x-ndjson")

    return app


# ----------------------------------------------------------------- helpers


def _field(body: dict, name: str, kind: type):
    if not isinstance(body, dict) or name not in body:
        raise MalformedBody(f"missing field {name!r}")
    value = body[name]
    if kind is int and isinstance(value, bool):
        raise MalformedBody(f"field {name!r} must be {kind.__name__}")
    if not isinstance(value, kind):
        raise MalformedBody(f"field {name!r} must be {kind.__name__}")
    return value


def _parse(parser, value):
    if value is None:
        raise MalformedBody(f"missing value for {getattr(parser, '__name__', 'field')}")
    try:
        return parser(value)
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise MalformedBody(f"malformed value: {exc}")


def _parse_opt(enum_type, value: Optional[str]):
    if value is None:
        return None
    try:
        return enum_type(value)
    except ValueError:
        raise InvalidQuery(f"{value!r} is not a valid {enum_type.__name__}")


def _utterance_from_json(data: dict):
    from .acts import Utterance

    return Utterance(text=str(data["text"]), content_kind=ContentKind(data["content_kind"]))


def _decode_mesh(body: dict):
    try:
        data = base64.b64decode(_field(body, "data_base64", str), validate=True)
    except Exception:
        raise MalformedBody("data_base64 is not valid base64")
    fmt = body.get("format")
    if fmt in (None, "stl"):
        mesh_format = detect_format(data, "x.stl" if fmt == "stl" else "")
    else:
        mesh_format = _parse(MeshFormat, fmt)  # "obj", "stl-binary", "stl-ascii"
    return load_mesh(data, mesh_format)


def _role_of(tokens: dict[str, tuple[str, Role]], participant: str) -> Role:
    for known_participant, role in tokens.values():
        if known_participant == participant:
            return role
    raise RoleRequired(f"participant {participant!r} has no registered role")


def _document_json(doc) -> dict:
    return {
        "id": doc.id,
        "name": doc.name,
        "alive": doc.alive,
        "revisions": [
            {
                "revision": r.revision,
                "content_hash": r.content_hash.hex(),
                "created_at": codec.format_timestamp(r.created_at),
            }
            for r in doc.revisions
        ],
    }


def _session_json(session) -> dict:
    return {
        "id": session.id,
        "document": session.document,
        "revision": session.revision,
        "chair": session.chair,
        "minute_taker": session.minute_taker,
        "participants": {p: role.value for p, role in session.participants.items()},
        "state": session.state.value,
        "event_count": len(session.events),
        "opened_at": codec.format_timestamp(session.opened_at),
        "closed_at": codec.format_timestamp(session.closed_at) if session.closed_at else None,
    }
