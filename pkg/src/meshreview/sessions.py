"""Synchronous review sessions: participants, ordered event log, live fan-out.

Each session owns an append-only event log with a contiguous sequence number
starting at 1. Appends are serialized per session, so every subscriber sees
the identical total order with no gaps. Events that would reveal a private
annotation are delivered to non-owners as redacted stubs: the sequence stays
contiguous, the content stays invisible.
"""

from __future__ import annotations

import queue
import threading
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Iterator, Optional

from . import codec, minutes
from .acts import RefKind, Role, Sphere, Status
from .errors import (
    NotJoined,
    RoleRequired,
    SessionClosed,
    SessionStillOpen,
    UnknownDocument,
    UnknownSession,
)
from .store import Store


class SessionState(str, Enum):
    OPEN = "Open"
    CLOSED = "Closed"


class EventKind(str, Enum):
    JOINED = "Joined"
    LEFT = "Left"
    ANNOTATION_CREATED = "AnnotationCreated"
    REPLY_ADDED = "ReplyAdded"
    STATUS_CHANGED = "StatusChanged"
    VIEWPOINT_SHARED = "ViewpointShared"
    SESSION_CLOSED = "SessionClosed"


@dataclass(frozen=True)
class SessionEvent:
    seq: int
    at: datetime
    kind: EventKind
    payload: dict
    # Owner of the private annotation this event reveals, if any. Non-owners
    # receive a redacted stub in its place.
    private_owner: Optional[str] = None

    def annotation_id(self) -> Optional[str]:
        if self.kind is EventKind.ANNOTATION_CREATED:
            return self.payload["annotation"]["id"]
        if self.kind in (EventKind.REPLY_ADDED, EventKind.STATUS_CHANGED):
            return self.payload["annotation_id"]
        return None

    def to_wire(self, subscriber: Optional[str]) -> dict:
        payload = self.payload
        if self.private_owner is not None and subscriber != self.private_owner:
            payload = {"redacted": True}
        return {
            "seq": self.seq,
            "at": codec.format_timestamp(self.at),
            "kind": self.kind.value,
            "payload": payload,
        }


class ReviewSession:
    """Mutable session state; all access goes through its lock."""

    def __init__(
        self,
        session_id: str,
        document: str,
        revision: int,
        chair: str,
        minute_taker: str,
        opened_at: datetime,
    ):
        self.id = session_id
        self.document = document
        self.revision = revision
        self.chair = chair
        self.minute_taker = minute_taker
        self.participants: dict[str, Role] = {chair: Role.ARCHITECT, minute_taker: Role.PMS}
        self.state = SessionState.OPEN
        self.events: list[SessionEvent] = []
        self.opened_at = opened_at
        self.closed_at: Optional[datetime] = None
        self.minute_id: Optional[str] = None
        self.lock = threading.Lock()
        self.subscribers: list[queue.SimpleQueue] = []


class SessionManager:
    """Opens sessions, routes acts through the store, fans events out."""

    def __init__(
        self,
        store: Store,
        data_dir: Optional[str | Path] = None,
        clock: Callable[[], datetime] = lambda: datetime.now(timezone.utc),
        id_factory: Callable[[], str] = lambda: str(uuid.uuid4()),
    ):
        self._store = store
        self._clock = clock
        self._id_factory = id_factory
        self._sessions: dict[str, ReviewSession] = {}
        self._minutes: dict[str, minutes.DesignMinute] = {}
        self._lock = threading.Lock()
        self._minutes_dir: Optional[Path] = None
        if data_dir is not None:
            self._minutes_dir = Path(data_dir) / "minutes"
            self._minutes_dir.mkdir(parents=True, exist_ok=True)

    # ------------------------------------------------------------ lifecycle

    def open_session(
        self,
        document: str,
        revision: int,
        chair: str,
        chair_role: Role,
        minute_taker: str,
        minute_taker_role: Role,
    ) -> ReviewSession:
        doc = self._store.get_document(document)
        if doc.hash_at(revision) is None:
            raise UnknownDocument(f"document {document} has no revision {revision}")
        if chair_role is not Role.ARCHITECT:
            raise RoleRequired("the session chair must hold the Architect role")
        if minute_taker_role is not Role.PMS:
            raise RoleRequired("the minute taker must hold the PMS role")
        session = ReviewSession(
            session_id=self._id_factory(),
            document=document,
            revision=revision,
            chair=chair,
            minute_taker=minute_taker,
            opened_at=self._clock(),
        )
        with self._lock:
            self._sessions[session.id] = session
        return session

    def get_session(self, session_id: str) -> ReviewSession:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise UnknownSession(f"no session {session_id}")
        return session

    def join(self, session_id: str, participant: str, role: Role) -> ReviewSession:
        session = self.get_session(session_id)
        with session.lock:
            if session.state is SessionState.CLOSED:
                raise SessionClosed(f"session {session_id} is closed")
            if participant in session.participants:
                return session  # idempotent re-join
            if role is Role.ARCHITECT and participant != session.chair:
                raise RoleRequired("a session has exactly one Architect, its chair")
            session.participants[participant] = Role(role)
            self._append(session, EventKind.JOINED, {"participant": participant, "role": role.value})
            return session

    def leave(self, session_id: str, participant: str) -> None:
        session = self.get_session(session_id)
        with session.lock:
            self._require_joined(session, participant)
            if session.state is SessionState.CLOSED:
                raise SessionClosed(f"session {session_id} is closed")
            del session.participants[participant]
            self._append(session, EventKind.LEFT, {"participant": participant})

    def close(self, session_id: str, actor: str) -> str:
        """Close the session, compile and persist its minute, return its id."""
        session = self.get_session(session_id)
        with session.lock:
            if session.state is SessionState.CLOSED:
                raise SessionClosed(f"session {session_id} is already closed")
            if actor not in (session.chair, session.minute_taker):
                raise RoleRequired("only the chair or the minute taker may close a session")
            session.state = SessionState.CLOSED
            session.closed_at = self._clock()
            minute = minutes.generate_minute(self._store, session=session)
            self._minutes[minute.id] = minute
            session.minute_id = minute.id
            if self._minutes_dir is not None:
                path = self._minutes_dir / f"{minute.id}.json"
                path.write_bytes(minutes.render_minute(minute, "json"))
            self._append(
                session, EventKind.SESSION_CLOSED, {"minute_id": minute.id}, allow_closed=True
            )
            return minute.id

    def minute_for(self, session_id: str) -> minutes.DesignMinute:
        session = self.get_session(session_id)
        with session.lock:
            if session.state is not SessionState.CLOSED or session.minute_id is None:
                raise SessionStillOpen(f"session {session_id} has no minute yet")
            return self._minutes[session.minute_id]

    def get_minute(self, minute_id: str) -> Optional[minutes.DesignMinute]:
        return self._minutes.get(minute_id)

    # ----------------------------------------------------------------- acts

    def act_create_annotation(
        self,
        session_id: str,
        participant: str,
        force,
        utterance,
        anchor,
        sphere: Sphere,
        references: Iterable[tuple[str, RefKind]] = (),
    ) -> SessionEvent:
        session = self.get_session(session_id)
        with session.lock:
            role = self._require_open_and_joined(session, participant)
            ann = self._store.create_annotation(
                participant,
                role,
                session.document,
                session.revision,
                force,
                utterance,
                anchor,
                sphere,
                references,
            )
            return self._append(
                session,
                EventKind.ANNOTATION_CREATED,
                {"annotation": codec.annotation_to_json(ann)},
                private_owner=participant if ann.sphere is Sphere.PRIVATE else None,
            )

    def act_reply(self, session_id: str, participant: str, annotation_id: str, text: str) -> SessionEvent:
        session = self.get_session(session_id)
        with session.lock:
            self._require_open_and_joined(session, participant)
            ann = self._store.append_reply(annotation_id, participant, text)
            entry = ann.thread[-1]
            return self._append(
                session,
                EventKind.REPLY_ADDED,
                {
                    "annotation_id": ann.id,
                    "entry": {
                        "author": entry.author,
                        "at": codec.format_timestamp(entry.at),
                        "text": entry.text,
                    },
                },
                private_owner=ann.author if ann.sphere is Sphere.PRIVATE else None,
            )

    def act_transition(
        self, session_id: str, participant: str, annotation_id: str, new_status: Status
    ) -> SessionEvent:
        session = self.get_session(session_id)
        with session.lock:
            role = self._require_open_and_joined(session, participant)
            ann = self._store.transition(annotation_id, participant, role, new_status)
            change = ann.audit[-1]
            return self._append(
                session,
                EventKind.STATUS_CHANGED,
                {
                    "annotation_id": ann.id,
                    "from_status": change.from_status.value,
                    "to_status": change.to_status.value,
                    "actor": participant,
                },
                private_owner=ann.author if ann.sphere is Sphere.PRIVATE else None,
            )

    def act_share_viewpoint(
        self,
        session_id: str,
        participant: str,
        position: tuple[float, float, float],
        target: tuple[float, float, float],
        up: tuple[float, float, float],
    ) -> SessionEvent:
        session = self.get_session(session_id)
        with session.lock:
            self._require_open_and_joined(session, participant)
            return self._append(
                session,
                EventKind.VIEWPOINT_SHARED,
                {
                    "by": participant,
                    "position": [float(x) for x in position],
                    "target": [float(x) for x in target],
                    "up": [float(x) for x in up],
                },
            )

    # ---------------------------------------------------------- event plane

    def _require_joined(self, session: ReviewSession, participant: str) -> Role:
        role = session.participants.get(participant)
        if role is None:
            raise NotJoined(f"{participant} has not joined session {session.id}")
        return role

    def _require_open_and_joined(self, session: ReviewSession, participant: str) -> Role:
        if session.state is SessionState.CLOSED:
            raise SessionClosed(f"session {session.id} is closed")
        return self._require_joined(session, participant)

    def _append(
        self,
        session: ReviewSession,
        kind: EventKind,
        payload: dict,
        private_owner: Optional[str] = None,
        allow_closed: bool = False,
    ) -> SessionEvent:
        # caller holds session.lock
        if session.state is SessionState.CLOSED and not allow_closed:
            raise SessionClosed(f"session {session.id} is closed")
        event = SessionEvent(
            seq=len(session.events) + 1,
            at=self._clock(),
            kind=kind,
            payload=payload,
            private_owner=private_owner,
        )
        session.events.append(event)
        for q in session.subscribers:
            q.put(event)
        return event

    def open_subscription(self, session_id: str, participant: str, after: int = 0) -> "Subscription":
        """Snapshot the backlog past `after` and register for live events.

        Snapshot and registration happen under the session lock, so the
        union of backlog and live queue is exactly the gap-free suffix of
        the log. Callers must close() the subscription.
        """
        session = self.get_session(session_id)
        with session.lock:
            self._require_joined(session, participant)
            backlog = [e for e in session.events if e.seq > after]
            live: Optional[queue.SimpleQueue] = None
            if session.state is not SessionState.CLOSED and not any(
                e.kind is EventKind.SESSION_CLOSED for e in backlog
            ):
                live = queue.SimpleQueue()
                session.subscribers.append(live)
            return Subscription(session=session, participant=participant, backlog=backlog, live=live)

    def subscribe(self, session_id: str, participant: str, after: int = 0) -> Iterator[dict]:
        """Wire events from seq `after`+1 onward: catch-up, then live.

        Ends after the SessionClosed event; redaction is per subscriber.
        """
        sub = self.open_subscription(session_id, participant, after)

        def stream() -> Iterator[dict]:
            try:
                for event in sub.backlog:
                    yield event.to_wire(sub.participant)
                    if event.kind is EventKind.SESSION_CLOSED:
                        return
                if sub.live is None:
                    return
                while True:
                    event = sub.live.get()
                    yield event.to_wire(sub.participant)
                    if event.kind is EventKind.SESSION_CLOSED:
                        return
            finally:
                sub.close()

        return stream()


@dataclass
class Subscription:
    """One subscriber's view: catch-up backlog plus a live event queue."""

    session: ReviewSession
    participant: str
    backlog: list[SessionEvent]
    live: Optional[queue.SimpleQueue]

    def close(self) -> None:
        if self.live is not None:
            with self.session.lock:
                if self.live in self.session.subscribers:
                    self.session.subscribers.remove(self.live)
            self.live = None
