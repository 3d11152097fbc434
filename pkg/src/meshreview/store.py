"""Versioned document and annotation store.

Single-file embedded persistence: an append-only JSONL log plus mesh blobs,
with the full index rebuilt in memory on open. Concurrent writers are
serialized by one lock and resolved by optimistic per-annotation versions;
readers see consistent snapshots because stored values are immutable.

Visibility policy lives at the service layer; the store only exposes a
`viewer` parameter that hides other participants' private annotations.
"""

from __future__ import annotations

import bisect
import json
import threading
import uuid
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable, Optional

import numpy as np

from . import acts, codec
from .acts import Annotation, ForceKind, RefKind, ResolvedReference, Role, Sphere, Status
from .errors import (
    HashMismatch,
    InvalidAct,
    InvalidAnchor,
    InvalidQuery,
    SchemaUnsupported,
    UnknownAnnotation,
    UnknownDocument,
    VersionConflict,
)
from .geometry import (
    Anchor,
    Mesh,
    RemapStatus,
    anchor_to_point,
    mesh_from_bytes,
    mesh_to_bytes,
    remap_anchor,
)


@dataclass(frozen=True)
class Revision:
    revision: int
    content_hash: bytes
    created_at: datetime


@dataclass(frozen=True)
class DocumentRef:
    id: str
    name: str
    revisions: tuple[Revision, ...]
    alive: bool = True

    @property
    def latest_revision(self) -> int:
        return self.revisions[-1].revision

    def hash_at(self, revision: int) -> Optional[bytes]:
        for rev in self.revisions:
            if rev.revision == revision:
                return rev.content_hash
        return None


@dataclass(frozen=True)
class Region:
    center: tuple[float, float, float]
    radius: float


@dataclass(frozen=True)
class Query:
    """Conjunction of optional filters; absent fields match everything."""

    force_kind: Optional[ForceKind] = None
    clarification_kind: Optional[acts.ClarificationKind] = None
    polarity: Optional[acts.Polarity] = None
    content_kind: Optional[acts.ContentKind] = None
    author: Optional[str] = None
    status: Optional[Status] = None
    sphere: Optional[Sphere] = None
    document: Optional[str] = None
    revision: Optional[int] = None
    text_substring: Optional[str] = None
    region: Optional[Region] = None


def _utc_now() -> datetime:
    return datetime.now(timezone.utc)


class Store:
    """Annotation and document store, in-memory or backed by a data directory."""

    def __init__(
        self,
        data_dir: Optional[str | Path] = None,
        orphan_threshold: float = 0.05,
        clock: Callable[[], datetime] = _utc_now,
        id_factory: Callable[[], str] = lambda: str(uuid.uuid4()),
    ):
        if not 0.0 < orphan_threshold <= 1.0:
            raise ValueError("orphan_threshold must be in (0, 1]")
        self._lock = threading.RLock()
        self._clock = clock
        self._id_factory = id_factory
        self._orphan_threshold = orphan_threshold
        self._documents: dict[str, DocumentRef] = {}
        self._annotations: dict[str, Annotation] = {}
        self._order: list[tuple[datetime, str]] = []  # (created_at, id), sorted
        self._meshes: dict[str, Mesh] = {}  # hash hex -> mesh
        self._points: dict[str, Optional[np.ndarray]] = {}  # annotation id -> anchor point
        self._data_dir: Optional[Path] = Path(data_dir) if data_dir else None
        self._log = None
        if self._data_dir is not None:
            self._data_dir.mkdir(parents=True, exist_ok=True)
            (self._data_dir / "meshes").mkdir(exist_ok=True)
            log_path = self._data_dir / "store.log"
            if log_path.exists():
                self._replay(log_path)
            self._log = open(log_path, "a", encoding="utf-8")

    # ------------------------------------------------------------------ io

    def close(self) -> None:
        with self._lock:
            if self._log is not None:
                self._log.flush()
                self._log.close()
                self._log = None

    def flush(self) -> None:
        with self._lock:
            if self._log is not None:
                self._log.flush()

    def _append_log(self, record: dict) -> None:
        if self._log is not None:
            self._log.write(json.dumps(record, sort_keys=True, ensure_ascii=False) + "\n")
            self._log.flush()

    def _replay(self, log_path: Path) -> None:
        with open(log_path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                if record["kind"] == "document":
                    doc = _document_from_json(record["data"])
                    previous = self._documents.get(doc.id)
                    self._documents[doc.id] = doc
                    if previous is not None and previous.alive and not doc.alive:
                        self._drop_annotations_of(doc.id)
                elif record["kind"] == "annotation":
                    ann = codec.annotation_from_json(record["data"])
                    audit = tuple(
                        acts.StatusChange(
                            from_status=Status(c["from"]),
                            to_status=Status(c["to"]),
                            actor=c["actor"],
                            at=codec.parse_timestamp(c["at"]),
                        )
                        for c in record.get("audit", [])
                    )
                    self._index(replace(ann, audit=audit))

    def _persist_mesh(self, mesh: Mesh) -> None:
        hex_hash = mesh.content_hash.hex()
        self._meshes[hex_hash] = mesh
        if self._data_dir is not None:
            path = self._data_dir / "meshes" / f"{hex_hash}.mesh"
            if not path.exists():
                path.write_bytes(mesh_to_bytes(mesh))

    def _mesh_by_hash(self, content_hash: bytes) -> Optional[Mesh]:
        hex_hash = content_hash.hex()
        mesh = self._meshes.get(hex_hash)
        if mesh is None and self._data_dir is not None:
            path = self._data_dir / "meshes" / f"{hex_hash}.mesh"
            if path.exists():
                mesh = mesh_from_bytes(path.read_bytes())
                self._meshes[hex_hash] = mesh
        return mesh

    def _persist_document(self, doc: DocumentRef) -> None:
        self._append_log({"kind": "document", "data": _document_to_json(doc)})

    def _persist_annotation(self, ann: Annotation) -> None:
        self._append_log(
            {
                "kind": "annotation",
                "data": codec.annotation_to_json(ann),
                "audit": [
                    {
                        "from": c.from_status.value,
                        "to": c.to_status.value,
                        "actor": c.actor,
                        "at": codec.format_timestamp(c.at),
                    }
                    for c in ann.audit
                ],
            }
        )

    # ------------------------------------------------------------ documents

    def put_document(self, name: str, mesh: Mesh) -> DocumentRef:
        with self._lock:
            doc = DocumentRef(
                id=self._id_factory(),
                name=name,
                revisions=(Revision(1, mesh.content_hash, self._clock()),),
                alive=True,
            )
            self._documents[doc.id] = doc
            self._persist_mesh(mesh)
            self._persist_document(doc)
            return doc

    def add_revision(self, document_id: str, mesh: Mesh) -> int:
        """Append a revision and carry live annotations across to it.

        Annotations that remap within the orphan threshold move to the new
        revision; the rest keep their anchor and gain the orphaned flag.
        """
        with self._lock:
            doc = self._require_document(document_id)
            prior = doc.latest_revision
            new_revision = prior + 1
            updated = replace(
                doc,
                revisions=doc.revisions + (Revision(new_revision, mesh.content_hash, self._clock()),),
            )
            self._documents[document_id] = updated
            self._persist_mesh(mesh)
            self._persist_document(updated)

            old_mesh = self._mesh_by_hash(doc.hash_at(prior))
            for ann in list(self._annotations.values()):
                if ann.document != document_id or ann.document_revision != prior:
                    continue
                if old_mesh is None:
                    moved = replace(ann, orphaned=True)
                else:
                    result = remap_anchor(old_mesh, mesh, ann.anchor, self._orphan_threshold)
                    if result.status is RemapStatus.ORPHANED:
                        moved = replace(ann, orphaned=True)
                    else:
                        moved = replace(
                            ann,
                            anchor=result.anchor,
                            document_revision=new_revision,
                            orphaned=False,
                        )
                self._save_locked(moved)
            return new_revision

    def get_document(self, document_id: str) -> DocumentRef:
        with self._lock:
            return self._require_document(document_id)

    def list_documents(self) -> list[DocumentRef]:
        with self._lock:
            return [d for d in self._documents.values() if d.alive]

    def get_mesh(self, document_id: str, revision: Optional[int] = None) -> Optional[Mesh]:
        """Mesh for a revision, or None when only the hash is known (stub)."""
        with self._lock:
            doc = self._require_document(document_id)
            content_hash = doc.hash_at(revision if revision is not None else doc.latest_revision)
            if content_hash is None:
                raise UnknownDocument(f"document {document_id} has no revision {revision}")
            return self._mesh_by_hash(content_hash)

    def retire_document(self, document_id: str) -> int:
        with self._lock:
            doc = self._require_document(document_id)
            self._documents[document_id] = replace(doc, alive=False)
            self._persist_document(self._documents[document_id])
            return self._drop_annotations_of(document_id)

    def _drop_annotations_of(self, document_id: str) -> int:
        doomed = [a.id for a in self._annotations.values() if a.document == document_id]
        for ann_id in doomed:
            del self._annotations[ann_id]
            self._points.pop(ann_id, None)
        if doomed:
            self._order = [(t, i) for (t, i) in self._order if i in self._annotations]
        return len(doomed)

    def _require_document(self, document_id: str) -> DocumentRef:
        doc = self._documents.get(document_id)
        if doc is None or not doc.alive:
            raise UnknownDocument(f"no live document {document_id}")
        return doc

    # ---------------------------------------------------------- annotations

    def create_annotation(
        self,
        author: str,
        role: Role,
        document: str,
        revision: int,
        force: acts.IllocutionaryForce,
        utterance: acts.Utterance,
        anchor: Anchor,
        sphere: Sphere,
        references: Iterable[tuple[str, RefKind]] = (),
    ) -> Annotation:
        with self._lock:
            doc = self._require_document(document)
            content_hash = doc.hash_at(revision)
            if content_hash is None:
                raise UnknownDocument(f"document {document} has no revision {revision}")
            mesh = self._mesh_by_hash(content_hash)
            if mesh is None:
                raise InvalidAnchor("document revision has no stored geometry to anchor to")
            resolved = [
                ResolvedReference(target, self._target_kind(target), RefKind(kind))
                for target, kind in references
            ]
            ann = acts.create_annotation(
                author,
                role,
                document,
                revision,
                force,
                utterance,
                anchor,
                sphere,
                mesh=mesh,
                annotation_id=self._id_factory(),
                created_at=self._clock(),
                references=resolved,
            )
            self._save_locked(ann)
            return self._annotations[ann.id]

    def _target_kind(self, target: str) -> ForceKind:
        existing = self._annotations.get(target)
        # Unknown targets cannot be disproved; treat their kind as compatible.
        if existing is None:
            return ForceKind.PROPOSITION
        return existing.force.kind

    def save(self, annotation: Annotation) -> int:
        """Optimistic save; `annotation.version` must match the stored version."""
        with self._lock:
            refs = [(self._target_kind(r.target), r.kind) for r in annotation.references]
            report = acts.validate_act(annotation.force, annotation.utterance, refs)
            if not report.ok:
                raise InvalidAct(report)
            self._require_document(annotation.document)
            return self._save_locked(annotation).version

    def _save_locked(self, annotation: Annotation) -> Annotation:
        current = self._annotations.get(annotation.id)
        expected = current.version if current is not None else 0
        if annotation.version != expected:
            raise VersionConflict(expected)
        stored = replace(annotation, version=expected + 1)
        self._index(stored)
        self._persist_annotation(stored)
        return stored

    def _index(self, annotation: Annotation) -> None:
        fresh = annotation.id not in self._annotations
        self._annotations[annotation.id] = annotation
        if fresh:
            bisect.insort(self._order, (annotation.created_at, annotation.id))
        self._points[annotation.id] = self._anchor_point(annotation)

    def _anchor_point(self, annotation: Annotation) -> Optional[np.ndarray]:
        doc = self._documents.get(annotation.document)
        if doc is None:
            return None
        content_hash = doc.hash_at(annotation.document_revision)
        if content_hash is None:
            return None
        mesh = self._mesh_by_hash(content_hash)
        if mesh is None:
            return None
        try:
            return anchor_to_point(mesh, annotation.anchor)
        except InvalidAnchor:
            return None

    def get_annotation(self, annotation_id: str, viewer: Optional[str] = None) -> Annotation:
        """Fetch by id; a viewer only sees public annotations and their own."""
        with self._lock:
            ann = self._annotations.get(annotation_id)
            if ann is None or not _visible(ann, viewer):
                raise UnknownAnnotation(f"no annotation {annotation_id}")
            return ann

    def append_reply(self, annotation_id: str, author: str, text: str, at=None) -> Annotation:
        with self._lock:
            ann = self.get_annotation(annotation_id, viewer=author)
            updated = acts.append_reply(ann, author, text, at or self._clock())
            return self._save_locked(updated)

    def transition(
        self, annotation_id: str, actor: str, actor_role: Role, new_status: Status, at=None
    ) -> Annotation:
        with self._lock:
            ann = self.get_annotation(annotation_id, viewer=actor)
            updated = acts.transition_status(
                ann,
                actor,
                actor_role,
                new_status,
                at or self._clock(),
                incoming_answers=self.incoming_answers(annotation_id),
            )
            return self._save_locked(updated)

    def publish(self, annotation_id: str, actor: str, at=None) -> Annotation:
        with self._lock:
            ann = self.get_annotation(annotation_id, viewer=actor)
            updated = acts.publish(ann, actor, at or self._clock())
            return self._save_locked(updated)

    def incoming_answers(self, annotation_id: str) -> int:
        with self._lock:
            return sum(
                1
                for other in self._annotations.values()
                for ref in other.references
                if ref.kind is RefKind.ANSWERS and ref.target == annotation_id
            )

    # ---------------------------------------------------------------- query

    def query(self, q: Query, viewer: Optional[str] = None) -> list[Annotation]:
        """Annotations matching all present filters, by (created_at, id)."""
        mesh = None
        center = None
        if q.region is not None:
            if q.document is None or q.revision is None:
                raise InvalidQuery("region filter requires document and revision")
            center = np.asarray(q.region.center, dtype=np.float64)
        with self._lock:
            if q.region is not None:
                try:
                    mesh = self.get_mesh(q.document, q.revision)
                except UnknownDocument:
                    mesh = None
            out = []
            for _, ann_id in self._order:
                ann = self._annotations.get(ann_id)
                if ann is None or not _visible(ann, viewer):
                    continue
                if not self._matches(ann, q, center):
                    continue
                out.append(ann)
            return out

    def _matches(self, ann: Annotation, q: Query, center) -> bool:
        if q.force_kind is not None and ann.force.kind is not q.force_kind:
            return False
        if q.clarification_kind is not None and ann.force.clarification_kind is not q.clarification_kind:
            return False
        if q.polarity is not None and ann.force.polarity is not q.polarity:
            return False
        if q.content_kind is not None and ann.utterance.content_kind is not q.content_kind:
            return False
        if q.author is not None and ann.author != q.author:
            return False
        if q.status is not None and ann.status is not q.status:
            return False
        if q.sphere is not None and ann.sphere is not q.sphere:
            return False
        if q.document is not None and ann.document != q.document:
            return False
        if q.revision is not None and ann.document_revision != q.revision:
            return False
        if q.text_substring is not None:
            needle = q.text_substring.casefold()
            if needle not in ann.utterance.text.casefold() and not any(
                needle in entry.text.casefold() for entry in ann.thread
            ):
                return False
        if q.region is not None:
            point = self._points.get(ann.id)
            if point is None:
                return False
            if float(np.linalg.norm(point - center)) > q.region.radius:
                return False
        return True

    # --------------------------------------------------------- set transfer

    def export_set(self, document_id: str) -> bytes:
        """Canonical annotation-set file for one document (all spheres)."""
        with self._lock:
            doc = self._require_document(document_id)
            annotations = [
                codec.annotation_to_json(self._annotations[ann_id])
                for _, ann_id in self._order
                if ann_id in self._annotations and self._annotations[ann_id].document == document_id
            ]
            payload = {
                "schema_version": codec.SCHEMA_VERSION,
                "document": {
                    "id": doc.id,
                    "name": doc.name,
                    "revision": doc.latest_revision,
                    "content_hash": doc.revisions[-1].content_hash.hex(),
                },
                "annotations": annotations,
            }
            return codec.canonical_json(payload)

    def import_set(self, data: bytes) -> tuple[int, list[tuple[str, str]]]:
        """Import a set file; invalid entries are skipped, not fatal.

        Returns (imported count, [(annotation id, reason)] for skipped
        entries). Unknown documents are registered as geometry-less stubs so
        sets can move between stores; a mismatched hash on a known document
        is an error.
        """
        try:
            payload = json.loads(data.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise SchemaUnsupported(f"not an annotation set: {exc}")
        if not isinstance(payload, dict) or payload.get("schema_version") != codec.SCHEMA_VERSION:
            raise SchemaUnsupported(
                f"unsupported schema_version {payload.get('schema_version')!r}"
                if isinstance(payload, dict)
                else "not an annotation set object"
            )
        snapshot = payload["document"]
        declared_hash = bytes.fromhex(snapshot["content_hash"])
        declared_revision = int(snapshot["revision"])
        with self._lock:
            doc = self._documents.get(snapshot["id"])
            if doc is not None:
                if not doc.alive:
                    raise UnknownDocument(f"document {snapshot['id']} is retired")
                stored_hash = doc.hash_at(declared_revision)
                if stored_hash is None or stored_hash != declared_hash:
                    raise HashMismatch(
                        f"set declares revision {declared_revision} with hash "
                        f"{declared_hash.hex()[:12]}..., store disagrees"
                    )
            else:
                doc = DocumentRef(
                    id=snapshot["id"],
                    name=snapshot["name"],
                    revisions=(Revision(declared_revision, declared_hash, self._clock()),),
                    alive=True,
                )
                self._documents[doc.id] = doc
                self._persist_document(doc)

            # Reference grammar checks may need targets from this same set.
            incoming: dict[str, ForceKind] = {}
            for entry in payload["annotations"]:
                try:
                    incoming[str(entry["id"])] = ForceKind(entry["force"]["kind"])
                except (KeyError, TypeError, ValueError):
                    continue

            imported = 0
            skipped: list[tuple[str, str]] = []
            for entry in payload["annotations"]:
                ann_id = str(entry.get("id", "?"))
                if ann_id in self._annotations:
                    skipped.append((ann_id, "ALREADY_PRESENT"))
                    continue
                try:
                    ann = codec.annotation_from_json(entry)
                except (KeyError, TypeError, ValueError, IndexError):
                    skipped.append((ann_id, "INVALID_ACT"))
                    continue
                if ann.document != doc.id:
                    skipped.append((ann_id, "UNKNOWN_DOCUMENT"))
                    continue
                refs = [
                    (
                        incoming.get(r.target)
                        or (self._annotations[r.target].force.kind if r.target in self._annotations else ForceKind.PROPOSITION),
                        r.kind,
                    )
                    for r in ann.references
                ]
                report = acts.validate_act(ann.force, ann.utterance, refs)
                if not report.ok:
                    skipped.append((ann_id, "INVALID_ACT:" + ",".join(report.violations)))
                    continue
                content_hash = doc.hash_at(ann.document_revision)
                mesh = self._mesh_by_hash(content_hash) if content_hash else None
                try:
                    if mesh is not None:
                        acts.check_anchor(mesh, ann.anchor)
                    else:
                        _check_bary_only(ann.anchor)
                except InvalidAnchor:
                    skipped.append((ann_id, "INVALID_ANCHOR"))
                    continue
                self._index(ann)
                self._persist_annotation(ann)
                imported += 1
            return imported, skipped


def _visible(ann: Annotation, viewer: Optional[str]) -> bool:
    if viewer is None:
        return True
    return ann.sphere is Sphere.PUBLIC or ann.author == viewer


def _check_bary_only(anchor: Anchor) -> None:
    b0, b1, b2 = anchor.bary
    if min(b0, b1, b2) < -1e-12 or abs(b0 + b1 + b2 - 1.0) > 1e-9 or anchor.face < 0:
        raise InvalidAnchor(f"bad anchor {anchor}")


def _document_to_json(doc: DocumentRef) -> dict:
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


def _document_from_json(data: dict) -> DocumentRef:
    return DocumentRef(
        id=data["id"],
        name=data["name"],
        alive=bool(data["alive"]),
        revisions=tuple(
            Revision(
                revision=int(r["revision"]),
                content_hash=bytes.fromhex(r["content_hash"]),
                created_at=codec.parse_timestamp(r["created_at"]),
            )
            for r in data["revisions"]
        ),
    )
