"""Canonical JSON encoding and the annotation wire/file schema (v1).

Canonical form: sorted keys, UTF-8, two-space indent with LF line endings,
floats as Python's shortest round-trip repr, timestamps as RFC3339 UTC with
a Z suffix. Serialization then deserialization then serialization is
byte-identical, which the set-file round-trip tests assert.
"""

from __future__ import annotations

import json
from datetime import datetime, timezone
from typing import Any

from .acts import (
    Annotation,
    ClarificationKind,
    ContentKind,
    DiscussionEntry,
    ForceKind,
    IllocutionaryForce,
    Polarity,
    Reference,
    RefKind,
    Sphere,
    Status,
    Utterance,
)
from .geometry import Anchor

SCHEMA_VERSION = 1


def canonical_json(value: Any) -> bytes:
    return (json.dumps(value, sort_keys=True, ensure_ascii=False, indent=2) + "\n").encode("utf-8")


def format_timestamp(dt: datetime) -> str:
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def parse_timestamp(text: str) -> datetime:
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def force_to_json(force: IllocutionaryForce) -> dict:
    out: dict[str, Any] = {"kind": force.kind.value}
    if force.clarification_kind is not None:
        out["clarification_kind"] = force.clarification_kind.value
    if force.polarity is not None:
        out["polarity"] = force.polarity.value
    return out


def force_from_json(data: dict) -> IllocutionaryForce:
    return IllocutionaryForce(
        kind=ForceKind(data["kind"]),
        clarification_kind=(
            ClarificationKind(data["clarification_kind"]) if "clarification_kind" in data else None
        ),
        polarity=Polarity(data["polarity"]) if "polarity" in data else None,
    )


def anchor_to_json(anchor: Anchor) -> dict:
    return {
        "face": int(anchor.face),
        "bary": [float(b) for b in anchor.bary],
        "normal_offset": float(anchor.normal_offset),
    }


def anchor_from_json(data: dict) -> Anchor:
    b = data["bary"]
    return Anchor(
        face=int(data["face"]),
        bary=(float(b[0]), float(b[1]), float(b[2])),
        normal_offset=float(data["normal_offset"]),
    )


def annotation_to_json(annotation: Annotation) -> dict:
    return {
        "id": annotation.id,
        "document": annotation.document,
        "document_revision": int(annotation.document_revision),
        "author": annotation.author,
        "created_at": format_timestamp(annotation.created_at),
        "force": force_to_json(annotation.force),
        "utterance": {
            "text": annotation.utterance.text,
            "content_kind": annotation.utterance.content_kind.value,
        },
        "anchor": anchor_to_json(annotation.anchor),
        "sphere": annotation.sphere.value,
        "status": annotation.status.value,
        "orphaned": bool(annotation.orphaned),
        "version": int(annotation.version),
        "thread": [
            {"author": e.author, "at": format_timestamp(e.at), "text": e.text}
            for e in annotation.thread
        ],
        "references": [{"target": r.target, "kind": r.kind.value} for r in annotation.references],
    }


def annotation_from_json(data: dict) -> Annotation:
    return Annotation(
        id=str(data["id"]),
        document=str(data["document"]),
        document_revision=int(data["document_revision"]),
        author=str(data["author"]),
        created_at=parse_timestamp(data["created_at"]),
        force=force_from_json(data["force"]),
        utterance=Utterance(
            text=str(data["utterance"]["text"]),
            content_kind=ContentKind(data["utterance"]["content_kind"]),
        ),
        anchor=anchor_from_json(data["anchor"]),
        sphere=Sphere(data["sphere"]),
        status=Status(data["status"]),
        thread=tuple(
            DiscussionEntry(author=str(e["author"]), at=parse_timestamp(e["at"]), text=str(e["text"]))
            for e in data["thread"]
        ),
        references=tuple(
            Reference(target=str(r["target"]), kind=RefKind(r["kind"])) for r in data["references"]
        ),
        orphaned=bool(data.get("orphaned", False)),
        version=int(data.get("version", 0)),
    )
