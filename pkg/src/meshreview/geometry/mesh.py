"""Triangle mesh loading and canonicalization.

Supported formats: wavefront OBJ (v/f records, 1-based indices, polygons
fan-triangulated) and STL, binary or ascii. After parsing, geometry is
canonicalized so that the same surface loaded from different formats hashes
identically:

  1. weld vertices on a 1e-9 grid,
  2. drop degenerate faces (squared area <= 1e-12),
  3. re-index vertices in order of first use by the face list (faces keep
     file order).

The content hash is sha256 over the canonical vertex buffer (float64 LE)
followed by the canonical face buffer (uint32 LE).
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..errors import EmptyMesh, ParseError

_WELD_GRID = 1e-9
_DEGENERATE_SQ_AREA = 1e-12


class MeshFormat(str, Enum):
    OBJ = "obj"
    STL_BINARY = "stl-binary"
    STL_ASCII = "stl-ascii"


@dataclass(frozen=True)
class Mesh:
    """Immutable canonicalized triangle mesh."""

    vertices: np.ndarray  # (n, 3) float64
    faces: np.ndarray  # (m, 3) uint32
    content_hash: bytes  # 32-byte sha256 digest

    def __post_init__(self):
        self.vertices.setflags(write=False)
        self.faces.setflags(write=False)

    @property
    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    @property
    def bbox_diagonal(self) -> float:
        lo, hi = self.bbox
        return float(np.linalg.norm(hi - lo))

    def bounding_sphere(self) -> tuple[np.ndarray, float]:
        lo, hi = self.bbox
        center = (lo + hi) / 2.0
        radius = float(np.sqrt(((self.vertices - center) ** 2).sum(axis=1).max()))
        return center, radius


def load_mesh(data: bytes, fmt: MeshFormat) -> Mesh:
    """Parse `data` under the named format and return the canonical mesh."""
    fmt = MeshFormat(fmt)
    if fmt is MeshFormat.OBJ:
        vertices, faces = _parse_obj(data)
    elif fmt is MeshFormat.STL_BINARY:
        vertices, faces = _parse_stl_binary(data)
    else:
        vertices, faces = _parse_stl_ascii(data)
    return _canonicalize(vertices, faces)


def detect_format(data: bytes, name: str = "") -> MeshFormat:
    """Guess the format from a filename extension and the bytes themselves."""
    lower = name.lower()
    if lower.endswith(".obj"):
        return MeshFormat.OBJ
    head = data[:512].lstrip()
    if head.startswith(b"solid") and b"facet" in data[:4096]:
        return MeshFormat.STL_ASCII
    if lower.endswith(".stl"):
        return MeshFormat.STL_BINARY
    # No extension hint: OBJ if it smells like text records, else binary STL.
    if head[:2] in (b"v ", b"f ") or b"\nv " in data[:4096]:
        return MeshFormat.OBJ
    return MeshFormat.STL_BINARY


def _parse_obj(data: bytes) -> tuple[np.ndarray, np.ndarray]:
    vertices: list[tuple[float, float, float]] = []
    faces: list[tuple[int, int, int]] = []
    offset = 0
    for raw_line in data.split(b"\n"):
        line_offset = offset
        offset += len(raw_line) + 1
        try:
            line = raw_line.decode("utf-8")
        except UnicodeDecodeError:
            raise ParseError("OBJ line is not valid UTF-8", line_offset)
        parts = line.split("#", 1)[0].split()
        if not parts:
            continue
        if parts[0] == "v":
            if len(parts) < 4:
                raise ParseError("vertex record needs 3 coordinates", line_offset)
            try:
                vertices.append((float(parts[1]), float(parts[2]), float(parts[3])))
            except ValueError:
                raise ParseError("bad vertex coordinate", line_offset)
        elif parts[0] == "f":
            if len(parts) < 4:
                raise ParseError("face record needs at least 3 vertices", line_offset)
            idx = []
            for spec in parts[1:]:
                head = spec.split("/", 1)[0]
                try:
                    i = int(head)
                except ValueError:
                    raise ParseError(f"bad face index {spec!r}", line_offset)
                if i < 0:
                    i = len(vertices) + i  # relative indexing
                else:
                    i = i - 1
                if i < 0 or i >= len(vertices):
                    raise ParseError(f"face index {spec!r} out of range", line_offset)
                idx.append(i)
            for k in range(1, len(idx) - 1):  # fan triangulation
                faces.append((idx[0], idx[k], idx[k + 1]))
        # all other record types (vn, vt, o, g, s, mtllib, ...) are ignored
    return (
        np.asarray(vertices, dtype=np.float64).reshape(-1, 3),
        np.asarray(faces, dtype=np.int64).reshape(-1, 3),
    )


def _parse_stl_binary(data: bytes) -> tuple[np.ndarray, np.ndarray]:
    if len(data) < 84:
        raise ParseError("binary STL shorter than its 84-byte preamble", len(data))
    (count,) = struct.unpack_from("<I", data, 80)
    expected = 84 + 50 * count
    if len(data) < expected:
        raise ParseError(f"binary STL truncated, expected {count} records", len(data))
    records = np.frombuffer(data, dtype=np.uint8, count=50 * count, offset=84)
    records = records.reshape(count, 50)
    # 12 float32 per record: normal then 3 vertices; trailing uint16 ignored.
    floats = records[:, :48].copy().view("<f4").reshape(count, 12)
    tris = floats[:, 3:12].astype(np.float64).reshape(count * 3, 3)
    faces = np.arange(count * 3, dtype=np.int64).reshape(count, 3)
    return tris, faces


def _parse_stl_ascii(data: bytes) -> tuple[np.ndarray, np.ndarray]:
    tris: list[tuple[float, float, float]] = []
    pending: list[tuple[float, float, float]] = []
    offset = 0
    seen_solid = False
    for raw_line in data.split(b"\n"):
        line_offset = offset
        offset += len(raw_line) + 1
        try:
            parts = raw_line.decode("utf-8").split()
        except UnicodeDecodeError:
            raise ParseError("ascii STL line is not valid UTF-8", line_offset)
        if not parts:
            continue
        kw = parts[0].lower()
        if kw == "solid":
            seen_solid = True
        elif kw == "vertex":
            if len(parts) < 4:
                raise ParseError("vertex record needs 3 coordinates", line_offset)
            try:
                pending.append((float(parts[1]), float(parts[2]), float(parts[3])))
            except ValueError:
                raise ParseError("bad vertex coordinate", line_offset)
        elif kw == "endloop":
            if len(pending) != 3:
                raise ParseError(f"facet loop has {len(pending)} vertices, expected 3", line_offset)
            tris.extend(pending)
            pending = []
    if not seen_solid:
        raise ParseError("not an ascii STL: no 'solid' keyword", 0)
    vertices = np.asarray(tris, dtype=np.float64).reshape(-1, 3)
    faces = np.arange(len(tris), dtype=np.int64).reshape(-1, 3)
    return vertices, faces


def _canonicalize(vertices: np.ndarray, faces: np.ndarray) -> Mesh:
    if len(faces) == 0:
        raise EmptyMesh("mesh has no faces")
    if len(vertices) == 0 or faces.max() >= len(vertices):
        raise ParseError("face index exceeds vertex count", 0)

    # Weld: vertices mapping to the same 1e-9 grid cell collapse to one.
    keys = np.round(vertices / _WELD_GRID).astype(np.int64)
    _, first_idx, inverse = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    welded = vertices[first_idx]
    faces = inverse.reshape(-1)[faces]

    # Drop degenerate faces.
    a = welded[faces[:, 0]]
    ab = welded[faces[:, 1]] - a
    ac = welded[faces[:, 2]] - a
    sq_area = (np.cross(ab, ac) ** 2).sum(axis=1) / 4.0
    faces = faces[sq_area > _DEGENERATE_SQ_AREA]
    if len(faces) == 0:
        raise EmptyMesh("mesh has no non-degenerate faces")

    # Re-index vertices by first use in the face list; faces keep file order.
    # Unreferenced vertices drop out here.
    order: dict[int, int] = {}
    for v in faces.ravel():
        order.setdefault(int(v), len(order))
    remap = np.zeros(len(welded), dtype=np.int64)
    remap[list(order.keys())] = list(order.values())
    canon_vertices = welded[list(order.keys())]
    canon_faces = remap[faces].astype(np.uint32)

    digest = hashlib.sha256()
    digest.update(np.ascontiguousarray(canon_vertices, dtype="<f8").tobytes())
    digest.update(np.ascontiguousarray(canon_faces, dtype="<u4").tobytes())
    return Mesh(vertices=canon_vertices, faces=canon_faces, content_hash=digest.digest())


_MESH_MAGIC = b"MRMESH1\n"


def mesh_to_bytes(mesh: Mesh) -> bytes:
    """Canonical binary encoding, used for at-rest mesh storage."""
    header = _MESH_MAGIC + struct.pack("<QQ", len(mesh.vertices), len(mesh.faces))
    return (
        header
        + np.ascontiguousarray(mesh.vertices, dtype="<f8").tobytes()
        + np.ascontiguousarray(mesh.faces, dtype="<u4").tobytes()
    )


def mesh_from_bytes(data: bytes) -> Mesh:
    if data[: len(_MESH_MAGIC)] != _MESH_MAGIC:
        raise ParseError("not a stored mesh blob", 0)
    nv, nf = struct.unpack_from("<QQ", data, len(_MESH_MAGIC))
    off = len(_MESH_MAGIC) + 16
    vertices = np.frombuffer(data, dtype="<f8", count=nv * 3, offset=off).reshape(nv, 3)
    off += nv * 3 * 8
    faces = np.frombuffer(data, dtype="<u4", count=nf * 3, offset=off).reshape(nf, 3)
    digest = hashlib.sha256()
    digest.update(np.ascontiguousarray(vertices, dtype="<f8").tobytes())
    digest.update(np.ascontiguousarray(faces, dtype="<u4").tobytes())
    return Mesh(
        vertices=vertices.astype(np.float64),
        faces=faces.astype(np.uint32),
        content_hash=digest.digest(),
    )
