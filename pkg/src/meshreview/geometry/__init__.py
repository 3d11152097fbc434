from .mesh import Mesh, MeshFormat, load_mesh, mesh_from_bytes, mesh_to_bytes
from .anchor import (
    Anchor,
    Ray,
    RemapResult,
    RemapStatus,
    anchor_to_point,
    face_normal,
    nearest_anchor,
    remap_anchor,
    resolve_anchor,
)

__all__ = [
    "Anchor",
    "Mesh",
    "MeshFormat",
    "Ray",
    "RemapResult",
    "RemapStatus",
    "anchor_to_point",
    "face_normal",
    "load_mesh",
    "mesh_from_bytes",
    "mesh_to_bytes",
    "nearest_anchor",
    "remap_anchor",
    "resolve_anchor",
]
