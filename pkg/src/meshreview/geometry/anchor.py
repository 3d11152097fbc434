"""Surface anchors: resolving picks to anchors and anchors to 3D points.

An anchor names a location ON the mesh (face index + barycentric
coordinates) rather than a raw 3D point, so it survives rigid transforms
of the document. All tie-breaks are by lowest face index, which keeps
results deterministic across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from ..errors import InvalidAnchor
from .mesh import Mesh

_DET_EPS = 1e-12  # ray/triangle parallelism threshold on the MT determinant
_BARY_EPS = 1e-12  # inclusive edge tolerance for hits
_EXACT_DISTANCE = 1e-9


@dataclass(frozen=True)
class Anchor:
    face: int
    bary: tuple[float, float, float]
    normal_offset: float = 0.0


@dataclass(frozen=True)
class Ray:
    origin: tuple[float, float, float]
    direction: tuple[float, float, float]

    def __post_init__(self):
        n = float(np.linalg.norm(self.direction))
        if abs(n - 1.0) > 1e-9:
            raise ValueError(f"ray direction must be normalized, |d| = {n}")


class RemapStatus(str, Enum):
    EXACT = "Exact"
    MOVED = "Moved"
    ORPHANED = "Orphaned"


@dataclass(frozen=True)
class RemapResult:
    anchor: Anchor
    status: RemapStatus
    distance: float


def _triangles(mesh: Mesh) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    v = mesh.vertices
    f = mesh.faces
    return v[f[:, 0]], v[f[:, 1]], v[f[:, 2]]


def face_normal(mesh: Mesh, face: int) -> np.ndarray:
    """Unit normal of one face (right-handed winding)."""
    a, b, c = mesh.vertices[mesh.faces[face]]
    n = np.cross(b - a, c - a)
    norm = np.linalg.norm(n)
    if norm == 0.0:
        raise InvalidAnchor(f"face {face} is degenerate")
    return n / norm


def resolve_anchor(mesh: Mesh, ray: Ray) -> Optional[Anchor]:
    """Closest positive-t ray/mesh intersection as an anchor, or None.

    Moeller-Trumbore over all faces; ties on t go to the lowest face index.
    """
    origin = np.asarray(ray.origin, dtype=np.float64)
    direction = np.asarray(ray.direction, dtype=np.float64)
    a, b, c = _triangles(mesh)
    e1 = b - a
    e2 = c - a
    pvec = np.cross(direction[None, :], e2)
    det = np.einsum("ij,ij->i", e1, pvec)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_det = np.where(np.abs(det) > _DET_EPS, 1.0 / det, 0.0)
        tvec = origin[None, :] - a
        u = np.einsum("ij,ij->i", tvec, pvec) * inv_det
        qvec = np.cross(tvec, e1)
        v = np.einsum("j,ij->i", direction, qvec) * inv_det
        t = np.einsum("ij,ij->i", e2, qvec) * inv_det
    hit = (
        (np.abs(det) > _DET_EPS)
        & (u >= -_BARY_EPS)
        & (v >= -_BARY_EPS)
        & (u + v <= 1.0 + _BARY_EPS)
        & (t > _DET_EPS)
    )
    if not hit.any():
        return None
    t_hit = np.where(hit, t, np.inf)
    t_min = t_hit.min()
    # exact-tie window: shared-edge hits land on the same plane but their t
    # values can differ by rounding noise
    tied = t_hit <= t_min + 1e-12 * (1.0 + abs(t_min))
    face = int(np.flatnonzero(tied)[0])
    b1, b2 = float(u[face]), float(v[face])
    return Anchor(face=face, bary=_clean_bary(1.0 - b1 - b2, b1, b2), normal_offset=0.0)


def _clean_bary(b0: float, b1: float, b2: float) -> tuple[float, float, float]:
    # clamp tolerated -eps noise and renormalize the sum to exactly 1
    b = np.maximum([b0, b1, b2], 0.0)
    s = b.sum()
    if s <= 0.0:
        raise InvalidAnchor("degenerate barycentric coordinates")
    b /= s
    return (float(b[0]), float(b[1]), float(b[2]))


def anchor_to_point(mesh: Mesh, anchor: Anchor) -> np.ndarray:
    """Reconstruct the 3D position: bary-weighted vertices plus the normal
    standoff."""
    _check(mesh, anchor)
    a, b, c = mesh.vertices[mesh.faces[anchor.face]]
    b0, b1, b2 = anchor.bary
    point = b0 * a + b1 * b + b2 * c
    if anchor.normal_offset != 0.0:
        point = point + anchor.normal_offset * face_normal(mesh, anchor.face)
    return point


def _check(mesh: Mesh, anchor: Anchor) -> None:
    if not 0 <= anchor.face < len(mesh.faces):
        raise InvalidAnchor(f"face {anchor.face} out of range")
    b0, b1, b2 = anchor.bary
    if min(b0, b1, b2) < -1e-12 or abs(b0 + b1 + b2 - 1.0) > 1e-9:
        raise InvalidAnchor(f"bad barycentric coordinates {anchor.bary}")


def nearest_anchor(mesh: Mesh, point) -> Anchor:
    """Anchor of the surface point closest to `point`.

    Vectorized closest-point-on-triangle (Ericson's region walk) over all
    faces; global minimum, ties by lowest face index.
    """
    p = np.asarray(point, dtype=np.float64)
    a, b, c = _triangles(mesh)

    ab = b - a
    ac = c - a
    ap = p[None, :] - a
    d1 = np.einsum("ij,ij->i", ab, ap)
    d2 = np.einsum("ij,ij->i", ac, ap)

    bp = p[None, :] - b
    d3 = np.einsum("ij,ij->i", ab, bp)
    d4 = np.einsum("ij,ij->i", ac, bp)

    cp = p[None, :] - c
    d5 = np.einsum("ij,ij->i", ab, cp)
    d6 = np.einsum("ij,ij->i", ac, cp)

    vc = d1 * d4 - d3 * d2
    vb = d5 * d2 - d1 * d6
    va = d3 * d6 - d5 * d4

    n = len(a)
    u = np.empty(n)
    v = np.empty(n)
    with np.errstate(divide="ignore", invalid="ignore"):
        # interior solution, overwritten below for the edge/vertex regions
        denom = va + vb + vc
        v_face = np.where(denom != 0.0, vb / denom, 0.0)
        w_face = np.where(denom != 0.0, vc / denom, 0.0)
        u[:] = v_face
        v[:] = w_face

        t_ab = np.where(d1 != d3, d1 / (d1 - d3), 0.0)
        t_ac = np.where(d2 != d6, d2 / (d2 - d6), 0.0)
        bc_den = (d4 - d3) + (d5 - d6)
        t_bc = np.where(bc_den != 0.0, (d4 - d3) / bc_den, 0.0)

    region_bc = (va <= 0.0) & (d4 - d3 >= 0.0) & (d5 - d6 >= 0.0)
    u[region_bc] = 1.0 - t_bc[region_bc]
    v[region_bc] = t_bc[region_bc]
    region_ac = (vb <= 0.0) & (d2 >= 0.0) & (d6 <= 0.0)
    u[region_ac] = 0.0
    v[region_ac] = t_ac[region_ac]
    region_ab = (vc <= 0.0) & (d1 >= 0.0) & (d3 <= 0.0)
    u[region_ab] = t_ab[region_ab]
    v[region_ab] = 0.0
    region_c = (d6 >= 0.0) & (d5 <= d6)
    u[region_c] = 0.0
    v[region_c] = 1.0
    region_b = (d3 >= 0.0) & (d4 <= d3)
    u[region_b] = 1.0
    v[region_b] = 0.0
    region_a = (d1 <= 0.0) & (d2 <= 0.0)
    u[region_a] = 0.0
    v[region_a] = 0.0

    closest = a + u[:, None] * ab + v[:, None] * ac
    dist_sq = ((closest - p[None, :]) ** 2).sum(axis=1)
    d_min = dist_sq.min()
    tied = dist_sq <= d_min + 1e-12 * (1.0 + d_min)
    face = int(np.flatnonzero(tied)[0])
    return Anchor(
        face=face,
        bary=_clean_bary(1.0 - u[face] - v[face], float(u[face]), float(v[face])),
        normal_offset=0.0,
    )


def remap_anchor(
    old_mesh: Mesh,
    new_mesh: Mesh,
    anchor: Anchor,
    orphan_threshold: float = 0.05,
) -> RemapResult:
    """Carry an anchor from one document revision to the next.

    The anchor's old position is re-anchored to the nearest point on the new
    surface. Drift beyond `orphan_threshold` (a fraction of the new mesh's
    bounding-box diagonal) orphans the anchor instead of silently moving it.
    """
    # Drift is measured between surface points; the glyph standoff is
    # carried over unchanged so offset anchors remap idempotently too.
    surface = Anchor(anchor.face, anchor.bary, 0.0)
    p = anchor_to_point(old_mesh, surface)
    candidate = nearest_anchor(new_mesh, p)
    moved = float(np.linalg.norm(anchor_to_point(new_mesh, candidate) - p))
    candidate = Anchor(candidate.face, candidate.bary, anchor.normal_offset)
    if moved <= _EXACT_DISTANCE:
        return RemapResult(anchor=candidate, status=RemapStatus.EXACT, distance=moved)
    if moved <= orphan_threshold * new_mesh.bbox_diagonal:
        return RemapResult(anchor=candidate, status=RemapStatus.MOVED, distance=moved)
    return RemapResult(anchor=anchor, status=RemapStatus.ORPHANED, distance=moved)
