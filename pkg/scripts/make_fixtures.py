"""Regenerate the mesh fixtures under tests/fixtures/.

The cube is the unit cube centered at the origin with outward-facing
triangles; the icosphere is a twice-subdivided icosahedron projected onto
the unit sphere. Outputs are deterministic.
"""

from __future__ import annotations

import struct
from pathlib import Path

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

CUBE_VERTS = [
    (-0.5, -0.5, -0.5),
    (0.5, -0.5, -0.5),
    (0.5, 0.5, -0.5),
    (-0.5, 0.5, -0.5),
    (-0.5, -0.5, 0.5),
    (0.5, -0.5, 0.5),
    (0.5, 0.5, 0.5),
    (-0.5, 0.5, 0.5),
]

# Outward winding; quads listed as (a, b, c, d) and split (a,b,c)+(a,c,d).
CUBE_QUADS = [
    (0, 3, 2, 1),  # -z
    (4, 5, 6, 7),  # +z
    (0, 1, 5, 4),  # -y
    (2, 3, 7, 6),  # +y
    (0, 4, 7, 3),  # -x
    (1, 2, 6, 5),  # +x
]

CUBE_TRIS = []
for a, b, c, d in CUBE_QUADS:
    CUBE_TRIS.append((a, b, c))
    CUBE_TRIS.append((a, c, d))


def fmt(x: float) -> str:
    return repr(float(x))


def write_obj(path: Path, verts, faces) -> None:
    lines = [f"v {fmt(x)} {fmt(y)} {fmt(z)}" for x, y, z in verts]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in faces]
    path.write_text("\n".join(lines) + "\n")


def write_obj_quads(path: Path, verts, quads) -> None:
    lines = [f"v {fmt(x)} {fmt(y)} {fmt(z)}" for x, y, z in verts]
    lines += ["f " + " ".join(str(i + 1) for i in quad) for quad in quads]
    path.write_text("\n".join(lines) + "\n")


def normal(verts, tri):
    ax, ay, az = verts[tri[0]]
    bx, by, bz = verts[tri[1]]
    cx, cy, cz = verts[tri[2]]
    ux, uy, uz = bx - ax, by - ay, bz - az
    vx, vy, vz = cx - ax, cy - ay, cz - az
    nx, ny, nz = uy * vz - uz * vy, uz * vx - ux * vz, ux * vy - uy * vx
    n = (nx * nx + ny * ny + nz * nz) ** 0.5 or 1.0
    return nx / n, ny / n, nz / n


def write_stl_binary(path: Path, verts, faces) -> None:
    blob = b"meshreview cube fixture".ljust(80, b"\0")
    blob += struct.pack("<I", len(faces))
    for tri in faces:
        blob += struct.pack("<3f", *normal(verts, tri))
        for i in tri:
            blob += struct.pack("<3f", *verts[i])
        blob += struct.pack("<H", 0)
    path.write_bytes(blob)


def write_stl_ascii(path: Path, verts, faces) -> None:
    out = ["solid cube"]
    for tri in faces:
        nx, ny, nz = normal(verts, tri)
        out.append(f"  facet normal {fmt(nx)} {fmt(ny)} {fmt(nz)}")
        out.append("    outer loop")
        for i in tri:
            x, y, z = verts[i]
            out.append(f"      vertex {fmt(x)} {fmt(y)} {fmt(z)}")
        out.append("    endloop")
        out.append("  endfacet")
    out.append("endsolid cube")
    path.write_text("\n".join(out) + "\n")


def icosphere(subdivisions: int = 2):
    phi = (1.0 + 5.0**0.5) / 2.0
    raw = [
        (-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
        (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
        (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1),
    ]

    def unit(p):
        n = (p[0] ** 2 + p[1] ** 2 + p[2] ** 2) ** 0.5
        return (p[0] / n, p[1] / n, p[2] / n)

    verts = [unit(p) for p in raw]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    for _ in range(subdivisions):
        cache: dict[tuple[int, int], int] = {}

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                a, b = verts[i], verts[j]
                verts.append(unit(((a[0] + b[0]) / 2, (a[1] + b[1]) / 2, (a[2] + b[2]) / 2)))
                cache[key] = len(verts) - 1
            return cache[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    return verts, faces


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    write_obj(FIXTURES / "cube.obj", CUBE_VERTS, CUBE_TRIS)
    write_obj_quads(FIXTURES / "cube_quads.obj", CUBE_VERTS, CUBE_QUADS)
    write_stl_binary(FIXTURES / "cube.stl", CUBE_VERTS, CUBE_TRIS)
    write_stl_ascii(FIXTURES / "cube_ascii.stl", CUBE_VERTS, CUBE_TRIS)
    # cube with its last triangle collapsed: 12 records, 11 survive load
    write_obj(FIXTURES / "cube_degenerate.obj", CUBE_VERTS, CUBE_TRIS[:-1] + [(0, 0, 1)])
    verts, faces = icosphere(2)
    write_obj(FIXTURES / "icosphere.obj", verts, faces)
    print(f"wrote fixtures to {FIXTURES}")


if __name__ == "__main__":
    main()
