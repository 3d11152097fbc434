import numpy as np
import pytest

from meshreview.errors import EmptyMesh, ParseError
from meshreview.geometry import MeshFormat, load_mesh, mesh_from_bytes, mesh_to_bytes
from meshreview.geometry.mesh import detect_format

from conftest import FIXTURES
from oracles import reference_parse_obj, reference_parse_stl_binary


def read(name: str) -> bytes:
    return (FIXTURES / name).read_bytes()


class TestObjLoading:
    def test_unit_cube_counts(self):
        mesh = load_mesh(read("cube.obj"), MeshFormat.OBJ)
        assert len(mesh.vertices) == 8
        assert len(mesh.faces) == 12

    def test_quads_fan_triangulate(self):
        mesh = load_mesh(read("cube_quads.obj"), MeshFormat.OBJ)
        assert len(mesh.faces) == 12

    def test_degenerate_face_dropped(self):
        mesh = load_mesh(read("cube_degenerate.obj"), MeshFormat.OBJ)
        assert len(mesh.faces) == 11

    def test_face_indices_in_range(self):
        mesh = load_mesh(read("icosphere.obj"), MeshFormat.OBJ)
        assert mesh.faces.max() < len(mesh.vertices)

    def test_slash_indices_and_comments(self):
        obj = b"# tri\nv 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1\n"
        mesh = load_mesh(obj, MeshFormat.OBJ)
        assert len(mesh.faces) == 1

    def test_negative_relative_indices(self):
        obj = b"v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n"
        assert len(load_mesh(obj, MeshFormat.OBJ).faces) == 1

    def test_out_of_range_index_reports_offset(self):
        obj = b"v 0 0 0\nv 1 0 0\nf 1 2 9\n"
        with pytest.raises(ParseError) as exc:
            load_mesh(obj, MeshFormat.OBJ)
        assert exc.value.offset == obj.index(b"f 1")

    def test_bad_coordinate_is_a_parse_error(self):
        with pytest.raises(ParseError):
            load_mesh(b"v 0 zero 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n", MeshFormat.OBJ)

    def test_vertices_only_is_empty(self):
        with pytest.raises(EmptyMesh):
            load_mesh(b"v 0 0 0\nv 1 0 0\nv 0 1 0\n", MeshFormat.OBJ)

    def test_all_degenerate_is_empty(self):
        with pytest.raises(EmptyMesh):
            load_mesh(b"v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 1 2\n", MeshFormat.OBJ)


class TestStlLoading:
    def test_binary_stl_matches_obj_face_count(self):
        mesh = load_mesh(read("cube.stl"), MeshFormat.STL_BINARY)
        assert len(mesh.faces) == 12
        assert len(mesh.vertices) == 8  # welded from the 36 raw corners

    def test_truncated_binary_stl(self):
        data = read("cube.stl")[:100]
        with pytest.raises(ParseError):
            load_mesh(data, MeshFormat.STL_BINARY)

    def test_ascii_stl_loads(self):
        mesh = load_mesh(read("cube_ascii.stl"), MeshFormat.STL_ASCII)
        assert len(mesh.faces) == 12

    def test_ascii_without_solid_keyword(self):
        with pytest.raises(ParseError):
            load_mesh(b"facet normal 0 0 1\n", MeshFormat.STL_ASCII)

    def test_detect_format(self):
        assert detect_format(read("cube.obj"), "cube.obj") is MeshFormat.OBJ
        assert detect_format(read("cube.stl"), "cube.stl") is MeshFormat.STL_BINARY
        assert detect_format(read("cube_ascii.stl"), "cube_ascii.stl") is MeshFormat.STL_ASCII
        assert detect_format(read("cube.obj")) is MeshFormat.OBJ


class TestCanonicalHash:
    def test_obj_and_stl_loads_hash_identically(self):
        """Same geometry, same face order: the canonical form must agree.

        Cross-checked against an independent reference parse of both files:
        the welded triangle soups are identical, so the hashes must be too.
        """
        obj_mesh = load_mesh(read("cube.obj"), MeshFormat.OBJ)
        stl_mesh = load_mesh(read("cube.stl"), MeshFormat.STL_BINARY)
        ascii_mesh = load_mesh(read("cube_ascii.stl"), MeshFormat.STL_ASCII)

        ref_obj = reference_parse_obj(read("cube.obj").decode())
        ref_stl = reference_parse_stl_binary(read("cube.stl"))
        assert ref_obj.shape == ref_stl.shape == (12, 3, 3)
        np.testing.assert_allclose(ref_obj, ref_stl, atol=1e-9)

        assert obj_mesh.content_hash == stl_mesh.content_hash == ascii_mesh.content_hash
        assert len(obj_mesh.content_hash) == 32

    def test_hash_covers_face_order(self):
        a = load_mesh(b"v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nf 1 2 3\nf 2 4 3\n", MeshFormat.OBJ)
        b = load_mesh(b"v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nf 2 4 3\nf 1 2 3\n", MeshFormat.OBJ)
        assert a.content_hash != b.content_hash

    def test_hash_ignores_vertex_declaration_order(self):
        a = load_mesh(b"v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n", MeshFormat.OBJ)
        b = load_mesh(b"v 0 1 0\nv 0 0 0\nv 1 0 0\nf 2 3 1\n", MeshFormat.OBJ)
        assert a.content_hash == b.content_hash

    def test_welding_tolerance_collapses_near_duplicates(self):
        base = b"v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 0.0000000000004\nf 1 2 3\nf 4 2 3\n"
        mesh = load_mesh(base, MeshFormat.OBJ)
        assert len(mesh.vertices) == 3

    def test_blob_round_trip_preserves_hash(self):
        mesh = load_mesh(read("icosphere.obj"), MeshFormat.OBJ)
        again = mesh_from_bytes(mesh_to_bytes(mesh))
        assert again.content_hash == mesh.content_hash
        np.testing.assert_array_equal(again.faces, mesh.faces)
        np.testing.assert_array_equal(again.vertices, mesh.vertices)
