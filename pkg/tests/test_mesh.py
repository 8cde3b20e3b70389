"""Tests for triangulated surfaces, pieces, gluing and subcomplexes."""

import numpy as np
import pytest

from surface_influence.core.mesh import (
    GluingError,
    MeshError,
    OrientationError,
    PieceKind,
    Subcomplex,
    TriangulatedSurface,
    annulus_piece,
    build_sphere,
    canonical_hash,
    disk_piece,
    euler_characteristic,
    genus,
    glue,
    handle_piece,
    regular_polygon,
    sphere_with_holes,
    star_neighborhood,
    subdivide,
)
from surface_influence.core.validation import ValidationError


class TestPieces:
    """Planar building blocks."""

    def test_regular_polygon_starts_on_x_axis(self):
        poly = regular_polygon(12, 2.0)
        assert poly.shape == (12, 2)
        np.testing.assert_allclose(poly[0], [2.0, 0.0])
        np.testing.assert_allclose(np.linalg.norm(poly, axis=1), 2.0)

    def test_disk_piece_counts(self):
        disk = disk_piece()
        assert disk.n_vertices == 25
        assert disk.n_triangles == 36
        assert disk.n_circles == 1
        assert disk.circle_length(0) == 12
        assert euler_characteristic(disk) == 1
        assert disk.kind is PieceKind.DISK

    def test_annulus_inner_circle_first(self):
        annulus = annulus_piece()
        assert annulus.n_circles == 2
        assert euler_characteristic(annulus) == 0
        inner = np.linalg.norm(annulus.coords[list(annulus.circles[0])], axis=1)
        outer = np.linalg.norm(annulus.coords[list(annulus.circles[1])], axis=1)
        np.testing.assert_allclose(inner, 0.4)
        np.testing.assert_allclose(outer, 1.0)

    @pytest.mark.parametrize("k", [2, 3, 4])
    def test_handle_piece(self, k):
        handle = handle_piece(k)
        assert handle.n_circles == k + 1
        assert handle.handle_k == k
        assert euler_characteristic(handle) == 2 - (k + 1)
        outer = np.linalg.norm(handle.coords[list(handle.circles[k])], axis=1)
        np.testing.assert_allclose(outer, 1.0)
        xs = [handle.circle_center(i)[0] for i in range(k)]
        assert xs == sorted(xs)

    def test_handle_piece_needs_two_holes(self):
        with pytest.raises(MeshError, match="k >= 2"):
            handle_piece(1)

    @pytest.mark.parametrize("holes", [1, 2, 3, 5])
    def test_sphere_with_holes(self, holes):
        core = sphere_with_holes(holes)
        assert core.n_circles == holes
        assert euler_characteristic(core) == 2 - holes
        assert core.kind is PieceKind.CORE
        outer = np.linalg.norm(core.coords[list(core.circles[0])], axis=1)
        np.testing.assert_allclose(outer, 1.0)

    def test_sphere_with_holes_rejects_no_holes(self):
        with pytest.raises(ValidationError):
            sphere_with_holes(0)

    def test_subdivided_piece_doubles_circles(self):
        core = sphere_with_holes(3, subdiv=1)
        assert all(core.circle_length(i) == 24 for i in range(core.n_circles))
        assert euler_characteristic(core) == -1
        core.validate()


class TestGluing:
    """Closed surfaces from pieces."""

    def test_build_sphere_is_octahedron(self):
        sphere = build_sphere()
        assert (sphere.n_vertices, sphere.n_edges, sphere.n_triangles) == (6, 12, 8)
        assert sphere.genus == 0

    def test_build_sphere_subdivided(self):
        sphere = build_sphere(1)
        assert (sphere.n_vertices, sphere.n_edges, sphere.n_triangles) == (18, 48, 32)
        assert sphere.level == 1

    def test_glue_torus(self):
        surface, K = glue(sphere_with_holes(2), [], [annulus_piece()], name="torus")
        assert surface.genus == 1
        assert genus(surface) == 1
        assert euler_characteristic(surface) == 0
        assert K.counts[2] == sphere_with_holes(2).n_triangles
        assert surface.charts == [0, 1]

    def test_glue_genus_two(self):
        surface, K = glue(sphere_with_holes(4), [], [annulus_piece(), annulus_piece()])
        assert surface.genus == 2
        assert K.euler_characteristic() == 2 - 4

    def test_glued_surface_is_closed(self):
        surface, _ = glue(sphere_with_holes(3), [disk_piece()], [annulus_piece()])
        assert np.all(surface.edge_triangles >= 0)
        assert surface.genus == 1

    def test_circle_lengths_must_match(self):
        with pytest.raises(GluingError, match="lengths differ"):
            glue(disk_piece(), [disk_piece(sides=4)])

    def test_circle_count_must_match(self):
        with pytest.raises(GluingError):
            glue(sphere_with_holes(2), [disk_piece()])

    def test_pattern_must_be_perfect_matching(self):
        with pytest.raises(GluingError, match="exactly once"):
            glue(sphere_with_holes(2), [disk_piece(), disk_piece()], pattern=[(0, 1, 0), (0, 2, 0)])

    def test_flipped_gluing_breaks_orientation(self):
        with pytest.raises(OrientationError):
            glue(disk_piece(), [disk_piece()], pattern=[(0, 1, 0, True)])

    def test_open_complex_is_not_a_surface(self):
        corners = np.array([[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]])
        with pytest.raises(MeshError):
            TriangulatedSurface(np.array([[0, 1, 2]]), 3, np.array([0]), corners)

    def test_subdivision_preserves_euler_characteristic(self, torus_construction):
        M = torus_construction.surface
        refined = subdivide(M)
        assert refined.n_vertices == M.n_vertices + M.n_edges
        assert refined.n_triangles == 4 * M.n_triangles
        assert euler_characteristic(refined) == euler_characteristic(M)
        refined.validate()


class TestSubcomplex:
    """Face-closed subsets of a complex."""

    def setup_method(self):
        """Set up an octahedron."""
        self.M = build_sphere()

    def test_triangle_closure(self):
        S = Subcomplex.from_triangles(self.M, [0])
        assert S.counts == (3, 3, 1)
        assert S.is_face_closed()
        assert S.euler_characteristic() == 1

    def test_edge_and_vertex_closure(self):
        assert Subcomplex.from_edges(self.M, [0]).counts == (2, 1, 0)
        assert Subcomplex.from_vertices(self.M, [0, 1]).counts == (2, 0, 0)

    def test_empty_and_full(self):
        assert Subcomplex.empty(self.M).is_empty()
        full = Subcomplex.full(self.M)
        assert full.counts == (6, 12, 8)
        assert full.euler_characteristic() == 2
        assert full.boundary().is_empty()

    def test_union_intersection_contains(self):
        a = Subcomplex.from_triangles(self.M, [0, 1])
        b = Subcomplex.from_triangles(self.M, [1, 2])
        union = a.union(b)
        meet = a.intersection(b)
        assert union.contains(a) and union.contains(b)
        assert a.contains(meet) and b.contains(meet)
        assert meet.contains(Subcomplex.from_triangles(self.M, [1]))
        assert meet.counts[2] == 1
        assert not a.contains(b)

    def test_boundary_of_triangle(self):
        boundary = Subcomplex.from_triangles(self.M, [0]).boundary()
        assert boundary.counts == (3, 3, 0)

    def test_equality_requires_same_parent(self):
        other = build_sphere()
        assert Subcomplex.full(self.M) != Subcomplex.full(other)

    def test_star_neighborhood(self):
        v = int(self.M.triangles[0, 0])
        star = star_neighborhood(Subcomplex.from_vertices(self.M, [v]), 1)
        assert star.counts[2] == len(self.M.vertex_triangles[v])
        assert star_neighborhood(star, 0) == star
        assert star_neighborhood(star, 1) == Subcomplex.full(self.M)

    def test_subdivided_tag(self, sphere_construction):
        M, K, _ = sphere_construction
        refined = M.subdivide()
        K2 = K.subdivided(refined)
        assert K2.counts[2] == 4 * K.counts[2]
        assert K2.euler_characteristic() == K.euler_characteristic()
        assert K2.is_face_closed()

    def test_subdivided_requires_refinement(self):
        with pytest.raises(MeshError):
            Subcomplex.full(self.M).subdivided(build_sphere())

    def test_repr(self):
        assert repr(Subcomplex.from_triangles(self.M, [0])) == "Subcomplex(V=3, E=3, F=1)"


class TestAtlasAndHash:
    """Point location and relabeling invariance."""

    def test_locate_in_disk_chart(self):
        disk = disk_piece()
        found = disk.atlas.locate(0, np.array([[0.05, 0.02], [3.0, 3.0]]))
        assert found[0] >= 0
        assert found[1] == -1

    def test_canonical_hash_ignores_labels(self):
        M = build_sphere(1)
        perm = np.random.default_rng(7).permutation(M.n_vertices)
        relabeled = TriangulatedSurface(perm[M.triangles], M.n_vertices, M.chart_of_triangle, M.corner_coords)
        assert canonical_hash(relabeled) == canonical_hash(M)

    def test_canonical_hash_separates_levels(self):
        assert canonical_hash(build_sphere(0)) != canonical_hash(build_sphere(1))
        assert canonical_hash(build_sphere(0)).startswith("6-12-8-")
