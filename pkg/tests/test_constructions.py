"""Tests for builtin piece flows, the generator, fixtures and families."""

import numpy as np
import pytest

from surface_influence.core.algebra import cohomology
from surface_influence.core.constructions import (
    DEGENERATE_POINT,
    FAMILIES,
    FIXTURES,
    AnnulusVariant,
    ParameterError,
    annulus_flow,
    assemble_generator,
    build_family,
    build_fixture,
    constant_family,
    disk_flow,
    example_1,
    example_2,
    frozen_center_disk_flow,
    handle_flow,
    handle_saddles,
    nonseparating_torus,
    normalize_partition,
    polygon_gauge,
)
from surface_influence.core.dynamics import complement_components
from surface_influence.core.flow import FixedPointKind
from surface_influence.core.mesh import regular_polygon
from surface_influence.core.validation import ValidationError


def _kinds(flow):
    return sorted(p.kind.value for p in flow.fixed_points)


class TestPieceFlows:
    """Planar model flows."""

    def test_disk_flow_attracts(self):
        piece, flow = disk_flow()
        v = flow.velocity_in_chart(0, [[0.5, 0.0]])[0]
        assert v[0] < 0 and v[1] == pytest.approx(0.0)
        assert FixedPointKind.ATTRACTING in [p.kind for p in flow.fixed_points]
        assert flow.frozen.counts[1] == piece.circle_length(0)

    def test_disk_flow_repelling(self):
        _, flow = disk_flow(repelling=True)
        assert flow.velocity_in_chart(0, [[0.5, 0.0]])[0, 0] > 0
        assert FixedPointKind.REPELLING in [p.kind for p in flow.fixed_points]

    def test_frozen_center(self):
        piece, flow = frozen_center_disk_flow()
        np.testing.assert_array_equal(flow.velocity_in_chart(0, [[0.1, 0.05]]), [[0.0, 0.0]])
        inner = np.nonzero(np.linalg.norm(piece.centroids, axis=1) < 0.5)[0]
        assert flow.frozen.triangle_mask[inner].all()
        assert not any(p.is_isolated for p in flow.fixed_points)

    def test_homoclinic_annulus_flows_outward(self):
        _, flow = annulus_flow(AnnulusVariant.HOMOCLINIC)
        np.testing.assert_allclose(flow.velocity_in_chart(0, [[0.7, 0.0]]), [[1.0, 0.0]], atol=1e-9)
        assert flow.metadata["annulus_variant"] == "homoclinic-fibered"
        assert not any(p.is_isolated for p in flow.fixed_points)

    def test_degenerate_annulus_has_one_saddle(self):
        _, flow = annulus_flow("degenerate-saddle")
        np.testing.assert_array_equal(flow.velocity_in_chart(0, [DEGENERATE_POINT]), [[0.0, 0.0]])
        assert _kinds(flow).count("degenerate-saddle") == 1
        assert flow.velocity_in_chart(0, [[-0.7, 0.0]])[0, 0] < 0

    @pytest.mark.parametrize("k", [2, 3, 4])
    def test_handle_saddles(self, k):
        saddles = handle_saddles(k)
        assert len(saddles) == k - 1
        _, flow = handle_flow(k)
        assert _kinds(flow).count("topologically-hyperbolic-saddle") == k - 1
        speeds = np.linalg.norm(flow.velocity_in_chart(0, [[x, 0.0] for x in saddles]), axis=1)
        assert np.all(speeds < 1e-6)

    def test_two_hole_saddle_is_centered(self):
        assert handle_saddles(2) == [pytest.approx(0.0)]

    def test_handle_needs_two(self):
        with pytest.raises(ParameterError):
            handle_flow(1)


class TestGenerator:
    """Surfaces of genus g with a stationary core."""

    def test_normalize_partition(self):
        assert normalize_partition(0, []) == [0]
        assert normalize_partition(2, [1, 1]) == [1, 1]
        with pytest.raises(ParameterError, match="sums to"):
            normalize_partition(2, [1])
        assert issubclass(ParameterError, ValidationError)

    @pytest.mark.parametrize(
        "g, ks", [(0, []), (0, [0, 0]), (1, [1]), (1, [0, 1]), (2, [2]), (2, [0, 2]), (3, [1, 2])]
    )
    def test_genus_and_core(self, g, ks):
        M, K, flow = assemble_generator(g, ks)
        parts = normalize_partition(g, ks)
        assert M.genus == g
        assert M.euler_characteristic() == 2 - 2 * g
        assert K.euler_characteristic() == 2 - (g + len(parts))
        assert flow.frozen.contains(K)
        assert flow.metadata["construction"] == "generator"
        assert flow.metadata["ks"] == parts

    def test_default_name(self):
        _, _, flow = assemble_generator(2, [1, 1])
        assert flow.name == "generator-2-1-1"

    def test_core_is_stationary(self):
        M, K, flow = assemble_generator(1, [1])
        cells = K.cells
        speeds = np.linalg.norm(flow.velocity(M.chart_of_triangle[cells], M.centroids[cells]), axis=1)
        assert np.all(speeds == 0.0)

    def test_fixed_point_tags_per_part(self):
        _, _, flow = assemble_generator(3, [0, 1, 2])
        assert _kinds(flow) == ["attracting", "degenerate-saddle", "topologically-hyperbolic-saddle"]
        assert {p.chart for p in flow.fixed_points} == {1, 2, 3}

    def test_homoclinic_variant_has_no_saddles(self):
        _, _, flow = assemble_generator(1, [1], annulus_variant=AnnulusVariant.HOMOCLINIC)
        assert flow.fixed_points == []

    def test_bad_partition(self):
        with pytest.raises(ParameterError):
            assemble_generator(2, [0, 1])


class TestFixtures:
    """Registered constructions."""

    @pytest.mark.parametrize(
        "name, genus",
        [
            ("sphere", 0),
            ("sphere-two-caps", 0),
            ("sphere-equator", 0),
            ("torus", 1),
            ("genus-2", 2),
            ("genus-2-handle", 2),
            ("example-1", 2),
            ("example-2", 2),
            ("nonseparating-torus", 1),
        ],
    )
    def test_fixture_genus(self, name, genus):
        M, K, flow = build_fixture(name, 0)
        assert M.genus == genus
        assert not K.is_empty()
        assert flow.complex is M

    def test_registry_is_complete(self):
        assert len(FIXTURES) == 9
        assert set(FAMILIES) == {
            "sphere-circle",
            "sphere-drift",
            "sphere-attractor-constant",
            "sphere-saddle-constant",
        }

    def test_unknown_fixture(self):
        with pytest.raises(ParameterError, match="Unknown fixture"):
            build_fixture("klein-bottle")

    def test_example_1_is_homoclinic(self):
        _, _, flow = example_1(0)
        assert flow.metadata["construction"] == "example-1"
        assert flow.metadata["annulus_variant"] == "homoclinic-fibered"
        assert flow.fixed_points == []

    def test_example_2_has_one_saddle(self):
        M, K, flow = example_2(0)
        assert flow.metadata["construction"] == "example-2"
        assert _kinds(flow) == ["topologically-hyperbolic-saddle"]
        assert K.euler_characteristic() == 2 - 4

    def test_nonseparating_torus(self):
        M, K, flow = nonseparating_torus(0)
        assert len(complement_components(K)) == 1
        assert cohomology(K).betti == (1, 2, 0)
        assert flow.metadata["construction"] == "nonseparating-torus"


class TestFamilies:
    """Continuation families on the equatorial sphere."""

    def test_polygon_gauge_is_one_on_boundary(self):
        poly = regular_polygon(12, 0.7)
        mids = 0.5 * (poly + np.roll(poly, -1, axis=0))
        np.testing.assert_allclose(polygon_gauge(poly), 0.7)
        np.testing.assert_allclose(polygon_gauge(mids), 0.7)

    def test_sphere_circle_family(self):
        family = build_family("sphere-circle", 1)
        assert family.interval == (0.0, 1.0)
        assert "circle-of-fixed-points" in _kinds(family.at(0.0))
        assert "degenerate-saddle" in _kinds(family.at(0.1))
        lam = family.at(0.1)
        np.testing.assert_allclose(lam.velocity_in_chart(0, [[0.7, 0.0]]), [[0.0, 0.0]], atol=1e-9)
        np.testing.assert_allclose(lam.velocity_in_chart(0, [[-0.7, 0.0]]), [[-1.2, 0.0]], atol=1e-6)

    def test_sphere_drift_family(self):
        family = build_family("sphere-drift", 1)
        flow = family.at(0.1)
        np.testing.assert_allclose(flow.velocity_in_chart(0, [[0.7, 0.0]]), [[0.6, 0.0]], atol=1e-6)
        assert "degenerate-saddle" not in _kinds(flow)

    def test_reference_set_is_equator(self):
        family = build_family("sphere-circle", 1)
        equator = family.reference_set
        assert equator.counts[2] == 0
        assert cohomology(equator).betti == (1, 1, 0)
        assert family.block.contains(equator)

    def test_constant_families(self):
        frozen = build_family("sphere-saddle-constant", 1)
        assert frozen.at(0.0) is frozen.at(0.7)
        assert frozen.at(0.0).name == "sphere-circle@0.2"
        attractor = constant_family(build_fixture("sphere", 0).flow)
        assert attractor.at(0.3) is attractor.at(0.9)

    def test_unknown_family(self):
        with pytest.raises(ParameterError, match="Unknown family"):
            build_family("torus-drift")
