"""Tests for mesh files and JSON documents."""

import json

import numpy as np
import pytest

from surface_influence.core.constructions import assemble_generator, build_family
from surface_influence.core.continuation import SweepColumn, SweepResult
from surface_influence.core.flow import Flow
from surface_influence.core.mesh import MeshError, Subcomplex, build_sphere, canonical_hash
from surface_influence.core.verify import SCHEMA_VERSION, prepare_context
from surface_influence.surface_io import (
    DocumentError,
    MeshFormatError,
    SurfaceBundle,
    flow_from_spec,
    flow_to_spec,
    read_json,
    read_subcomplex,
    read_surface,
    report_document,
    sweep_document,
    write_json,
    write_subcomplex,
    write_surface,
)
from surface_influence.surface_io.report_io import dumps


class TestMeshFiles:
    """OFF surfaces, sidecars and subcomplex lists."""

    def test_surface_with_sidecar(self, tmp_path, torus_construction):
        M = torus_construction.surface
        write_surface(M, tmp_path / "t.off", tmp_path / "t.sidecar")
        loaded = read_surface(tmp_path / "t.off", tmp_path / "t.sidecar")
        assert loaded.genus == 1
        assert loaded.charts == M.charts
        np.testing.assert_array_equal(loaded.triangles, M.triangles)
        np.testing.assert_allclose(loaded.corner_coords, M.corner_coords)
        assert canonical_hash(loaded) == canonical_hash(M)

    def test_surface_without_sidecar_uses_one_chart(self, tmp_path):
        M = build_sphere()
        write_surface(M, tmp_path / "s.off", tmp_path / "s.sidecar")
        loaded = read_surface(tmp_path / "s.off")
        assert loaded.charts == [0]
        assert loaded.name == "s"
        assert loaded.genus == 0

    def test_off_header(self, tmp_path):
        M = build_sphere()
        path = tmp_path / "s.off"
        write_surface(M, path, tmp_path / "s.sidecar")
        lines = path.read_text().splitlines()
        assert lines[0] == "OFF"
        assert lines[1] == "6 8 12"

    def test_missing_header(self, tmp_path):
        path = tmp_path / "bad.off"
        path.write_text("3 1 3\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n")
        with pytest.raises(MeshFormatError, match="OFF header"):
            read_surface(path)

    def test_quad_faces_rejected(self, tmp_path):
        path = tmp_path / "quad.off"
        path.write_text("OFF\n4 1 4\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n")
        with pytest.raises(MeshFormatError, match="triangular"):
            read_surface(path)

    def test_open_mesh_is_rejected(self, tmp_path):
        path = tmp_path / "open.off"
        path.write_text("OFF\n3 1 3\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n")
        with pytest.raises(MeshError):
            read_surface(path)

    def test_sidecar_count_mismatch(self, tmp_path):
        M = build_sphere()
        write_surface(M, tmp_path / "s.off", tmp_path / "s.sidecar")
        other = build_sphere(1)
        write_surface(other, tmp_path / "o.off", tmp_path / "o.sidecar")
        with pytest.raises(MeshFormatError, match="triangles"):
            read_surface(tmp_path / "s.off", tmp_path / "o.sidecar")

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_surface(tmp_path / "nothing.off")

    def test_subcomplex_file(self, tmp_path, torus_construction):
        M, K, _ = torus_construction
        path = write_subcomplex(K, tmp_path / "core.sub")
        assert read_subcomplex(path, M) == K

    def test_subcomplex_file_closes_faces(self, tmp_path):
        M = build_sphere()
        path = tmp_path / "one.sub"
        path.write_text("# one triangle\nt 0\n")
        assert read_subcomplex(path, M) == Subcomplex.from_triangles(M, [0])

    def test_subcomplex_unknown_triangle(self, tmp_path):
        M = build_sphere()
        path = tmp_path / "bad.sub"
        path.write_text(f"t {M.n_triangles + 5}\n")
        with pytest.raises(MeshFormatError):
            read_subcomplex(path, M)

    def test_subcomplex_unknown_kind(self, tmp_path):
        path = tmp_path / "bad.sub"
        path.write_text("q 1\n")
        with pytest.raises(MeshFormatError, match="unknown simplex kind"):
            read_subcomplex(path, build_sphere())

    def test_bundle_paths(self, tmp_path):
        bundle = SurfaceBundle(tmp_path)
        assert bundle.surface_path == tmp_path / "surface.off"
        assert [p.name for p in bundle.paths] == ["surface.off", "surface.sidecar", "flow.json", "core.sub"]


class TestJsonDocuments:
    """Schema-checked JSON files."""

    def test_write_is_deterministic(self, tmp_path):
        doc = {"schema": SCHEMA_VERSION, "kind": "flow", "b": np.int64(2), "a": np.array([1.5, 2.0])}
        first = write_json(doc, tmp_path / "a.json").read_text()
        second = write_json(dict(reversed(list(doc.items()))), tmp_path / "b.json").read_text()
        assert first == second
        assert json.loads(first)["a"] == [1.5, 2.0]

    def test_read_checks_schema_and_kind(self, tmp_path):
        write_json({"schema": SCHEMA_VERSION, "kind": "sweep"}, tmp_path / "s.json")
        assert read_json(tmp_path / "s.json", "sweep")["kind"] == "sweep"
        with pytest.raises(DocumentError, match="expected a flow document"):
            read_json(tmp_path / "s.json", "flow")
        write_json({"schema": 99, "kind": "sweep"}, tmp_path / "old.json")
        with pytest.raises(DocumentError, match="schema"):
            read_json(tmp_path / "old.json")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(DocumentError, match="Invalid JSON"):
            read_json(path)


class TestFlowSpecs:
    """Recipes that rebuild flows."""

    def test_generator_recipe(self):
        M, K, flow = assemble_generator(2, [0, 2])
        spec = flow_to_spec(flow)
        assert spec["construction"] == "generator"
        assert spec["ks"] == [0, 2]
        rebuilt = flow_from_spec(spec, M)
        assert canonical_hash(rebuilt.surface) == canonical_hash(M)
        assert rebuilt.core.counts == K.counts
        assert rebuilt.flow.name == flow.name

    def test_named_recipe(self, example_2_construction):
        spec = flow_to_spec(example_2_construction.flow)
        assert spec["construction"] == "example-2"
        assert flow_from_spec(spec).flow.metadata["construction"] == "example-2"

    def test_family_recipe(self):
        flow = build_family("sphere-circle", 1).at(0.1)
        spec = flow_to_spec(flow)
        assert spec["family"] == "sphere-circle"
        assert spec["lambda"] == 0.1
        rebuilt = flow_from_spec(spec)
        np.testing.assert_allclose(
            rebuilt.flow.velocity_in_chart(0, [[-0.7, 0.0]]), flow.velocity_in_chart(0, [[-0.7, 0.0]])
        )

    def test_vertex_vector_recipe_needs_mesh(self):
        M = build_sphere()
        flow = Flow.from_vertex_vectors(M, np.zeros((M.n_vertices, 2)))
        spec = flow_to_spec(flow)
        assert spec["construction"] == "vertex-vectors"
        with pytest.raises(DocumentError, match="needs its mesh"):
            flow_from_spec(spec)
        rebuilt = flow_from_spec(spec, M)
        assert rebuilt.core.is_empty()

    def test_recipe_checks_the_mesh(self, torus_construction):
        spec = flow_to_spec(assemble_generator(2, [1, 1]).flow)
        with pytest.raises(DocumentError, match="does not describe"):
            flow_from_spec(spec, torus_construction.surface)

    def test_unknown_and_malformed(self):
        with pytest.raises(DocumentError, match="Unknown flow construction"):
            flow_from_spec({"construction": "spiral"})
        with pytest.raises(DocumentError, match="Malformed"):
            flow_from_spec({"construction": "generator", "g": 1})
        with pytest.raises(DocumentError, match="Invalid flow spec"):
            flow_from_spec({"construction": "generator", "g": 2, "ks": [1]})

    def test_ad_hoc_flow_has_no_recipe(self):
        flow = Flow(build_sphere(), {}, name="ad-hoc")
        with pytest.raises(DocumentError, match="no serializable recipe"):
            flow_to_spec(flow)


class TestReportDocuments:
    def test_report_document_carries_context(self, sphere_construction, sphere_report):
        M, K, flow = sphere_construction
        context = prepare_context(M, K, flow, report=sphere_report)
        doc = report_document(sphere_report, context, flow_to_spec(flow))
        assert doc["kind"] == "influence-report"
        assert doc["complexity"] == 0
        assert doc["surface"]["triangles"] == M.n_triangles
        assert len(doc["cell_labels"]) == M.n_triangles
        assert doc["flow"]["construction"] == "generator"
        assert doc["cohomology"]["b1_M"] == 0
        assert json.loads(dumps(doc))["complexity"] == 0

    def test_sweep_document(self):
        column = SweepColumn(0.0, frozenset({3}), True, True, (1, 1, 0), True, True, False, True, True)
        doc = sweep_document(SweepResult("f", 5, 0.1, 3, [column]))
        assert doc["kind"] == "sweep"
        assert doc["columns"][0]["cells"] == [3]
        assert doc["verdict"] is None
        assert len(doc["deviations"]) == 2

