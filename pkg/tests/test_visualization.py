"""
Tests for phase portrait rendering.
"""

import matplotlib

matplotlib.use("Agg")  # Use non-interactive backend for testing

import matplotlib.pyplot as plt  # noqa: E402
import pytest  # noqa: E402

from surface_influence.core.constructions import build_family  # noqa: E402
from surface_influence.core.dynamics import CellLabel  # noqa: E402
from surface_influence.visualization import PhasePortrait, render_svg  # noqa: E402
from surface_influence.visualization.portrait import FIXED_POINT_GLYPHS, LABEL_COLORS  # noqa: E402


class TestPhasePortrait:
    """Test cases for the PhasePortrait class."""

    def setup_method(self):
        """Set up test fixtures."""
        self.portrait = PhasePortrait(seed=3, seed_count=6, horizon=0.5)

    @pytest.mark.visualization
    def test_every_label_has_a_color(self):
        assert set(LABEL_COLORS) == set(CellLabel)

    @pytest.mark.visualization
    def test_glyphs_cover_isolated_kinds(self):
        assert {kind.value for kind in FIXED_POINT_GLYPHS} == {
            "attracting",
            "repelling",
            "topologically-hyperbolic-saddle",
            "degenerate-saddle",
        }

    @pytest.mark.visualization
    def test_streamlines_are_deterministic(self, torus_construction):
        flow = torus_construction.flow
        first = self.portrait.streamlines(flow)
        second = PhasePortrait(seed=3, seed_count=6, horizon=0.5).streamlines(flow)
        assert len(first) == len(second) > 0
        for (c1, p1), (c2, p2) in zip(first, second):
            assert c1 == c2
            assert (p1 == p2).all()

    @pytest.mark.visualization
    def test_no_streamlines_without_seeds(self, torus_construction):
        assert PhasePortrait(seed_count=0).streamlines(torus_construction.flow) == []

    @pytest.mark.visualization
    def test_one_panel_per_chart(self, torus_construction):
        M, K, flow = torus_construction
        fig = self.portrait.plot(flow, K)
        titled = [ax for ax in fig.axes if ax.get_title()]
        assert [ax.get_title() for ax in titled] == [f"chart {c}" for c in M.charts]
        assert fig._suptitle.get_text() == flow.name
        plt.close(fig)

    @pytest.mark.visualization
    def test_labels_and_dissonant_cells(self, sphere_construction, sphere_report):
        M, K, flow = sphere_construction
        fig = self.portrait.plot(flow, K, sphere_report.labels, dissonant=[0], title="sphere")
        assert fig._suptitle.get_text() == "sphere"
        plt.close(fig)


class TestRenderSvg:
    """SVG output."""

    @pytest.mark.visualization
    def test_writes_svg(self, tmp_path, torus_construction):
        M, K, flow = torus_construction
        path = render_svg(flow, tmp_path / "nested" / "torus.svg", K=K, seed_count=4)
        assert path.exists()
        assert path.read_text().lstrip().startswith("<?xml")
        assert "<svg" in path.read_text()

    @pytest.mark.visualization
    def test_same_seed_same_file(self, tmp_path, torus_construction):
        M, K, flow = torus_construction
        a = render_svg(flow, tmp_path / "a.svg", K=K, seed=1, seed_count=4)
        b = render_svg(flow, tmp_path / "b.svg", K=K, seed=1, seed_count=4)
        assert a.read_bytes() == b.read_bytes()

    @pytest.mark.visualization
    def test_circle_of_fixed_points(self, tmp_path):
        flow = build_family("sphere-circle", 1).at(0.0)
        path = render_svg(flow, tmp_path / "equator.svg", seed_count=2)
        assert path.stat().st_size > 0
