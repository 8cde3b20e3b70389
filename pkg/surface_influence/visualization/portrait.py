"""
Phase portraits of flows on triangulated surfaces.

Each chart of the atlas gets its own panel: cells are tinted by their
influence label, K is shaded, streamlines come from seeded trajectories and
tagged fixed points are drawn with one glyph per type. Output is
deterministic for a given seed.
"""

import math
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.collections import LineCollection, PolyCollection  # noqa: E402
from matplotlib.patches import Circle  # noqa: E402

from surface_influence.core.dynamics import CellLabel  # noqa: E402
from surface_influence.core.flow import FixedPointKind, Flow, FlowIntegrator  # noqa: E402
from surface_influence.core.logging_config import get_logger  # noqa: E402
from surface_influence.core.mesh import Subcomplex  # noqa: E402

logger = get_logger("visualization")

LABEL_COLORS: Dict[CellLabel, str] = {
    CellLabel.PURELY_ATTRACTED: "#1f77b4",
    CellLabel.PURELY_REPELLED: "#ff7f0e",
    CellLabel.HOMOCLINIC: "#2ca02c",
    CellLabel.OUTSIDE: "#ffffff",
    CellLabel.IN_K: "#7f7f7f",
    CellLabel.UNDETERMINED: "#d62728",
}

# (marker, face color, size)
FIXED_POINT_GLYPHS: Dict[FixedPointKind, Tuple[str, str, float]] = {
    FixedPointKind.ATTRACTING: ("o", "#000000", 40.0),
    FixedPointKind.REPELLING: ("o", "#ffffff", 40.0),
    FixedPointKind.HYPERBOLIC_SADDLE: ("X", "#9467bd", 60.0),
    FixedPointKind.DEGENERATE_SADDLE: ("D", "#e377c2", 45.0),
}

DISSONANT_COLOR = "#9467bd"
STREAM_COLOR = "#17becf"


class PhasePortrait:
    """Draw a flow chart by chart."""

    def __init__(self, seed: int = 0, seed_count: int = 24, horizon: float = 3.0, step: float = 0.02):
        self.seed = seed
        self.seed_count = seed_count
        self.horizon = horizon
        self.step = step
        plt.rcParams["svg.hashsalt"] = "surface-influence"

    def streamlines(self, flow: Flow) -> List[Tuple[int, np.ndarray]]:
        """Chart-wise polylines of forward and backward orbits from random cells."""
        M = flow.complex
        moving = np.nonzero(~flow.frozen.triangle_mask)[0]
        if not len(moving) or self.seed_count <= 0:
            return []
        rng = np.random.default_rng(self.seed)
        cells = np.sort(rng.choice(moving, size=min(self.seed_count, len(moving)), replace=False))
        charts0 = M.chart_of_triangle[cells]
        xy0 = M.centroids[cells]
        integrator = FlowIntegrator(flow, self.step)
        n_steps = max(1, int(math.ceil(self.horizon / self.step)))

        lines: List[Tuple[int, np.ndarray]] = []
        for direction in (1.0, -1.0):
            charts, xy = charts0.copy(), xy0.copy()
            history_c, history_xy = [charts.copy()], [xy.copy()]
            for _ in range(n_steps):
                charts, xy, _ = integrator.step_batch(charts, xy, direction * self.step)
                history_c.append(charts.copy())
                history_xy.append(xy.copy())
            hc = np.array(history_c)
            hxy = np.array(history_xy)
            for i in range(len(cells)):
                start = 0
                for j in range(1, n_steps + 2):
                    if j == n_steps + 1 or hc[j, i] != hc[start, i]:
                        if j - start > 1:
                            lines.append((int(hc[start, i]), hxy[start:j, i]))
                        start = j
        return lines

    def plot(
        self,
        flow: Flow,
        K: Optional[Subcomplex] = None,
        labels: Optional[Sequence[Union[CellLabel, str]]] = None,
        dissonant: Sequence[int] = (),
        title: Optional[str] = None,
        save_path: Optional[Union[str, Path]] = None,
    ) -> plt.Figure:
        """Figure with one panel per chart; ``labels`` are per-cell influence labels."""
        M = flow.complex
        charts = M.charts
        ncols = min(3, len(charts))
        nrows = int(math.ceil(len(charts) / ncols))
        fig, axes = plt.subplots(nrows, ncols, figsize=(4.0 * ncols, 4.0 * nrows), squeeze=False)

        if labels is not None:
            colors = np.array([LABEL_COLORS[CellLabel(label)] for label in labels])
        else:
            colors = np.full(M.n_triangles, "#ffffff")
        if K is not None:
            colors[K.triangle_mask] = LABEL_COLORS[CellLabel.IN_K]
        dissonant_mask = np.zeros(M.n_triangles, dtype=bool)
        dissonant_mask[list(dissonant)] = True

        streams = self.streamlines(flow)
        for ax, chart in zip(axes.ravel(), charts):
            tris = np.nonzero(M.chart_of_triangle == chart)[0]
            ax.add_collection(
                PolyCollection(
                    M.corner_coords[tris],
                    facecolors=colors[tris],
                    edgecolors="#cccccc",
                    linewidths=0.2,
                )
            )
            marked = tris[dissonant_mask[tris]]
            if len(marked):
                ax.add_collection(
                    PolyCollection(M.corner_coords[marked], facecolors="none", edgecolors=DISSONANT_COLOR, linewidths=0.8)
                )
            segments = [points for c, points in streams if c == chart]
            if segments:
                ax.add_collection(LineCollection(segments, colors=STREAM_COLOR, linewidths=0.8))
            self._draw_fixed_points(ax, flow, chart)
            ax.set_title(f"chart {chart}", fontsize=10)
            ax.set_aspect("equal")
            ax.autoscale_view()
            ax.set_axis_off()
        for ax in axes.ravel()[len(charts) :]:
            ax.set_axis_off()

        fig.suptitle(title or flow.name, fontsize=12, fontweight="bold")
        plt.tight_layout()
        if save_path:
            fig.savefig(save_path, format=Path(save_path).suffix.lstrip(".") or "svg", metadata={"Date": None})
            logger.info(f"Portrait saved to {save_path}")
        return fig

    @staticmethod
    def _draw_fixed_points(ax: plt.Axes, flow: Flow, chart: int) -> None:
        for point in flow.fixed_points:
            if point.chart != chart:
                continue
            if point.kind is FixedPointKind.CIRCLE:
                ax.add_patch(Circle(point.position, point.radius, fill=False, edgecolor="#000000", linewidth=1.2))
                continue
            marker, face, size = FIXED_POINT_GLYPHS[point.kind]
            ax.scatter(
                [point.position[0]],
                [point.position[1]],
                marker=marker,
                s=size,
                c=face,
                edgecolors="#000000",
                linewidths=0.8,
                zorder=5,
            )


def render_svg(
    flow: Flow,
    path: Union[str, Path],
    K: Optional[Subcomplex] = None,
    labels: Optional[Sequence[Union[CellLabel, str]]] = None,
    dissonant: Sequence[int] = (),
    seed: int = 0,
    seed_count: int = 24,
    step: float = 0.02,
) -> Path:
    """Write a deterministic SVG portrait and close the figure."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    portrait = PhasePortrait(seed=seed, seed_count=seed_count, step=step)
    fig = portrait.plot(flow, K, labels, dissonant, save_path=path)
    plt.close(fig)
    return path
