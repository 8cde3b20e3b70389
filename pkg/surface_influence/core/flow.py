"""
Flows on triangulated surfaces.

A flow is given chart by chart: every drawing chart carries a vectorized
field ``(n, 2) -> (n, 2)`` in its own coordinates. Trajectories are
integrated with fixed-step RK4 and move between charts through the shared
edge of two neighbouring triangles.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .logging_config import get_logger
from .mesh import (
    AtlasError,
    SimplicialComplex2D,
    Subcomplex,
    point_triangle_distances,
    segment_distances,
)

logger = get_logger("flow")

FieldFn = Callable[[np.ndarray], np.ndarray]

DEFAULT_STEP = 0.02
DEFAULT_T_MAX = 200.0
BISECTION_TOLERANCE = 1e-9


class FixedPointKind(Enum):
    """Types of tagged fixed points."""

    ATTRACTING = "attracting"
    REPELLING = "repelling"
    HYPERBOLIC_SADDLE = "topologically-hyperbolic-saddle"
    DEGENERATE_SADDLE = "degenerate-saddle"
    CIRCLE = "circle-of-fixed-points"


@dataclass(frozen=True)
class FixedPoint:
    """Tagged fixed point (or circle of fixed points) in chart coordinates."""

    chart: int
    position: Tuple[float, float]
    kind: FixedPointKind
    label: str = ""
    radius: float = 0.0

    @property
    def is_isolated(self) -> bool:
        return self.kind is not FixedPointKind.CIRCLE

    def as_dict(self) -> Dict[str, Any]:
        return {
            "chart": self.chart,
            "position": [float(self.position[0]), float(self.position[1])],
            "kind": self.kind.value,
            "label": self.label,
            "radius": self.radius,
        }


def _zero_field(xy: np.ndarray) -> np.ndarray:
    return np.zeros_like(np.asarray(xy, dtype=float))


class Flow:
    """Vector field on a complex with its frozen set and tagged fixed points."""

    def __init__(
        self,
        complex_: SimplicialComplex2D,
        fields: Dict[int, FieldFn],
        frozen: Optional[Subcomplex] = None,
        fixed_points: Iterable[FixedPoint] = (),
        name: str = "flow",
        metadata: Optional[Dict[str, Any]] = None,
    ):
        self.complex = complex_
        self.fields = dict(fields)
        self.frozen = frozen if frozen is not None else Subcomplex.empty(complex_)
        self.fixed_points: List[FixedPoint] = list(fixed_points)
        self.name = name
        self.metadata: Dict[str, Any] = dict(metadata or {})

    def field_for(self, chart: int) -> FieldFn:
        return self.fields.get(chart, _zero_field)

    def velocity_in_chart(self, chart: int, xy: np.ndarray) -> np.ndarray:
        xy = np.asarray(xy, dtype=float).reshape(-1, 2)
        if len(xy) == 0:
            return np.zeros((0, 2))
        return np.asarray(self.field_for(chart)(xy), dtype=float).reshape(-1, 2)

    def velocity(self, charts: np.ndarray, xy: np.ndarray) -> np.ndarray:
        """Field at points spread over several charts."""
        charts = np.asarray(charts, dtype=np.int64).reshape(-1)
        xy = np.asarray(xy, dtype=float).reshape(-1, 2)
        out = np.zeros_like(xy)
        for chart in np.unique(charts):
            idx = np.nonzero(charts == chart)[0]
            out[idx] = self.velocity_in_chart(int(chart), xy[idx])
        return out

    def sample_points(self) -> Tuple[np.ndarray, np.ndarray]:
        """Vertices and centroids of every triangle, with their charts."""
        cx = self.complex
        pts = np.concatenate([cx.corner_coords.reshape(-1, 2), cx.centroids])
        charts = np.concatenate(
            [np.repeat(cx.chart_of_triangle, 3), cx.chart_of_triangle]
        )
        return charts, pts

    def max_speed(self, cells: Optional[np.ndarray] = None) -> float:
        """Largest sampled field magnitude (over ``cells`` if given)."""
        cx = self.complex
        ids = np.arange(cx.n_triangles) if cells is None else np.asarray(cells, dtype=np.int64)
        if len(ids) == 0:
            return 0.0
        pts = np.concatenate([cx.corner_coords[ids].reshape(-1, 2), cx.centroids[ids]])
        charts = np.concatenate([np.repeat(cx.chart_of_triangle[ids], 3), cx.chart_of_triangle[ids]])
        speeds = np.linalg.norm(self.velocity(charts, pts), axis=1)
        return float(speeds.max()) if len(speeds) else 0.0

    def reversed(self) -> "Flow":
        """Flow with time reversed; attracting and repelling tags swap."""
        swap = {
            FixedPointKind.ATTRACTING: FixedPointKind.REPELLING,
            FixedPointKind.REPELLING: FixedPointKind.ATTRACTING,
        }
        fields = {c: (lambda xy, f=f: -np.asarray(f(xy), dtype=float)) for c, f in self.fields.items()}
        points = [
            FixedPoint(p.chart, p.position, swap.get(p.kind, p.kind), p.label, p.radius)
            for p in self.fixed_points
        ]
        metadata = dict(self.metadata, reversed=not self.metadata.get("reversed", False))
        return Flow(self.complex, fields, self.frozen, points, f"{self.name}-reversed", metadata)

    @classmethod
    def from_vertex_vectors(
        cls,
        complex_: SimplicialComplex2D,
        vectors: np.ndarray,
        frozen: Optional[Subcomplex] = None,
        name: str = "vertex-vectors",
    ) -> "Flow":
        """Field interpolated barycentrically from per-vertex vectors.

        ``vectors`` is either (V, 2), one vector per vertex used in every
        incident chart, or (F, 3, 2), one vector per triangle corner.
        """
        vectors = np.asarray(vectors, dtype=float)
        if vectors.ndim == 2:
            corner_vectors = vectors[complex_.triangles]
        else:
            corner_vectors = vectors.reshape(complex_.n_triangles, 3, 2)
        if frozen is not None:
            corner_vectors = corner_vectors.copy()
            frozen_corner = frozen.vertex_mask[complex_.triangles]
            corner_vectors[frozen_corner] = 0.0
        fields = {
            chart: _interpolated_field(complex_, chart, corner_vectors)
            for chart in complex_.charts
        }
        return cls(
            complex_,
            fields,
            frozen,
            name=name,
            metadata={"kind": "vertex-vectors", "vectors": vectors},
        )


def barycentric(corners: np.ndarray, xy: np.ndarray) -> np.ndarray:
    """Barycentric coordinates of points in their triangles, shape (n, 3)."""
    a, b, c = corners[:, 0], corners[:, 1], corners[:, 2]
    v0, v1, v2 = b - a, c - a, xy - a
    d00 = np.sum(v0 * v0, axis=1)
    d01 = np.sum(v0 * v1, axis=1)
    d11 = np.sum(v1 * v1, axis=1)
    d20 = np.sum(v2 * v0, axis=1)
    d21 = np.sum(v2 * v1, axis=1)
    denom = d00 * d11 - d01 * d01
    beta = (d11 * d20 - d01 * d21) / denom
    gamma = (d00 * d21 - d01 * d20) / denom
    return np.column_stack([1.0 - beta - gamma, beta, gamma])


def _interpolated_field(
    complex_: SimplicialComplex2D, chart: int, corner_vectors: np.ndarray
) -> FieldFn:
    atlas = complex_.atlas
    chart_tris = atlas.chart_triangles(chart)

    def evaluate(xy: np.ndarray) -> np.ndarray:
        xy = np.asarray(xy, dtype=float).reshape(-1, 2)
        tri = atlas.locate(chart, xy)
        outside = np.nonzero(tri < 0)[0]
        if len(outside):
            # extrapolate from the nearest triangle of the chart
            d = point_triangle_distances(xy[outside], complex_.corner_coords[chart_tris])
            tri[outside] = chart_tris[np.argmin(d, axis=1)]
        weights = barycentric(complex_.corner_coords[tri], xy)
        return np.einsum("nk,nkd->nd", weights, corner_vectors[tri])

    return evaluate


# ---------------------------------------------------------------------------
# Beck surgery
# ---------------------------------------------------------------------------


def _chart_geometry(
    complex_: SimplicialComplex2D, S: Subcomplex, chart: int
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, bool]:
    """Points, segments and filled triangles of S drawn in one chart."""
    tris = np.nonzero(complex_.chart_of_triangle == chart)[0]
    coords = complex_.vertex_coordinates(chart)
    points = np.array([coords[int(v)] for v in S.vertex_ids if int(v) in coords]).reshape(-1, 2)
    seg_a, seg_b = [], []
    seen = set()
    for t in tris:
        for k in range(3):
            e = int(complex_.triangle_edges[t, k])
            if e in seen or not S.edge_mask[e]:
                continue
            seen.add(e)
            u, v = complex_.edges[e]
            seg_a.append(coords[int(u)])
            seg_b.append(coords[int(v)])
    filled = tris[S.triangle_mask[tris]]
    all_filled = len(tris) > 0 and len(filled) == len(tris)
    return (
        points,
        np.asarray(seg_a, dtype=float).reshape(-1, 2),
        np.asarray(seg_b, dtype=float).reshape(-1, 2),
        complex_.corner_coords[filled],
        all_filled,
    )


def distance_to_set(
    complex_: SimplicialComplex2D, S: Subcomplex, chart: int
) -> Callable[[np.ndarray], np.ndarray]:
    """Chart distance from points to the geometric realization of S."""
    points, seg_a, seg_b, filled, _ = _chart_geometry(complex_, S, chart)

    def distance(xy: np.ndarray) -> np.ndarray:
        xy = np.asarray(xy, dtype=float).reshape(-1, 2)
        d = np.full(len(xy), np.inf)
        if len(points):
            d = np.minimum(d, np.min(np.linalg.norm(xy[:, None, :] - points[None], axis=2), axis=1))
        if len(seg_a):
            d = np.minimum(d, np.min(segment_distances(xy, seg_a, seg_b), axis=1))
        if len(filled):
            d = np.minimum(d, np.min(point_triangle_distances(xy, filled), axis=1))
        return d

    return distance


def beck_factor(distance: np.ndarray, scale: float) -> np.ndarray:
    """Bump factor min(1, (d/scale)^2), zero exactly on the set."""
    return np.minimum(1.0, (np.asarray(distance) / scale) ** 2)


def beck_freeze(flow: Flow, S: Subcomplex, scale: float = 0.1) -> Flow:
    """Multiply the field by a bump vanishing exactly on S.

    Orbits off S keep their curves; every point of S becomes fixed.
    """
    if S.is_empty():
        return Flow(
            flow.complex, flow.fields, flow.frozen, flow.fixed_points, flow.name, flow.metadata
        )
    cx = flow.complex
    fields: Dict[int, FieldFn] = {}
    for chart in cx.charts:
        base = flow.field_for(chart)
        *_, all_filled = _chart_geometry(cx, S, chart)
        if all_filled:
            fields[chart] = _zero_field
            continue
        distance = distance_to_set(cx, S, chart)

        def frozen_field(xy, base=base, distance=distance):
            xy = np.asarray(xy, dtype=float).reshape(-1, 2)
            return np.asarray(base(xy), dtype=float) * beck_factor(distance(xy), scale)[:, None]

        fields[chart] = frozen_field
    metadata = dict(flow.metadata, beck_scale=scale)
    return Flow(cx, fields, flow.frozen.union(S), flow.fixed_points, flow.name, metadata)


# ---------------------------------------------------------------------------
# Integration
# ---------------------------------------------------------------------------


class TerminationReason(Enum):
    """Why an integrated trajectory stopped."""

    HORIZON = "reached-time-horizon"
    TARGET = "entered-target-set"
    LEFT_DOMAIN = "left-domain-set"


@dataclass
class Trajectory:
    """Sampled orbit segment; times are monotone in the direction of travel."""

    times: np.ndarray
    charts: np.ndarray
    points: np.ndarray
    reason: TerminationReason

    @property
    def end(self) -> Tuple[int, np.ndarray]:
        return int(self.charts[-1]), self.points[-1]

    def __len__(self) -> int:
        return len(self.times)


class FlowIntegrator:
    """Batched fixed-step RK4 with chart transitions."""

    MAX_TRANSFERS = 3

    def __init__(self, flow: Flow, step: float = DEFAULT_STEP, t_max: float = DEFAULT_T_MAX):
        if step <= 0:
            raise ValueError("Integrator step must be positive")
        self.flow = flow
        self.step = float(step)
        self.t_max = float(t_max)
        self.atlas = flow.complex.atlas

    def settle(
        self, charts: np.ndarray, xy: np.ndarray
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Move points into the chart that contains them.

        Returns:
            Tuple (charts, xy, triangle ids)

        Raises:
            AtlasError: If a point leaves through a boundary circle
        """
        charts = np.array(charts, dtype=np.int64)
        xy = np.array(xy, dtype=float).reshape(-1, 2)
        tri = self.atlas.locate_many(charts, xy)
        for _ in range(self.MAX_TRANSFERS):
            lost = np.nonzero(tri < 0)[0]
            if not len(lost):
                break
            for chart in np.unique(charts[lost]):
                idx = lost[charts[lost] == chart]
                new_charts, new_xy = self.atlas.transfer(int(chart), xy[idx])
                charts[idx], xy[idx] = new_charts, new_xy
            tri[lost] = self.atlas.locate_many(charts[lost], xy[lost])
        lost = np.nonzero(tri < 0)[0]
        for i in lost:
            # corner cases at chart vertices: snap into the nearest triangle
            chart_tris = self.atlas.chart_triangles(int(charts[i]))
            d = point_triangle_distances(xy[i : i + 1], self.flow.complex.corner_coords[chart_tris])
            tri[i] = chart_tris[int(np.argmin(d[0]))]
        return charts, xy, tri

    def rk4(self, charts: np.ndarray, xy: np.ndarray, h) -> np.ndarray:
        """One RK4 step in the current charts (no transitions)."""
        v = self.flow.velocity
        h = np.asarray(h, dtype=float).reshape(-1, 1) if np.ndim(h) else h
        k1 = v(charts, xy)
        k2 = v(charts, xy + 0.5 * h * k1)
        k3 = v(charts, xy + 0.5 * h * k2)
        k4 = v(charts, xy + h * k3)
        return xy + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    def step_batch(
        self, charts: np.ndarray, xy: np.ndarray, h: float
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Advance every point by one step of size h (negative = backward)."""
        return self.settle(charts, self.rk4(charts, xy, h))

    def advance(
        self, charts: np.ndarray, xy: np.ndarray, T: float
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Flow all points for time T."""
        charts = np.asarray(charts, dtype=np.int64)
        xy = np.asarray(xy, dtype=float).reshape(-1, 2)
        n_steps = max(1, int(math.ceil(abs(T) / self.step - 1e-12)))
        h = T / n_steps
        charts, xy, tri = self.settle(charts, xy)
        if T == 0:
            return charts, xy, tri
        for _ in range(n_steps):
            charts, xy, tri = self.step_batch(charts, xy, h)
        return charts, xy, tri

    def trajectory(
        self,
        chart: int,
        x: Sequence[float],
        T: float,
        target: Optional[Subcomplex] = None,
        domain: Optional[Subcomplex] = None,
    ) -> Trajectory:
        """Single trajectory from (chart, x) for time T with optional stopping sets."""
        charts, xy, tri = self.settle(np.array([chart]), np.array([x], dtype=float))
        direction = 1.0 if T >= 0 else -1.0
        n_steps = max(1, int(math.ceil(abs(T) / self.step - 1e-12)))
        h = direction * abs(T) / n_steps
        times, chart_log, points = [0.0], [int(charts[0])], [xy[0].copy()]
        reason = TerminationReason.HORIZON
        for i in range(n_steps):
            if target is not None and target.triangle_mask[tri[0]]:
                reason = TerminationReason.TARGET
                break
            if domain is not None and not domain.triangle_mask[tri[0]]:
                reason = TerminationReason.LEFT_DOMAIN
                break
            charts, xy, tri = self.step_batch(charts, xy, h)
            times.append((i + 1) * h)
            chart_log.append(int(charts[0]))
            points.append(xy[0].copy())
        else:
            if target is not None and target.triangle_mask[tri[0]]:
                reason = TerminationReason.TARGET
            elif domain is not None and not domain.triangle_mask[tri[0]]:
                reason = TerminationReason.LEFT_DOMAIN
        return Trajectory(np.array(times), np.array(chart_log), np.array(points), reason)


def integrate(
    flow: Flow,
    x: Sequence[float],
    T: float,
    step: float = DEFAULT_STEP,
    chart: int = 0,
    target: Optional[Subcomplex] = None,
    domain: Optional[Subcomplex] = None,
) -> Trajectory:
    """Integrate from x in ``chart`` for time T (negative T runs backward)."""
    return FlowIntegrator(flow, step).trajectory(chart, x, T, target, domain)


def time_tau_map(
    flow: Flow, x: Sequence[float], tau: float, step: float = DEFAULT_STEP, chart: int = 0
) -> Tuple[int, np.ndarray]:
    """Endpoint (chart, point) of the time-tau trajectory from x."""
    charts, xy, _ = FlowIntegrator(flow, step).advance(
        np.array([chart]), np.array([x], dtype=float), tau
    )
    return int(charts[0]), xy[0]


def exit_time(
    flow: Flow,
    N: Subcomplex,
    x: Sequence[float],
    chart: int = 0,
    step: float = DEFAULT_STEP,
    t_max: float = DEFAULT_T_MAX,
) -> Optional[float]:
    """First time the forward orbit of x leaves N, or None within ``t_max``.

    The crossing is located by bisection on the last integrator step.
    """
    integrator = FlowIntegrator(flow, step, t_max)
    charts, xy, tri = integrator.settle(np.array([chart]), np.array([x], dtype=float))
    if not N.triangle_mask[tri[0]]:
        return 0.0
    if not np.any(flow.velocity(charts, xy)):
        return None

    t = 0.0
    n_steps = int(math.ceil(t_max / step))
    for _ in range(n_steps):
        nxt_charts, nxt_xy, nxt_tri = integrator.step_batch(charts, xy, step)
        if not N.triangle_mask[nxt_tri[0]]:
            lo, hi = 0.0, step
            while hi - lo > BISECTION_TOLERANCE * max(1.0, t):
                mid = 0.5 * (lo + hi)
                _, _, mid_tri = integrator.settle(charts, integrator.rk4(charts, xy, mid))
                if N.triangle_mask[mid_tri[0]]:
                    lo = mid
                else:
                    hi = mid
            return t + 0.5 * (lo + hi)
        charts, xy, tri = nxt_charts, nxt_xy, nxt_tri
        t += step
    return None


def entrance_time(
    flow: Flow,
    N: Subcomplex,
    x: Sequence[float],
    chart: int = 0,
    step: float = DEFAULT_STEP,
    t_max: float = DEFAULT_T_MAX,
) -> Optional[float]:
    """Exit time of the backward orbit (entrance time into N)."""
    return exit_time(flow.reversed(), N, x, chart, step, t_max)


# ---------------------------------------------------------------------------
# Families
# ---------------------------------------------------------------------------


@dataclass
class FlowFamily:
    """Parametrized family λ ↦ flow on a fixed surface."""

    name: str
    evaluator: Callable[[float], Flow]
    complex: SimplicialComplex2D
    interval: Tuple[float, float] = (0.0, 1.0)
    reference_set: Optional[Subcomplex] = None
    block: Optional[Subcomplex] = None
    metadata: Dict[str, Any] = field(default_factory=dict)
    _cache: Dict[float, Flow] = field(default_factory=dict, repr=False)

    def at(self, lam: float) -> Flow:
        lo, hi = self.interval
        if not lo <= lam <= hi:
            raise ValueError(f"λ={lam} outside [{lo}, {hi}]")
        key = round(float(lam), 12)
        if key not in self._cache:
            self._cache[key] = self.evaluator(float(lam))
        return self._cache[key]

    def continuity_modulus(
        self, lambdas: Sequence[float], charts: Optional[np.ndarray] = None, points: Optional[np.ndarray] = None
    ) -> float:
        """Largest sampled |v_λ(x) − v_μ(x)| / |λ − μ| over consecutive grid values."""
        if charts is None or points is None:
            charts, points = self.at(lambdas[0]).sample_points()
        worst = 0.0
        values = [self.at(lam).velocity(charts, points) for lam in lambdas]
        for (a, va), (b, vb) in zip(zip(lambdas, values), zip(lambdas[1:], values[1:])):
            if b == a:
                continue
            worst = max(worst, float(np.max(np.linalg.norm(vb - va, axis=1)) / abs(b - a)))
        return worst
