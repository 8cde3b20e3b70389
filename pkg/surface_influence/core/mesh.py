"""
Triangulated surfaces, surface pieces and subcomplexes.

Pieces (disks, annuli, spheres with holes) are planar triangulations whose
boundary circles are regular polygons with the same number of edges at a
given refinement level, so any two circles can be identified vertex by
vertex. Gluing pieces yields a closed oriented ``TriangulatedSurface`` that
keeps every piece as a drawing chart.
"""

import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import matplotlib.tri as mtri
import networkx as nx
import numpy as np
from matplotlib.path import Path as MplPath

from .logging_config import get_logger
from .validation import ensure_valid, validate_surface_parameters

logger = get_logger("mesh")

DEFAULT_SIDES = 12
GRID_SPACING = 0.2
CORE_RING_RADIUS = 0.55
ANNULUS_RADII = (0.4, 0.55, 0.7, 0.85, 1.0)
DISK_RING_RADII = (0.5, 1.0)


class MeshError(ValueError):
    """Raised for invalid complexes."""

    pass


class GluingError(MeshError):
    """Raised when boundary circles cannot be identified."""

    pass


class OrientationError(MeshError):
    """Raised when a complex has no consistent orientation."""

    pass


class AtlasError(RuntimeError):
    """Raised when a point cannot be moved into a neighbouring chart."""

    pass


class PieceKind(Enum):
    """Role of a surface piece in a glued surface."""

    CORE = "core"
    DISK = "disk"
    ANNULUS = "annulus"
    HANDLE = "handle"


# ---------------------------------------------------------------------------
# Planar geometry helpers
# ---------------------------------------------------------------------------


def regular_polygon(
    sides: int, radius: float = 1.0, center: Tuple[float, float] = (0.0, 0.0)
) -> np.ndarray:
    """Vertices of a regular polygon, counter-clockwise from angle 0."""
    angles = 2.0 * np.pi * np.arange(sides) / sides
    return np.column_stack(
        [center[0] + radius * np.cos(angles), center[1] + radius * np.sin(angles)]
    )


def signed_areas(corners: np.ndarray) -> np.ndarray:
    """Signed areas of triangles given as (F, 3, 2) corner arrays."""
    a, b, c = corners[:, 0], corners[:, 1], corners[:, 2]
    return 0.5 * (
        (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1])
        - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])
    )


def segment_distances(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distances from each point to each segment [a_j, b_j], shape (n, m)."""
    p = points[:, None, :]
    ab = (b - a)[None, :, :]
    ap = p - a[None, :, :]
    denom = np.maximum(np.sum(ab * ab, axis=2), 1e-300)
    t = np.clip(np.sum(ap * ab, axis=2) / denom, 0.0, 1.0)
    closest = a[None, :, :] + t[..., None] * ab
    return np.linalg.norm(p - closest, axis=2)


def points_in_triangles(points: np.ndarray, corners: np.ndarray) -> np.ndarray:
    """Boolean (n, m) membership of points in closed triangles."""
    p = points[:, None, :]
    a, b, c = corners[None, :, 0], corners[None, :, 1], corners[None, :, 2]

    def cross(u, v, w):
        return (v[..., 0] - u[..., 0]) * (w[..., 1] - u[..., 1]) - (
            v[..., 1] - u[..., 1]
        ) * (w[..., 0] - u[..., 0])

    d1, d2, d3 = cross(a, b, p), cross(b, c, p), cross(c, a, p)
    eps = 1e-12
    has_neg = (d1 < -eps) | (d2 < -eps) | (d3 < -eps)
    has_pos = (d1 > eps) | (d2 > eps) | (d3 > eps)
    return ~(has_neg & has_pos)


def point_triangle_distances(points: np.ndarray, corners: np.ndarray) -> np.ndarray:
    """Distances from points to closed triangles, shape (n, m)."""
    if len(corners) == 0:
        return np.full((len(points), 0), np.inf)
    edge_d = np.minimum.reduce(
        [
            segment_distances(points, corners[:, i], corners[:, (i + 1) % 3])
            for i in range(3)
        ]
    )
    return np.where(points_in_triangles(points, corners), 0.0, edge_d)


# ---------------------------------------------------------------------------
# Complexes
# ---------------------------------------------------------------------------


class SimplicialComplex2D:
    """Pure 2-dimensional complex with per-triangle chart coordinates."""

    def __init__(
        self,
        triangles: np.ndarray,
        n_vertices: int,
        chart_of_triangle: np.ndarray,
        corner_coords: np.ndarray,
    ):
        self.triangles = np.asarray(triangles, dtype=np.int64).reshape(-1, 3)
        self.n_vertices = int(n_vertices)
        self.chart_of_triangle = np.asarray(chart_of_triangle, dtype=np.int64)
        self.corner_coords = np.asarray(corner_coords, dtype=float).reshape(-1, 3, 2)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @cached_property
    def _edge_tables(self) -> Tuple[np.ndarray, np.ndarray]:
        pairs = self.triangles[:, [[0, 1], [1, 2], [2, 0]]].reshape(-1, 2)
        pairs = np.sort(pairs, axis=1)
        edges, inverse = np.unique(pairs, axis=0, return_inverse=True)
        return edges.astype(np.int64), inverse.reshape(-1, 3).astype(np.int64)

    @property
    def edges(self) -> np.ndarray:
        """Edges as sorted vertex pairs, shape (E, 2)."""
        return self._edge_tables[0]

    @property
    def triangle_edges(self) -> np.ndarray:
        """Edge ids of each triangle; entry k is the edge (t[k], t[k+1])."""
        return self._edge_tables[1]

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def edge_index(self) -> Dict[Tuple[int, int], int]:
        return {(int(u), int(v)): i for i, (u, v) in enumerate(self.edges)}

    def edge_id(self, u: int, v: int) -> int:
        return self.edge_index[(min(u, v), max(u, v))]

    @cached_property
    def edge_triangles(self) -> np.ndarray:
        """Incident triangles per edge, shape (E, 2), padded with -1."""
        table = np.full((self.n_edges, 2), -1, dtype=np.int64)
        fill = np.zeros(self.n_edges, dtype=np.int64)
        for t, row in enumerate(self.triangle_edges):
            for e in row:
                if fill[e] >= 2:
                    raise MeshError(f"Edge {tuple(self.edges[e])} has more than two triangles")
                table[e, fill[e]] = t
                fill[e] += 1
        return table

    @cached_property
    def edge_degree(self) -> np.ndarray:
        return np.bincount(self.triangle_edges.ravel(), minlength=self.n_edges)

    @cached_property
    def vertex_triangles(self) -> List[np.ndarray]:
        buckets: List[List[int]] = [[] for _ in range(self.n_vertices)]
        for t, tri in enumerate(self.triangles):
            for v in tri:
                buckets[v].append(t)
        return [np.asarray(b, dtype=np.int64) for b in buckets]

    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_triangles

    @cached_property
    def charts(self) -> List[int]:
        return sorted(int(c) for c in np.unique(self.chart_of_triangle))

    @cached_property
    def centroids(self) -> np.ndarray:
        return self.corner_coords.mean(axis=1)

    @cached_property
    def cell_diameters(self) -> np.ndarray:
        c = self.corner_coords
        lengths = [np.linalg.norm(c[:, i] - c[:, (i + 1) % 3], axis=1) for i in range(3)]
        return np.max(lengths, axis=0)

    def vertex_coordinates(self, chart: int) -> Dict[int, np.ndarray]:
        """Map vertex id to its coordinates in the given chart."""
        coords: Dict[int, np.ndarray] = {}
        for t in np.nonzero(self.chart_of_triangle == chart)[0]:
            for k in range(3):
                coords.setdefault(int(self.triangles[t, k]), self.corner_coords[t, k])
        return coords

    def cell_graph(self, blocked_edges: Optional[np.ndarray] = None) -> nx.Graph:
        """Triangles adjacent through edges that are not blocked."""
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n_triangles))
        for e, (t0, t1) in enumerate(self.edge_triangles):
            if t1 < 0 or (blocked_edges is not None and blocked_edges[e]):
                continue
            graph.add_edge(int(t0), int(t1))
        return graph

    @cached_property
    def vertex_graph(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n_vertices))
        graph.add_edges_from((int(u), int(v)) for u, v in self.edges)
        return graph

    @cached_property
    def atlas(self) -> "ChartAtlas":
        return ChartAtlas(self)


@dataclass(frozen=True)
class _ChartTable:
    vertices: np.ndarray
    coords: np.ndarray
    triangles: np.ndarray  # global triangle ids, in TriFinder order
    finder: object
    boundary_edges: np.ndarray
    boundary_a: np.ndarray
    boundary_b: np.ndarray
    boundary_outside: np.ndarray  # triangle across the edge, -1 if none


class ChartAtlas:
    """Point location and chart transitions for a complex's drawing charts."""

    def __init__(self, complex_: SimplicialComplex2D):
        self.complex = complex_
        self._tables: Dict[int, _ChartTable] = {}
        for chart in complex_.charts:
            self._tables[chart] = self._build_chart(chart)

    def _build_chart(self, chart: int) -> _ChartTable:
        cx = self.complex
        tri_ids = np.nonzero(cx.chart_of_triangle == chart)[0]
        coords_by_vertex = cx.vertex_coordinates(chart)
        vertices = np.array(sorted(coords_by_vertex), dtype=np.int64)
        local = {int(v): i for i, v in enumerate(vertices)}
        coords = np.array([coords_by_vertex[int(v)] for v in vertices])
        local_tris = np.array(
            [[local[int(v)] for v in cx.triangles[t]] for t in tri_ids], dtype=np.int64
        )
        triangulation = mtri.Triangulation(coords[:, 0], coords[:, 1], local_tris)
        finder = mtri.TrapezoidMapTriFinder(triangulation)

        in_chart = np.zeros(cx.n_triangles, dtype=bool)
        in_chart[tri_ids] = True
        b_edges, b_a, b_b, b_out = [], [], [], []
        for t in tri_ids:
            for k in range(3):
                e = cx.triangle_edges[t, k]
                others = [s for s in cx.edge_triangles[e] if s >= 0 and s != t]
                if others and in_chart[others[0]]:
                    continue
                u, v = int(cx.triangles[t, k]), int(cx.triangles[t, (k + 1) % 3])
                b_edges.append(e)
                b_a.append(coords_by_vertex[u])
                b_b.append(coords_by_vertex[v])
                b_out.append(others[0] if others else -1)
        return _ChartTable(
            vertices=vertices,
            coords=coords,
            triangles=tri_ids,
            finder=finder,
            boundary_edges=np.asarray(b_edges, dtype=np.int64),
            boundary_a=np.asarray(b_a, dtype=float).reshape(-1, 2),
            boundary_b=np.asarray(b_b, dtype=float).reshape(-1, 2),
            boundary_outside=np.asarray(b_out, dtype=np.int64),
        )

    def chart_triangles(self, chart: int) -> np.ndarray:
        return self._tables[chart].triangles

    def locate(self, chart: int, xy: np.ndarray, snap: float = 1e-9) -> np.ndarray:
        """Global triangle ids containing the points, -1 outside the chart.

        Points within ``snap`` of the chart domain are assigned to the
        nearest triangle.
        """
        table = self._tables[chart]
        xy = np.asarray(xy, dtype=float).reshape(-1, 2)
        if len(xy) == 0:
            return np.zeros(0, dtype=np.int64)
        local = np.asarray(table.finder(xy[:, 0], xy[:, 1]), dtype=np.int64)
        result = np.where(local >= 0, table.triangles[np.maximum(local, 0)], -1)
        missing = np.nonzero(result < 0)[0]
        if len(missing):
            d = point_triangle_distances(
                xy[missing], self.complex.corner_coords[table.triangles]
            )
            nearest = np.argmin(d, axis=1)
            close = d[np.arange(len(missing)), nearest] <= snap
            result[missing[close]] = table.triangles[nearest[close]]
        return result

    def locate_many(self, charts: np.ndarray, xy: np.ndarray) -> np.ndarray:
        """Vectorized ``locate`` for points spread over several charts."""
        result = np.full(len(charts), -1, dtype=np.int64)
        for chart in np.unique(charts):
            idx = np.nonzero(charts == chart)[0]
            result[idx] = self.locate(int(chart), xy[idx])
        return result

    def transfer(self, chart: int, xy: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Move points that left ``chart`` into the neighbouring chart.

        The point is expressed in the frame of the nearest boundary edge and
        re-expressed in the same edge's frame in the chart across it.

        Raises:
            AtlasError: If the nearest boundary edge has no neighbour
        """
        table = self._tables[chart]
        xy = np.asarray(xy, dtype=float).reshape(-1, 2)
        if len(table.boundary_edges) == 0:
            raise AtlasError(f"Chart {chart} has no boundary to cross")
        d = segment_distances(xy, table.boundary_a, table.boundary_b)
        j = np.argmin(d, axis=1)
        outside = table.boundary_outside[j]
        if np.any(outside < 0):
            raise AtlasError(f"Trajectory left chart {chart} through a boundary circle")

        cx = self.complex
        new_charts = cx.chart_of_triangle[outside]
        new_xy = np.empty_like(xy)
        for i in range(len(xy)):
            a, b = table.boundary_a[j[i]], table.boundary_b[j[i]]
            e = b - a
            p = xy[i] - a
            length2 = float(e @ e)
            alpha = float(p @ e) / length2
            beta = float(e[0] * p[1] - e[1] * p[0]) / length2
            u, v = cx.edges[table.boundary_edges[j[i]]]
            tri = cx.triangles[outside[i]]
            corners = cx.corner_coords[outside[i]]
            # boundary_a belongs to the lower or higher vertex id; match it
            a_vertex = self._vertex_at(chart, a, int(u), int(v))
            b_vertex = int(v) if a_vertex == int(u) else int(u)
            a2 = corners[list(tri).index(a_vertex)]
            b2 = corners[list(tri).index(b_vertex)]
            e2 = b2 - a2
            new_xy[i] = a2 + alpha * e2 + beta * np.array([-e2[1], e2[0]])
        return new_charts, new_xy

    def _vertex_at(self, chart: int, point: np.ndarray, u: int, v: int) -> int:
        coords = self.complex.vertex_coordinates(chart)
        du = np.linalg.norm(coords[u] - point)
        dv = np.linalg.norm(coords[v] - point)
        return u if du <= dv else v


# ---------------------------------------------------------------------------
# Pieces
# ---------------------------------------------------------------------------


class SurfacePiece(SimplicialComplex2D):
    """Planar triangulated sphere with holes, drawn in a single chart."""

    def __init__(
        self,
        kind: PieceKind,
        coords: np.ndarray,
        triangles: np.ndarray,
        circles: Sequence[Sequence[int]],
        handle_k: int = 0,
        level: int = 0,
        name: str = "",
    ):
        coords = np.asarray(coords, dtype=float)
        triangles = np.asarray(triangles, dtype=np.int64)
        super().__init__(
            triangles, len(coords), np.zeros(len(triangles), dtype=np.int64), coords[triangles]
        )
        self.kind = kind
        self.coords = coords
        self.circles: Tuple[Tuple[int, ...], ...] = tuple(tuple(int(v) for v in c) for c in circles)
        self.handle_k = handle_k
        self.level = level
        self.name = name or kind.value

    @property
    def n_circles(self) -> int:
        return len(self.circles)

    def circle_length(self, index: int) -> int:
        return len(self.circles[index])

    def circle_edges(self, index: int) -> List[int]:
        cycle = self.circles[index]
        return [self.edge_id(cycle[i], cycle[(i + 1) % len(cycle)]) for i in range(len(cycle))]

    def circle_center(self, index: int) -> np.ndarray:
        return self.coords[list(self.circles[index])].mean(axis=0)

    def validate(self) -> None:
        """Check the piece invariants.

        Raises:
            MeshError: If edges, circles or χ are inconsistent
        """
        degree = self.edge_degree
        if np.any((degree < 1) | (degree > 2)):
            raise MeshError(f"Piece {self.name}: edges must have one or two triangles")
        boundary = set(np.nonzero(degree == 1)[0].tolist())
        listed = set()
        for i in range(self.n_circles):
            edges = self.circle_edges(i)
            if len(set(self.circles[i])) != len(self.circles[i]):
                raise MeshError(f"Piece {self.name}: circle {i} is not simple")
            listed.update(edges)
        if listed != boundary:
            raise MeshError(f"Piece {self.name}: boundary circles do not cover the boundary")
        if np.any(signed_areas(self.corner_coords) <= 0):
            raise OrientationError(f"Piece {self.name}: triangles must be counter-clockwise")
        expected = 2 - self.n_circles
        if self.euler_characteristic() != expected:
            raise MeshError(
                f"Piece {self.name}: χ = {self.euler_characteristic()}, expected {expected}"
            )

    def subdivide(self) -> "SurfacePiece":
        """Midpoint subdivision; every circle doubles its edge count."""
        new_tris, _ = _split_triangles(self.triangles, self.triangle_edges, self.n_vertices)
        mids = 0.5 * (self.coords[self.edges[:, 0]] + self.coords[self.edges[:, 1]])
        coords = np.vstack([self.coords, mids])
        circles = []
        for cycle in self.circles:
            refined = []
            for i, u in enumerate(cycle):
                v = cycle[(i + 1) % len(cycle)]
                refined.extend([u, self.n_vertices + self.edge_id(u, v)])
            circles.append(refined)
        return SurfacePiece(
            self.kind, coords, new_tris, circles, self.handle_k, self.level + 1, self.name
        )

    def subdivided(self, times: int) -> "SurfacePiece":
        piece = self
        for _ in range(times):
            piece = piece.subdivide()
        return piece


def _split_triangles(
    triangles: np.ndarray, triangle_edges: np.ndarray, n_vertices: int
) -> Tuple[np.ndarray, np.ndarray]:
    """Split each triangle into four, keeping orientation.

    Returns the new triangles and, per new triangle, the corner weights used
    to compute chart coordinates (shape (4F, 3, 3)).
    """
    a, b, c = triangles[:, 0], triangles[:, 1], triangles[:, 2]
    m_ab = n_vertices + triangle_edges[:, 0]
    m_bc = n_vertices + triangle_edges[:, 1]
    m_ca = n_vertices + triangle_edges[:, 2]
    children = np.stack(
        [
            np.column_stack([a, m_ab, m_ca]),
            np.column_stack([m_ab, b, m_bc]),
            np.column_stack([m_ca, m_bc, c]),
            np.column_stack([m_ab, m_bc, m_ca]),
        ],
        axis=1,
    ).reshape(-1, 3)
    h = 0.5
    weights = np.array(
        [
            [[1, 0, 0], [h, h, 0], [h, 0, h]],
            [[h, h, 0], [0, 1, 0], [0, h, h]],
            [[h, 0, h], [0, h, h], [0, 0, 1]],
            [[h, h, 0], [0, h, h], [h, 0, h]],
        ]
    )
    return children, weights


def _orient_ccw(coords: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    triangles = np.array(triangles, dtype=np.int64)
    flip = signed_areas(coords[triangles]) < 0
    triangles[flip] = triangles[flip][:, [0, 2, 1]]
    return triangles


def _boundary_cycles(
    coords: np.ndarray, triangles: np.ndarray, centers: Sequence[Sequence[float]]
) -> List[List[int]]:
    """Boundary cycles in induced orientation, ordered to match ``centers``.

    Each cycle starts at the vertex at angle 0 seen from its own center.
    """
    directed = set()
    for tri in triangles:
        for k in range(3):
            directed.add((int(tri[k]), int(tri[(k + 1) % 3])))
    successor = {u: v for (u, v) in directed if (v, u) not in directed}
    cycles = []
    remaining = set(successor)
    while remaining:
        start = min(remaining)
        cycle = [start]
        remaining.discard(start)
        v = successor[start]
        while v != start:
            cycle.append(v)
            remaining.discard(v)
            v = successor[v]
        cycles.append(cycle)

    ordered: List[List[int]] = []
    for center in centers:
        center = np.asarray(center, dtype=float)
        best = min(
            cycles, key=lambda cyc: float(np.linalg.norm(coords[cyc].mean(axis=0) - center))
        )
        cycles.remove(best)
        rel = coords[best] - coords[best].mean(axis=0)
        angle0 = int(np.argmax(rel[:, 0] / np.maximum(np.linalg.norm(rel, axis=1), 1e-300)))
        ordered.append(best[angle0:] + best[:angle0])
    if cycles:
        raise MeshError("Piece has more boundary cycles than expected")
    return ordered


def disk_piece(
    sides: int = DEFAULT_SIDES,
    ring_radii: Sequence[float] = DISK_RING_RADII,
    kind: PieceKind = PieceKind.DISK,
) -> SurfacePiece:
    """Disk drawn as a center with concentric polygon rings; circle 0 is outer."""
    coords = [np.zeros((1, 2))]
    rings = []
    offset = 1
    for r in ring_radii:
        coords.append(regular_polygon(sides, r))
        rings.append(np.arange(offset, offset + sides))
        offset += sides
    coords_arr = np.vstack(coords)
    tris = []
    first = rings[0]
    for j in range(sides):
        tris.append([0, first[j], first[(j + 1) % sides]])
    for inner, outer in zip(rings, rings[1:]):
        for j in range(sides):
            jn = (j + 1) % sides
            tris.append([inner[j], outer[j], outer[jn]])
            tris.append([inner[j], outer[jn], inner[jn]])
    tris_arr = _orient_ccw(coords_arr, np.array(tris))
    circles = _boundary_cycles(coords_arr, tris_arr, [(0.0, 0.0)])
    piece = SurfacePiece(kind, coords_arr, tris_arr, circles, name=kind.value)
    piece.validate()
    return piece


def annulus_piece(
    sides: int = DEFAULT_SIDES,
    radii: Sequence[float] = ANNULUS_RADII,
    kind: PieceKind = PieceKind.ANNULUS,
) -> SurfacePiece:
    """Annulus between two concentric polygons; circle 0 is the inner one."""
    coords_arr = np.vstack([regular_polygon(sides, r) for r in radii])
    tris = []
    for i in range(len(radii) - 1):
        inner = np.arange(i * sides, (i + 1) * sides)
        outer = inner + sides
        for j in range(sides):
            jn = (j + 1) % sides
            tris.append([inner[j], outer[j], outer[jn]])
            tris.append([inner[j], outer[jn], inner[jn]])
    tris_arr = _orient_ccw(coords_arr, np.array(tris))
    # both circles share the origin as center; inner first
    inner_cycle, outer_cycle = _annulus_cycles(coords_arr, tris_arr, radii[0])
    piece = SurfacePiece(
        kind, coords_arr, tris_arr, [inner_cycle, outer_cycle], handle_k=1, name=kind.value
    )
    piece.validate()
    return piece


def _annulus_cycles(
    coords: np.ndarray, triangles: np.ndarray, inner_radius: float
) -> Tuple[List[int], List[int]]:
    cycles = _boundary_cycles(coords, triangles, [(0.0, 0.0), (0.0, 0.0)])
    radius = [float(np.linalg.norm(coords[c], axis=1).mean()) for c in cycles]
    if abs(radius[0] - inner_radius) > abs(radius[1] - inner_radius):
        cycles.reverse()
    return cycles[0], cycles[1]


def _delaunay_piece(
    kind: PieceKind,
    hole_centers: Sequence[Tuple[float, float]],
    hole_radius: float,
    sides: int = DEFAULT_SIDES,
    spacing: float = GRID_SPACING,
    handle_k: int = 0,
) -> SurfacePiece:
    """Unit polygon with polygonal holes, triangulated by Delaunay.

    Interior points keep clear of the holes so every hole edge is a
    Gabriel edge and survives in the Delaunay triangulation.
    """
    outer = regular_polygon(sides, 1.0)
    holes = [regular_polygon(sides, hole_radius, c) for c in hole_centers]

    row_height = spacing * math.sqrt(3.0) / 2.0
    n_rows = int(1.0 / row_height) + 1
    n_cols = int(1.0 / spacing) + 1
    limit = math.cos(math.pi / sides) - 0.5 * spacing
    clearance = max(1.35 * hole_radius, hole_radius + 0.5 * spacing)
    grid = []
    for j in range(-n_rows, n_rows + 1):
        y = j * row_height
        shift = 0.5 * spacing if j % 2 else 0.0
        for i in range(-n_cols, n_cols + 1):
            x = i * spacing + shift
            if math.hypot(x, y) > limit:
                continue
            if any(math.hypot(x - cx, y - cy) < clearance for cx, cy in hole_centers):
                continue
            grid.append((x, y))
    coords = np.vstack([outer, *holes, np.asarray(grid, dtype=float).reshape(-1, 2)])

    triangulation = mtri.Triangulation(coords[:, 0], coords[:, 1])
    tris = triangulation.triangles
    centroids = coords[tris].mean(axis=1)
    keep = np.ones(len(tris), dtype=bool)
    for hole in holes:
        keep &= ~MplPath(hole).contains_points(centroids)
    keep &= np.abs(signed_areas(coords[tris])) > 1e-12
    tris = _orient_ccw(coords, tris[keep])

    used = np.unique(tris)
    if len(used) != len(coords):
        remap = -np.ones(len(coords), dtype=np.int64)
        remap[used] = np.arange(len(used))
        coords, tris = coords[used], remap[tris]

    centers = [(0.0, 0.0)] + [tuple(c) for c in hole_centers]
    cycles = _boundary_cycles(coords, tris, centers)
    if kind is PieceKind.HANDLE:
        cycles = cycles[1:] + cycles[:1]  # inner holes first, outer circle last
    piece = SurfacePiece(kind, coords, tris, cycles, handle_k=handle_k, name=kind.value)
    piece.validate()
    return piece


def handle_piece(k: int, sides: int = DEFAULT_SIDES) -> SurfacePiece:
    """Sphere with k+1 holes: k inner holes on the x-axis and the outer circle.

    Circles 0..k-1 are the inner holes from left to right, circle k is the
    outer circle.
    """
    if k < 2:
        raise MeshError("A handle piece needs k >= 2; use an annulus for k = 1")
    xs, radius = handle_hole_layout(k)
    return _delaunay_piece(
        PieceKind.HANDLE, [(x, 0.0) for x in xs], radius, sides, handle_k=k
    )


def handle_hole_layout(k: int) -> Tuple[List[float], float]:
    """Centers on the x-axis and hole radius used by ``handle_piece``."""
    spacing = 1.0 / (k - 1)
    return [-0.5 + j * spacing for j in range(k)], min(0.12, 0.2 * spacing)


def sphere_with_holes(
    holes: int,
    subdiv: int = 0,
    sides: int = DEFAULT_SIDES,
    kind: PieceKind = PieceKind.CORE,
) -> SurfacePiece:
    """Sphere with ``holes`` disjoint open disks removed, χ = 2 - holes.

    Circle 0 is the outer circle; the others sit on a ring around the center.

    Raises:
        ValidationError: If holes < 1 or subdiv < 0
    """
    ensure_valid(validate_surface_parameters(holes, subdiv))
    if holes == 1:
        piece = disk_piece(sides, kind=kind)
    elif holes == 2:
        annulus = annulus_piece(sides, kind=kind)
        # outer circle first, like every other core
        piece = SurfacePiece(
            kind, annulus.coords, annulus.triangles, annulus.circles[::-1], name=kind.value
        )
    else:
        inner = holes - 1
        angles = 2.0 * np.pi * np.arange(inner) / inner
        centers = [
            (CORE_RING_RADIUS * math.cos(a), CORE_RING_RADIUS * math.sin(a)) for a in angles
        ]
        chord = 2.0 * CORE_RING_RADIUS * math.sin(math.pi / inner)
        piece = _delaunay_piece(kind, centers, min(0.15, 0.3 * chord), sides)
    return piece.subdivided(subdiv)


# ---------------------------------------------------------------------------
# Closed surfaces and subcomplexes
# ---------------------------------------------------------------------------


class TriangulatedSurface(SimplicialComplex2D):
    """Closed oriented triangulated surface with a drawing chart per piece."""

    def __init__(
        self,
        triangles: np.ndarray,
        n_vertices: int,
        chart_of_triangle: np.ndarray,
        corner_coords: np.ndarray,
        name: str = "surface",
        level: int = 0,
        check: bool = True,
    ):
        super().__init__(triangles, n_vertices, chart_of_triangle, corner_coords)
        self.name = name
        self.level = level
        if check:
            self.validate()

    def validate(self) -> None:
        """Check the closed-surface invariants.

        Raises:
            MeshError: If an edge does not have exactly two triangles, the
                1-skeleton is disconnected or χ is odd
            OrientationError: If the triangle orientations disagree
        """
        if np.any(self.edge_degree != 2):
            bad = int(np.sum(self.edge_degree != 2))
            raise MeshError(f"{bad} edges are not incident to exactly two triangles")
        directed = self.triangles[:, [[0, 1], [1, 2], [2, 0]]].reshape(-1, 2)
        if len(np.unique(directed, axis=0)) != len(directed):
            raise OrientationError("Triangles are not consistently oriented")
        used = np.zeros(self.n_vertices, dtype=bool)
        used[self.triangles.ravel()] = True
        if not used.all() or not nx.is_connected(self.vertex_graph):
            raise MeshError("The 1-skeleton is not connected")
        if self.euler_characteristic() % 2:
            raise MeshError(f"Odd Euler characteristic {self.euler_characteristic()}")

    @property
    def genus(self) -> int:
        return (2 - self.euler_characteristic()) // 2

    def subdivide(self) -> "TriangulatedSurface":
        new_tris, weights = _split_triangles(
            self.triangles, self.triangle_edges, self.n_vertices
        )
        corners = np.einsum("kij,fjd->fkid", weights, self.corner_coords)
        return TriangulatedSurface(
            new_tris,
            self.n_vertices + self.n_edges,
            np.repeat(self.chart_of_triangle, 4),
            corners.reshape(-1, 3, 2),
            name=self.name,
            level=self.level + 1,
            check=False,
        )


class Subcomplex:
    """Face-closed set of simplices of a parent complex, stored as masks."""

    def __init__(
        self,
        parent: SimplicialComplex2D,
        vertex_mask: Optional[np.ndarray] = None,
        edge_mask: Optional[np.ndarray] = None,
        triangle_mask: Optional[np.ndarray] = None,
        close: bool = True,
    ):
        self.parent = parent
        self.vertex_mask = (
            np.zeros(parent.n_vertices, dtype=bool)
            if vertex_mask is None
            else np.asarray(vertex_mask, dtype=bool).copy()
        )
        self.edge_mask = (
            np.zeros(parent.n_edges, dtype=bool)
            if edge_mask is None
            else np.asarray(edge_mask, dtype=bool).copy()
        )
        self.triangle_mask = (
            np.zeros(parent.n_triangles, dtype=bool)
            if triangle_mask is None
            else np.asarray(triangle_mask, dtype=bool).copy()
        )
        if close:
            self._close()

    def _close(self) -> None:
        p = self.parent
        self.edge_mask[p.triangle_edges[self.triangle_mask].ravel()] = True
        self.vertex_mask[p.edges[self.edge_mask].ravel()] = True

    @classmethod
    def from_triangles(cls, parent: SimplicialComplex2D, ids: Iterable[int]) -> "Subcomplex":
        mask = np.zeros(parent.n_triangles, dtype=bool)
        mask[np.fromiter((int(i) for i in ids), dtype=np.int64)] = True
        return cls(parent, triangle_mask=mask)

    @classmethod
    def from_edges(cls, parent: SimplicialComplex2D, ids: Iterable[int]) -> "Subcomplex":
        mask = np.zeros(parent.n_edges, dtype=bool)
        mask[np.fromiter((int(i) for i in ids), dtype=np.int64)] = True
        return cls(parent, edge_mask=mask)

    @classmethod
    def from_vertices(cls, parent: SimplicialComplex2D, ids: Iterable[int]) -> "Subcomplex":
        mask = np.zeros(parent.n_vertices, dtype=bool)
        mask[np.fromiter((int(i) for i in ids), dtype=np.int64)] = True
        return cls(parent, vertex_mask=mask)

    @classmethod
    def empty(cls, parent: SimplicialComplex2D) -> "Subcomplex":
        return cls(parent)

    @classmethod
    def full(cls, parent: SimplicialComplex2D) -> "Subcomplex":
        return cls(parent, triangle_mask=np.ones(parent.n_triangles, dtype=bool))

    @property
    def cells(self) -> np.ndarray:
        return np.nonzero(self.triangle_mask)[0]

    @property
    def edge_ids(self) -> np.ndarray:
        return np.nonzero(self.edge_mask)[0]

    @property
    def vertex_ids(self) -> np.ndarray:
        return np.nonzero(self.vertex_mask)[0]

    @property
    def counts(self) -> Tuple[int, int, int]:
        return (
            int(self.vertex_mask.sum()),
            int(self.edge_mask.sum()),
            int(self.triangle_mask.sum()),
        )

    def is_empty(self) -> bool:
        return not self.vertex_mask.any()

    def contains_triangle(self, t: int) -> bool:
        return bool(self.triangle_mask[t])

    def is_face_closed(self) -> bool:
        p = self.parent
        edges_ok = self.edge_mask[p.triangle_edges[self.triangle_mask]].all()
        verts_ok = self.vertex_mask[p.edges[self.edge_mask]].all()
        return bool(edges_ok and verts_ok)

    def euler_characteristic(self) -> int:
        v, e, f = self.counts
        return v - e + f

    def union(self, other: "Subcomplex") -> "Subcomplex":
        return Subcomplex(
            self.parent,
            self.vertex_mask | other.vertex_mask,
            self.edge_mask | other.edge_mask,
            self.triangle_mask | other.triangle_mask,
        )

    def intersection(self, other: "Subcomplex") -> "Subcomplex":
        return Subcomplex(
            self.parent,
            self.vertex_mask & other.vertex_mask,
            self.edge_mask & other.edge_mask,
            self.triangle_mask & other.triangle_mask,
            close=False,
        )

    def contains(self, other: "Subcomplex") -> bool:
        return bool(
            np.all(self.vertex_mask[other.vertex_mask])
            and np.all(self.edge_mask[other.edge_mask])
            and np.all(self.triangle_mask[other.triangle_mask])
        )

    def boundary(self) -> "Subcomplex":
        """Edges with exactly one incident member triangle, with their vertices."""
        p = self.parent
        count = np.bincount(
            p.triangle_edges[self.triangle_mask].ravel(), minlength=p.n_edges
        )
        return Subcomplex(p, edge_mask=count == 1)

    def subdivided(self, refined: SimplicialComplex2D) -> "Subcomplex":
        """Image of this subcomplex in the midpoint subdivision ``refined``."""
        p = self.parent
        if refined.n_vertices != p.n_vertices + p.n_edges:
            raise MeshError("Target is not the midpoint subdivision of the parent")
        vertices = np.zeros(refined.n_vertices, dtype=bool)
        vertices[: p.n_vertices] = self.vertex_mask
        vertices[p.n_vertices :] = self.edge_mask
        triangles = np.repeat(self.triangle_mask, 4)
        edges = np.zeros(refined.n_edges, dtype=bool)
        for e in self.edge_ids:
            u, v = p.edges[e]
            m = p.n_vertices + e
            edges[refined.edge_id(int(u), int(m))] = True
            edges[refined.edge_id(int(m), int(v))] = True
        return Subcomplex(refined, vertices, edges, triangles)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Subcomplex):
            return NotImplemented
        return (
            self.parent is other.parent
            and np.array_equal(self.vertex_mask, other.vertex_mask)
            and np.array_equal(self.edge_mask, other.edge_mask)
            and np.array_equal(self.triangle_mask, other.triangle_mask)
        )

    def __repr__(self) -> str:
        v, e, f = self.counts
        return f"Subcomplex(V={v}, E={e}, F={f})"


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def euler_characteristic(M: SimplicialComplex2D) -> int:
    """V - E + F of the complex."""
    return M.euler_characteristic()


def genus(M: TriangulatedSurface) -> int:
    """Genus from χ = 2 - 2g.

    Raises:
        MeshError: If χ is odd or the surface is not orientable
    """
    M.validate()
    return M.genus


def subdivide(M: TriangulatedSurface) -> TriangulatedSurface:
    """Midpoint (1 -> 4) subdivision; use ``Subcomplex.subdivided`` for tags."""
    return M.subdivide()


def star_neighborhood(S: Subcomplex, rings: int) -> Subcomplex:
    """Closed star of S iterated ``rings`` times."""
    p = S.parent
    current = S
    for _ in range(rings):
        tri_mask = current.vertex_mask[p.triangles].any(axis=1)
        current = Subcomplex(
            p, current.vertex_mask, current.edge_mask, current.triangle_mask | tri_mask
        )
    return current


def default_pattern(
    core: SurfacePiece, disks: Sequence[SurfacePiece], handles: Sequence[SurfacePiece]
) -> List[Tuple[int, int, int]]:
    """Pair core circles with piece circles in order: disks first, then handles."""
    pattern = []
    next_core = 0
    for index, piece in enumerate(list(disks) + list(handles), start=1):
        for circle in range(piece.n_circles):
            pattern.append((next_core, index, circle))
            next_core += 1
    if next_core != core.n_circles:
        raise GluingError(
            f"Pieces provide {next_core} circles but the core has {core.n_circles}"
        )
    return pattern


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # smallest (piece, local) key is the representative
            self.parent[max(ra, rb)] = min(ra, rb)


def glue(
    core: SurfacePiece,
    disks: Sequence[SurfacePiece] = (),
    handles: Sequence[SurfacePiece] = (),
    pattern: Optional[Sequence[Tuple]] = None,
    name: str = "surface",
) -> Tuple[TriangulatedSurface, Subcomplex]:
    """Glue pieces onto the core along matched boundary circles.

    Circle a of the core and circle b of a piece are identified by
    ``a_i <-> b_{-i mod n}``, which reverses the induced orientations and so
    keeps the glued triangles consistently oriented. A pattern entry may carry
    a fourth ``flipped`` flag that identifies ``a_i <-> b_i`` instead.

    Returns:
        The closed surface and the glued image of the core

    Raises:
        GluingError: If the pattern is not a perfect matching or lengths differ
        OrientationError: If the result is not consistently oriented
    """
    pieces = [core, *disks, *handles]
    if pattern is None:
        pattern = default_pattern(core, disks, handles)

    used_core = sorted(entry[0] for entry in pattern)
    if used_core != list(range(core.n_circles)):
        raise GluingError("Every core circle must be matched exactly once")
    used_pieces = sorted((entry[1], entry[2]) for entry in pattern)
    expected = sorted(
        (i, c) for i, piece in enumerate(pieces) if i > 0 for c in range(piece.n_circles)
    )
    if used_pieces != expected:
        raise GluingError("Every piece circle must be matched exactly once")

    offsets = np.cumsum([0] + [p.n_vertices for p in pieces])
    uf = _UnionFind(int(offsets[-1]))
    for entry in pattern:
        core_circle, index, piece_circle = entry[0], entry[1], entry[2]
        flipped = bool(entry[3]) if len(entry) > 3 else False
        a = core.circles[core_circle]
        b = pieces[index].circles[piece_circle]
        if len(a) != len(b):
            raise GluingError(
                f"Circle lengths differ: core circle {core_circle} has {len(a)} edges, "
                f"piece {index} circle {piece_circle} has {len(b)}"
            )
        n = len(a)
        for i in range(n):
            j = i if flipped else (-i) % n
            uf.union(int(offsets[0] + a[i]), int(offsets[index] + b[j]))

    roots = np.array([uf.find(i) for i in range(int(offsets[-1]))])
    unique_roots = np.unique(roots)
    relabel = np.searchsorted(unique_roots, roots)

    triangles = np.vstack([relabel[offsets[i] + p.triangles] for i, p in enumerate(pieces)])
    charts = np.concatenate(
        [np.full(p.n_triangles, i, dtype=np.int64) for i, p in enumerate(pieces)]
    )
    corners = np.vstack([p.corner_coords for p in pieces])
    level = core.level
    surface = TriangulatedSurface(
        triangles, len(unique_roots), charts, corners, name=name, level=level
    )
    K = Subcomplex.from_triangles(surface, range(core.n_triangles))
    logger.debug(
        f"Glued {len(pieces)} pieces into {name}: V={surface.n_vertices}, "
        f"E={surface.n_edges}, F={surface.n_triangles}, genus={surface.genus}"
    )
    return surface, K


def build_sphere(subdiv: int = 0) -> TriangulatedSurface:
    """Sphere from two square fans (an octahedron at level 0)."""
    north = disk_piece(sides=4, ring_radii=(1.0,), kind=PieceKind.CORE)
    south = disk_piece(sides=4, ring_radii=(1.0,))
    surface, _ = glue(north, [south], name="sphere")
    for _ in range(subdiv):
        surface = surface.subdivide()
    return surface


def canonical_hash(M: SimplicialComplex2D) -> str:
    """Relabeling-invariant hash of the complex's 1-skeleton and counts."""
    wl = nx.weisfeiler_lehman_graph_hash(M.vertex_graph, iterations=4)
    return f"{M.n_vertices}-{M.n_edges}-{M.n_triangles}-{wl}"
