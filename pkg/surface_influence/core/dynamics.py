"""
Combinatorial Conley analysis.

Cells are the triangles of the working mesh. The grid map sends a cell to the
one-ring bloat of the cells hit by its samples after time τ; invariant parts,
isolating blocks and their entrance and exit collars are computed on that
digraph. The region of influence of a stationary set K is classified by
integrating sample points forward and backward until they settle near K, a
tagged fixed point or a frozen set.
"""

import math
from collections import Counter, deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple, Union

import networkx as nx
import numpy as np

from .config import Config
from .flow import DEFAULT_STEP, DEFAULT_T_MAX, FixedPoint, FixedPointKind, Flow, FlowIntegrator, distance_to_set
from .logging_config import get_logger, log_duration
from .mesh import SimplicialComplex2D, Subcomplex, segment_distances, star_neighborhood

logger = get_logger("dynamics")

OUTSIDE_GRID = -1

CellSet = FrozenSet[int]
EndKey = Tuple[int, int]


class NotIsolatingError(ValueError):
    """Raised when a neighborhood does not isolate its invariant part."""

    pass


class CellLabel(Enum):
    """Trichotomy labels of sample points and cells."""

    PURELY_ATTRACTED = "purely-attracted"
    PURELY_REPELLED = "purely-repelled"
    HOMOCLINIC = "homoclinic"
    OUTSIDE = "outside-I(K)"
    IN_K = "in-K"
    UNDETERMINED = "undetermined"


INFLUENCE_LABELS = frozenset(
    {CellLabel.PURELY_ATTRACTED, CellLabel.PURELY_REPELLED, CellLabel.HOMOCLINIC}
)
PURE_LABELS = frozenset({CellLabel.PURELY_ATTRACTED, CellLabel.PURELY_REPELLED})


class KCharacter(Enum):
    """How K acts on its block."""

    ATTRACTOR = "attractor"
    REPELLER = "repeller"
    NEITHER = "neither"


@dataclass
class ClassificationParams:
    """Resolution settings for grids and sample classification.

    ``fixed_point_radius`` is a multiple of the mean cell diameter; the dwell
    time is ``dwell_factor`` grid steps τ.
    """

    step: float = DEFAULT_STEP
    t_max: float = DEFAULT_T_MAX
    tau_factor: float = 6.0
    dwell_factor: float = 20.0
    fixed_point_radius: float = 0.5
    block_width: float = 0.2
    undetermined_limit: float = 0.01
    target_rings: int = 1

    @classmethod
    def from_config(cls, config: Optional[Config] = None, **overrides: Any) -> "ClassificationParams":
        config = config or Config()
        values = {
            "step": float(config.get("step", cls.step)),
            "t_max": float(config.get("t_max", cls.t_max)),
            "tau_factor": float(config.get("tau_factor", cls.tau_factor)),
            "dwell_factor": float(config.get("dwell_factor", cls.dwell_factor)),
            "fixed_point_radius": float(config.get("fixed_point_radius", cls.fixed_point_radius)),
            "block_width": float(config.get("block_width", cls.block_width)),
            "undetermined_limit": float(config.get("undetermined_limit", cls.undetermined_limit)),
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def as_dict(self) -> Dict[str, Any]:
        return {
            "step": self.step,
            "t_max": self.t_max,
            "tau_factor": self.tau_factor,
            "dwell_factor": self.dwell_factor,
            "fixed_point_radius": self.fixed_point_radius,
            "block_width": self.block_width,
            "undetermined_limit": self.undetermined_limit,
            "target_rings": self.target_rings,
        }


def _cell_ids(cells: Union[Subcomplex, Iterable[int]]) -> Set[int]:
    if isinstance(cells, Subcomplex):
        return {int(c) for c in cells.cells}
    return {int(c) for c in cells}


def triangle_star(M: SimplicialComplex2D, t: int) -> np.ndarray:
    """Triangles sharing at least one vertex with t (t included)."""
    return np.unique(np.concatenate([M.vertex_triangles[int(v)] for v in M.triangles[t]]))


def cells_touching(M: SimplicialComplex2D, vertex_mask: np.ndarray) -> np.ndarray:
    """Mask of triangles with a vertex in ``vertex_mask``."""
    return vertex_mask[M.triangles].any(axis=1)


# ---------------------------------------------------------------------------
# Grid map
# ---------------------------------------------------------------------------


@dataclass
class GridDynamics:
    """Multivalued cell map F with its unbloated hit map.

    Images leaving the cell set are recorded as the node ``OUTSIDE_GRID``.
    """

    cells: np.ndarray
    forward: nx.DiGraph
    hits: nx.DiGraph
    tau: float = 0.0
    complex: Optional[SimplicialComplex2D] = None

    @classmethod
    def from_edges(
        cls,
        cells: Iterable[int],
        edges: Iterable[Tuple[int, int]],
        complex_: Optional[SimplicialComplex2D] = None,
    ) -> "GridDynamics":
        """Grid from an explicit edge list (used for synthetic maps)."""
        graph = nx.DiGraph()
        graph.add_nodes_from(int(c) for c in cells)
        graph.add_edges_from((int(a), int(b)) for a, b in edges)
        return cls(np.array(sorted(graph.nodes)), graph, graph.copy(), 0.0, complex_)

    @property
    def reverse(self) -> nx.DiGraph:
        return self.forward.reverse(copy=False)

    def image(self, cell: int) -> Set[int]:
        return set(self.forward.successors(int(cell)))

    def preimage(self, cell: int) -> Set[int]:
        return set(self.forward.predecessors(int(cell)))

    def escapes(self, cell: int) -> bool:
        return OUTSIDE_GRID in self.image(cell)


def grid_tau(
    M: SimplicialComplex2D,
    flow: Flow,
    tau_factor: float = 6.0,
    cells: Optional[Iterable[int]] = None,
) -> float:
    """τ = tau_factor × mean cell diameter / largest sampled speed."""
    ids = np.arange(M.n_triangles) if cells is None else np.array(sorted(_cell_ids(cells)), dtype=np.int64)
    diameter = float(np.mean(M.cell_diameters[ids])) if len(ids) else 1.0
    speed = flow.max_speed(ids)
    if speed <= 0:
        logger.debug("Field vanishes on the grid; τ falls back to the cell scale")
        return tau_factor * diameter
    return tau_factor * diameter / speed


def grid_samples(
    M: SimplicialComplex2D, cells: Sequence[int]
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unique vertex, edge-midpoint and centroid samples of a cell set.

    Returns:
        Tuple (charts, points, cell_samples) with cell_samples of shape (n, 7)
        indexing the sample arrays
    """
    cells = np.asarray(cells, dtype=np.int64)
    n = len(cells)
    corners = M.corner_coords[cells]
    charts = M.chart_of_triangle[cells]

    vertex_ids = M.triangles[cells].ravel()
    uniq_v, first_v, inv_v = np.unique(vertex_ids, return_index=True, return_inverse=True)
    v_xy = corners.reshape(-1, 2)[first_v]
    v_chart = np.repeat(charts, 3)[first_v]

    edge_ids = M.triangle_edges[cells].ravel()
    uniq_e, first_e, inv_e = np.unique(edge_ids, return_index=True, return_inverse=True)
    mid = 0.5 * (corners + np.roll(corners, -1, axis=1))
    e_xy = mid.reshape(-1, 2)[first_e]
    e_chart = np.repeat(charts, 3)[first_e]

    c_xy = corners.mean(axis=1)

    points = np.concatenate([v_xy, e_xy, c_xy])
    sample_charts = np.concatenate([v_chart, e_chart, charts])
    offset_e = len(uniq_v)
    offset_c = offset_e + len(uniq_e)
    cell_samples = np.column_stack(
        [
            inv_v.reshape(n, 3),
            offset_e + inv_e.reshape(n, 3),
            offset_c + np.arange(n),
        ]
    )
    return sample_charts, points, cell_samples


def build_grid(
    M: SimplicialComplex2D,
    flow: Flow,
    tau: float,
    cells: Optional[Iterable[int]] = None,
    step: float = DEFAULT_STEP,
) -> GridDynamics:
    """Outer approximation of the time-τ map on ``cells`` (default: all)."""
    if tau <= 0:
        raise ValueError("τ must be positive")
    ids = np.arange(M.n_triangles) if cells is None else np.array(sorted(_cell_ids(cells)), dtype=np.int64)
    members = set(int(c) for c in ids)
    charts, points, cell_samples = grid_samples(M, ids)
    _, _, hit = FlowIntegrator(flow, step).advance(charts, points, tau)

    hits = nx.DiGraph()
    forward = nx.DiGraph()
    hits.add_nodes_from(members)
    forward.add_nodes_from(members)
    stars: Dict[int, Tuple[List[int], bool]] = {}

    for row, c in enumerate(ids):
        c = int(c)
        for h in np.unique(hit[cell_samples[row]]):
            h = int(h)
            hits.add_edge(c, h if h in members else OUTSIDE_GRID)
            if h not in stars:
                star = [int(s) for s in triangle_star(M, h)]
                inside = [s for s in star if s in members]
                stars[h] = (inside, len(inside) < len(star))
            inside, leaks = stars[h]
            forward.add_edges_from((c, s) for s in inside)
            if leaks:
                forward.add_edge(c, OUTSIDE_GRID)

    logger.debug(f"Grid map on {len(ids)} cells, τ={tau:.4g}, {forward.number_of_edges()} arrows")
    return GridDynamics(ids, forward, hits, tau, M)


def invariant_part(G: GridDynamics, N: Union[Subcomplex, Iterable[int]]) -> CellSet:
    """Largest S ⊆ N on which F and F⁻¹ restricted to S are total."""
    S = _cell_ids(N) & set(int(c) for c in G.cells)
    out_deg = {c: sum(1 for d in G.forward.successors(c) if d in S) for c in S}
    in_deg = {c: sum(1 for d in G.forward.predecessors(c) if d in S) for c in S}
    queue = deque(c for c in sorted(S) if out_deg[c] == 0 or in_deg[c] == 0)
    while queue:
        c = queue.popleft()
        if c not in S:
            continue
        S.discard(c)
        for d in G.forward.successors(c):
            if d in S:
                in_deg[d] -= 1
                if in_deg[d] == 0:
                    queue.append(d)
        for d in G.forward.predecessors(c):
            if d in S:
                out_deg[d] -= 1
                if out_deg[d] == 0:
                    queue.append(d)
    return frozenset(S)


def boundary_collar(M: SimplicialComplex2D, N: Union[Subcomplex, Iterable[int]]) -> CellSet:
    """Cells of N with an edge-neighbour outside N."""
    members = np.zeros(M.n_triangles, dtype=bool)
    members[list(_cell_ids(N))] = True
    et = M.edge_triangles
    inner = et[:, 1] >= 0
    t0, t1 = et[inner, 0], et[inner, 1]
    crossing = members[t0] != members[t1]
    collar = np.concatenate([t0[crossing & members[t0]], t1[crossing & members[t1]]])
    return frozenset(int(c) for c in collar)


def is_isolating_neighborhood(G: GridDynamics, N: Union[Subcomplex, Iterable[int]]) -> bool:
    """Inv(N) stays off the boundary collar of N (the whole surface has none)."""
    if G.complex is None:
        raise ValueError("Grid has no complex; collar is undefined")
    return not (invariant_part(G, N) & boundary_collar(G.complex, N))


@dataclass
class IsolatingBlock:
    """Cell-level isolating block N = N⁺ ∪ N⁻ with entrance and exit collars."""

    cells: CellSet
    invariant: CellSet
    plus: CellSet
    minus: CellSet
    entrance: CellSet
    exit: CellSet
    collar: CellSet

    @property
    def covered(self) -> bool:
        return self.plus | self.minus == self.cells

    @property
    def collars_disjoint(self) -> bool:
        return not (self.entrance & self.exit)

    @property
    def certified(self) -> bool:
        """N = N⁺ ∪ N⁻ and Nⁱ ∩ Nᵒ = ∅."""
        return self.covered and self.collars_disjoint

    def as_dict(self) -> Dict[str, Any]:
        return {
            "cells": len(self.cells),
            "invariant": len(self.invariant),
            "plus": len(self.plus),
            "minus": len(self.minus),
            "entrance": len(self.entrance),
            "exit": len(self.exit),
            "covered": self.covered,
            "collars_disjoint": self.collars_disjoint,
            "certified": self.certified,
        }


def _reach(graph: nx.DiGraph, sources: Iterable[int], allowed: Set[int]) -> Set[int]:
    seen = set(s for s in sources if s in allowed)
    queue = deque(seen)
    while queue:
        c = queue.popleft()
        for d in graph.successors(c):
            if d in allowed and d not in seen:
                seen.add(d)
                queue.append(d)
    return seen


def isolating_block_refine(G: GridDynamics, N: Union[Subcomplex, Iterable[int]]) -> IsolatingBlock:
    """Split N into N⁺ (paths into Inv) and N⁻ (paths from Inv) and find the collars.

    Raises:
        NotIsolatingError: If Inv(N) meets the boundary collar of N
    """
    if G.complex is None:
        raise ValueError("Grid has no complex; collar is undefined")
    cells = _cell_ids(N)
    inv = invariant_part(G, cells)
    collar = boundary_collar(G.complex, cells)
    if inv & collar:
        raise NotIsolatingError(
            f"Invariant part meets the boundary collar in {len(inv & collar)} cells"
        )
    plus = _reach(G.reverse, inv, cells)
    minus = _reach(G.forward, inv, cells)
    exit_cells = {c for c in collar if any(d not in cells for d in G.forward.successors(c))}
    entrance = {c for c in collar if any(d not in cells for d in G.forward.predecessors(c))}
    return IsolatingBlock(
        frozenset(cells),
        inv,
        frozenset(plus),
        frozenset(minus),
        frozenset(entrance),
        frozenset(exit_cells),
        collar,
    )


# ---------------------------------------------------------------------------
# Frontier of K and K-ends
# ---------------------------------------------------------------------------


def _has_directed_edge(tri: np.ndarray, u: int, v: int) -> bool:
    return any(int(tri[k]) == u and int(tri[(k + 1) % 3]) == v for k in range(3))


@dataclass
class Frontier:
    """Simplices of K facing the rest of the surface.

    A component that is a simple cycle has two sides; an end of K is a
    (component, side) pair, side 0 for components without a direction.
    """

    K: Subcomplex
    edges: List[int]
    components: List[List[int]]
    component_of_vertex: Dict[int, int]
    direction: Dict[int, Tuple[int, int]]
    seats: Dict[int, Set[EndKey]]

    @property
    def keys(self) -> List[EndKey]:
        return sorted(set().union(*self.seats.values())) if self.seats else []


def frontier_structure(K: Subcomplex) -> Frontier:
    """Frontier components of K, a traversal direction for cycles and seat cells."""
    M = K.parent
    non_k = ~K.triangle_mask
    et = M.edge_triangles
    graph = nx.Graph()
    frontier: List[int] = []
    for e in K.edge_ids:
        e = int(e)
        tris = et[e][et[e] >= 0]
        if np.any(non_k[tris]):
            frontier.append(e)
            u, v = M.edges[e]
            graph.add_edge(int(u), int(v), edge=e)
    for v in K.vertex_ids:
        v = int(v)
        if v not in graph and np.any(non_k[M.vertex_triangles[v]]):
            graph.add_node(v)

    components = sorted((sorted(c) for c in nx.connected_components(graph)), key=lambda c: c[0])
    component_of_vertex: Dict[int, int] = {}
    direction: Dict[int, Tuple[int, int]] = {}
    for i, comp in enumerate(components):
        for v in comp:
            component_of_vertex[v] = i
        sub = graph.subgraph(comp)
        simple_cycle = (
            len(comp) >= 3
            and sub.number_of_edges() == len(comp)
            and all(d == 2 for _, d in sub.degree())
        )
        if not simple_cycle:
            continue
        start = comp[0]
        prev, cur = start, min(sub.neighbors(start))
        direction[sub.edges[start, cur]["edge"]] = (start, cur)
        while cur != start:
            nxt = next(w for w in sorted(sub.neighbors(cur)) if w != prev)
            direction[sub.edges[cur, nxt]["edge"]] = (cur, nxt)
            prev, cur = cur, nxt

    seats: Dict[int, Set[EndKey]] = {}
    for e in frontier:
        comp = component_of_vertex[int(M.edges[e][0])]
        for t in et[e]:
            if t < 0 or not non_k[t]:
                continue
            side = 0
            if e in direction:
                u, v = direction[e]
                side = 1 if _has_directed_edge(M.triangles[t], u, v) else -1
            seats.setdefault(int(t), set()).add((comp, side))
    for v, comp in component_of_vertex.items():
        if graph.degree(v) == 0:
            for t in M.vertex_triangles[v]:
                if non_k[t]:
                    seats.setdefault(int(t), set()).add((comp, 0))
    return Frontier(K, frontier, components, component_of_vertex, direction, seats)


class _FrontierLocator:
    """Nearest frontier simplex of a chart point, resolved to an end key."""

    def __init__(self, frontier: Frontier):
        M = frontier.K.parent
        self.frontier = frontier
        self.tables: Dict[int, Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]] = {}
        rows: Dict[int, List[Tuple[np.ndarray, np.ndarray, int, int]]] = {}
        et = M.edge_triangles
        for e in frontier.edges:
            comp = frontier.component_of_vertex[int(M.edges[e][0])]
            u, v = frontier.direction.get(e, tuple(int(x) for x in M.edges[e]))
            oriented = 1 if e in frontier.direction else 0
            for t in et[e]:
                if t < 0:
                    continue
                tri = [int(x) for x in M.triangles[t]]
                a = M.corner_coords[t, tri.index(u)]
                b = M.corner_coords[t, tri.index(v)]
                rows.setdefault(int(M.chart_of_triangle[t]), []).append((a, b, comp, oriented))
        on_edges = {int(x) for e in frontier.edges for x in M.edges[e]}
        for v, comp in frontier.component_of_vertex.items():
            if v in on_edges:
                continue
            for t in M.vertex_triangles[v]:
                tri = [int(x) for x in M.triangles[t]]
                p = M.corner_coords[t, tri.index(v)]
                rows.setdefault(int(M.chart_of_triangle[t]), []).append((p, p, comp, 0))
        for chart, items in rows.items():
            self.tables[chart] = (
                np.array([r[0] for r in items]),
                np.array([r[1] for r in items]),
                np.array([r[2] for r in items], dtype=np.int64),
                np.array([r[3] for r in items], dtype=np.int64),
            )

    def keys(self, charts: np.ndarray, xy: np.ndarray) -> List[Optional[EndKey]]:
        out: List[Optional[EndKey]] = [None] * len(xy)
        for chart in np.unique(charts):
            if int(chart) not in self.tables:
                continue
            idx = np.nonzero(charts == chart)[0]
            a, b, comp, oriented = self.tables[int(chart)]
            pts = xy[idx]
            nearest = np.argmin(segment_distances(pts, a, b), axis=1)
            d = b[nearest] - a[nearest]
            w = pts - a[nearest]
            cross = d[:, 0] * w[:, 1] - d[:, 1] * w[:, 0]
            for j, i in enumerate(idx):
                k = nearest[j]
                side = (1 if cross[j] > 0 else -1) if oriented[k] else 0
                out[i] = (int(comp[k]), side)
        return out


@dataclass
class EndAssignment:
    """K-ends and the component of I(K)∖K each one opens into."""

    keys: List[EndKey]
    component: List[Optional[int]]

    @property
    def count(self) -> int:
        return len(self.keys)

    @property
    def matched(self) -> int:
        return sum(1 for c in self.component if c is not None)

    def ends_of(self, component: int) -> int:
        return sum(1 for c in self.component if c == component)

    def index(self, key: EndKey) -> int:
        return self.keys.index(key)


def k_ends(
    block: Union[IsolatingBlock, Subcomplex, Iterable[int], None],
    K: Subcomplex,
    component_of_cell: Optional[Dict[int, int]] = None,
    frontier: Optional[Frontier] = None,
) -> EndAssignment:
    """Count the ends of K and match each to a component of I(K)∖K."""
    frontier = frontier or frontier_structure(K)
    if block is None:
        allowed = None
    elif isinstance(block, IsolatingBlock):
        allowed = set(block.cells)
    else:
        allowed = _cell_ids(block)
    by_key: Dict[EndKey, List[int]] = {}
    for t, keys in frontier.seats.items():
        if allowed is not None and t not in allowed:
            continue
        for key in keys:
            by_key.setdefault(key, []).append(t)
    keys = sorted(by_key)
    assigned: List[Optional[int]] = []
    for key in keys:
        if component_of_cell is None:
            assigned.append(None)
            continue
        votes = Counter(component_of_cell[t] for t in by_key[key] if t in component_of_cell)
        if not votes:
            assigned.append(None)
            continue
        best = max(votes.values())
        assigned.append(min(c for c, n in votes.items() if n == best))
    return EndAssignment(keys, assigned)


# ---------------------------------------------------------------------------
# Neighborhoods
# ---------------------------------------------------------------------------


def _component_segments(
    M: SimplicialComplex2D, frontier: Frontier, chart: int
) -> Dict[int, Tuple[np.ndarray, np.ndarray]]:
    chart_mask = M.chart_of_triangle == chart
    et = M.edge_triangles
    segments: Dict[int, List[Tuple[np.ndarray, np.ndarray]]] = {}
    for e in frontier.edges:
        for t in et[e]:
            if t < 0 or not chart_mask[t]:
                continue
            tri = [int(x) for x in M.triangles[t]]
            u, v = (int(x) for x in M.edges[e])
            comp = frontier.component_of_vertex[u]
            segments.setdefault(comp, []).append(
                (M.corner_coords[t, tri.index(u)], M.corner_coords[t, tri.index(v)])
            )
            break
    return {
        comp: (np.array([s[0] for s in segs]), np.array([s[1] for s in segs]))
        for comp, segs in segments.items()
    }


def _chart_gap(M: SimplicialComplex2D, frontier: Frontier, chart: int) -> float:
    """Smallest distance between distinct frontier components drawn in a chart."""
    segments = _component_segments(M, frontier, chart)
    gap = math.inf
    comps = sorted(segments)
    for i, ci in enumerate(comps):
        for cj in comps[i + 1 :]:
            a, b = segments[cj]
            gap = min(gap, float(np.min(segment_distances(segments[ci][0], a, b))))
    return gap


def fixed_point_cells(M: SimplicialComplex2D, points: Iterable[FixedPoint]) -> Dict[int, List[int]]:
    """Cells containing each isolated tagged fixed point, keyed by list position."""
    atlas = M.atlas
    found: Dict[int, List[int]] = {}
    for i, point in enumerate(points):
        if not point.is_isolated:
            continue
        tri = atlas.locate(point.chart, np.array([point.position], dtype=float))
        if tri[0] >= 0:
            found[i] = [int(tri[0])]
    return found


def block_neighborhood(
    M: SimplicialComplex2D,
    K: Subcomplex,
    width: float = 0.2,
    avoid: Iterable[FixedPoint] = (),
) -> Subcomplex:
    """K plus the cells within chart distance ``width`` of K.

    The width is clipped per chart to 0.35 times the gap between distinct
    frontier components of K, and the stars of cells holding isolated
    fixed points outside K are left out.
    """
    if K.is_empty():
        raise ValueError("K is empty")
    frontier = frontier_structure(K)
    selected = K.triangle_mask.copy()
    samples_per_cell = 7
    for chart in M.charts:
        tris = np.nonzero((M.chart_of_triangle == chart) & ~K.triangle_mask)[0]
        if not len(tris):
            continue
        w = min(width, 0.35 * _chart_gap(M, frontier, chart))
        corners = M.corner_coords[tris]
        mids = 0.5 * (corners + np.roll(corners, -1, axis=1))
        pts = np.concatenate([corners, mids, corners.mean(axis=1, keepdims=True)], axis=1)
        distance = distance_to_set(M, K, chart)(pts.reshape(-1, 2)).reshape(len(tris), samples_per_cell)
        selected[tris[distance.min(axis=1) < w]] = True

    for cells in fixed_point_cells(M, avoid).values():
        for c in cells:
            if K.triangle_mask[c]:
                continue
            star = triangle_star(M, c)
            selected[star[~K.triangle_mask[star]]] = False
    return Subcomplex(M, K.vertex_mask, K.edge_mask, selected)


def complement_components(K: Subcomplex) -> List[np.ndarray]:
    """Edge-connected components of the cells outside K, least cell first."""
    M = K.parent
    graph = M.cell_graph(blocked_edges=K.edge_mask)
    outside = [int(t) for t in np.nonzero(~K.triangle_mask)[0]]
    comps = nx.connected_components(graph.subgraph(outside))
    return sorted((np.array(sorted(c), dtype=np.int64) for c in comps), key=lambda c: int(c[0]))


def boundary_circles(N: Subcomplex) -> List[List[int]]:
    """Vertex-connected components of the boundary edges of N."""
    M = N.parent
    edges = [int(e) for e in N.boundary().edge_ids]
    graph = nx.Graph()
    for e in edges:
        u, v = M.edges[e]
        graph.add_edge(int(u), int(v), edge=e)
    circles = []
    for comp in nx.connected_components(graph):
        circles.append(sorted(int(d["edge"]) for _, _, d in graph.subgraph(comp).edges(data=True)))
    return sorted(circles, key=lambda c: c[0])


# ---------------------------------------------------------------------------
# Sample classification
# ---------------------------------------------------------------------------


class _Outcome(Enum):
    K = "K"
    FROZEN = "frozen"
    FIXED_POINT = "fixed-point"
    STATIONARY = "stationary"
    UNDETERMINED = "undetermined"


@dataclass
class AnalysisSetup:
    """Targets and time scales shared by every classification of one flow."""

    flow: Flow
    K: Subcomplex
    neighborhood: Subcomplex
    frozen_region: np.ndarray
    fixed_points: List[FixedPoint]
    frontier: Frontier
    tau: float
    dwell: float
    fixed_point_radius: float
    params: ClassificationParams
    locator: Optional[_FrontierLocator] = field(repr=False, default=None)

    def __post_init__(self) -> None:
        if self.locator is None:
            self.locator = _FrontierLocator(self.frontier)

    def arrival_keys(self, charts: np.ndarray, xy: np.ndarray) -> List[Optional[EndKey]]:
        assert self.locator is not None
        return self.locator.keys(charts, xy)


def prepare_analysis(
    M: SimplicialComplex2D, K: Subcomplex, flow: Flow, params: Optional[ClassificationParams] = None
) -> AnalysisSetup:
    """Block neighborhood, τ, dwell time and targets for classifying against K."""
    params = params or ClassificationParams()
    located = fixed_point_cells(M, flow.fixed_points)
    fixed = [
        p
        for i, p in enumerate(flow.fixed_points)
        if p.is_isolated and not any(K.triangle_mask[c] for c in located.get(i, []))
    ]
    N = block_neighborhood(M, K, params.block_width, fixed)
    grid_cells = star_neighborhood(N, 1).cells
    tau = grid_tau(M, flow, params.tau_factor, grid_cells)

    frozen_region = cells_touching(M, flow.frozen.vertex_mask & ~K.vertex_mask)
    for _ in range(params.target_rings - 1):
        ring = np.zeros(M.n_vertices, dtype=bool)
        ring[M.triangles[frozen_region].ravel()] = True
        frozen_region = cells_touching(M, ring)
    frozen_region &= ~N.triangle_mask

    radius = params.fixed_point_radius * float(np.mean(M.cell_diameters))
    return AnalysisSetup(
        flow,
        K,
        N,
        frozen_region,
        fixed,
        frontier_structure(K),
        tau,
        params.dwell_factor * tau,
        radius,
        params,
    )


def _settle_outcomes(
    setup: AnalysisSetup, charts: np.ndarray, xy: np.ndarray, direction: float
) -> Tuple[np.ndarray, List[Optional[Any]]]:
    """Integrate until every point dwells in a target or the horizon is reached."""
    params = setup.params
    integrator = FlowIntegrator(setup.flow, params.step, params.t_max)
    n = len(xy)
    outcomes = np.full(n, _Outcome.UNDETERMINED, dtype=object)
    details: List[Optional[Any]] = [None] * n
    if n == 0:
        return outcomes, details

    charts, xy, tri = integrator.settle(charts, xy)
    moving = np.any(setup.flow.velocity(charts, xy) != 0.0, axis=1)
    outcomes[~moving] = _Outcome.STATIONARY
    active = np.nonzero(moving)[0]
    h = direction * params.step
    clock_k = np.zeros(n)
    clock_f = np.zeros(n)
    clock_p = np.zeros(n)
    n_steps = int(math.ceil(params.t_max / params.step))
    elapsed = 0.0

    for i in range(n_steps + 1):
        if not len(active):
            break
        dt = params.step if i else 0.0
        a_tri = tri[active]
        in_n = setup.neighborhood.triangle_mask[a_tri]
        in_f = setup.frozen_region[a_tri]
        near = np.full(len(active), -1, dtype=np.int64)
        for j, point in enumerate(setup.fixed_points):
            hit = (charts[active] == point.chart) & (
                np.linalg.norm(xy[active] - np.asarray(point.position), axis=1) < setup.fixed_point_radius
            )
            near[hit & (near < 0)] = j
        clock_k[active] = np.where(in_n, clock_k[active] + dt, 0.0)
        clock_f[active] = np.where(in_f, clock_f[active] + dt, 0.0)
        clock_p[active] = np.where(near >= 0, clock_p[active] + dt, 0.0)

        done_p = clock_p[active] >= setup.dwell
        done_f = ~done_p & (clock_f[active] >= setup.dwell)
        done_k = ~done_p & ~done_f & (clock_k[active] >= setup.dwell)
        for j in np.nonzero(done_p)[0]:
            outcomes[active[j]] = _Outcome.FIXED_POINT
            details[active[j]] = setup.fixed_points[near[j]].label
        outcomes[active[done_f]] = _Outcome.FROZEN
        arrived = active[done_k]
        if len(arrived):
            for idx, key in zip(arrived, setup.arrival_keys(charts[arrived], xy[arrived])):
                outcomes[idx] = _Outcome.K
                details[idx] = key
        active = active[~(done_p | done_f | done_k)]
        if not len(active) or i == n_steps:
            break
        charts[active], xy[active], tri[active] = integrator.step_batch(charts[active], xy[active], h)
        elapsed += params.step

    if len(active):
        logger.debug(f"{len(active)} samples undetermined after t={elapsed:.1f}")
    return outcomes, details


def _combine(forward: _Outcome, backward: _Outcome) -> CellLabel:
    if forward is _Outcome.K and backward is _Outcome.K:
        return CellLabel.HOMOCLINIC
    if forward is _Outcome.K:
        return CellLabel.UNDETERMINED if backward is _Outcome.UNDETERMINED else CellLabel.PURELY_ATTRACTED
    if backward is _Outcome.K:
        return CellLabel.UNDETERMINED if forward is _Outcome.UNDETERMINED else CellLabel.PURELY_REPELLED
    if _Outcome.UNDETERMINED in (forward, backward):
        return CellLabel.UNDETERMINED
    return CellLabel.OUTSIDE


@dataclass
class SampleClassification:
    """Labels and arrival ends (None when the orbit did not settle on K)."""

    labels: np.ndarray
    forward_ends: List[Optional[EndKey]]
    backward_ends: List[Optional[EndKey]]


def classify_samples(
    setup: AnalysisSetup, charts: np.ndarray, xy: np.ndarray, in_k: Optional[np.ndarray] = None
) -> SampleClassification:
    """Classify a batch of points; points flagged ``in_k`` are labeled in-K."""
    charts = np.asarray(charts, dtype=np.int64).reshape(-1)
    xy = np.asarray(xy, dtype=float).reshape(-1, 2)
    n = len(xy)
    in_k = np.zeros(n, dtype=bool) if in_k is None else np.asarray(in_k, dtype=bool)
    labels = np.full(n, CellLabel.IN_K, dtype=object)
    forward_ends: List[Optional[EndKey]] = [None] * n
    backward_ends: List[Optional[EndKey]] = [None] * n
    todo = np.nonzero(~in_k)[0]
    fwd, fwd_details = _settle_outcomes(setup, charts[todo], xy[todo], 1.0)
    bwd, bwd_details = _settle_outcomes(setup, charts[todo], xy[todo], -1.0)
    for j, i in enumerate(todo):
        labels[i] = _combine(fwd[j], bwd[j])
        if fwd[j] is _Outcome.K:
            forward_ends[i] = fwd_details[j]
        if bwd[j] is _Outcome.K:
            backward_ends[i] = bwd_details[j]
    return SampleClassification(labels, forward_ends, backward_ends)


def classify_point(
    flow: Flow,
    K: Subcomplex,
    x: Sequence[float],
    params: Optional[ClassificationParams] = None,
    chart: int = 0,
    setup: Optional[AnalysisSetup] = None,
) -> CellLabel:
    """Trichotomy label of a single point given in ``chart`` coordinates."""
    setup = setup or prepare_analysis(K.parent, K, flow, params)
    M = K.parent
    tri = M.atlas.locate(chart, np.array([x], dtype=float))
    inside = bool(tri[0] >= 0 and K.triangle_mask[tri[0]])
    result = classify_samples(setup, np.array([chart]), np.array([x], dtype=float), np.array([inside]))
    return result.labels[0]


# ---------------------------------------------------------------------------
# Influence report
# ---------------------------------------------------------------------------


@dataclass
class ComponentSummary:
    """One component of I(K)∖K."""

    index: int
    cells: np.ndarray
    ends: int
    kind: str
    homoclinic_cells: int
    dissonant_cells: int = 0

    @property
    def local_complexity(self) -> int:
        return self.ends - 1

    def as_dict(self) -> Dict[str, Any]:
        return {
            "index": self.index,
            "size": int(len(self.cells)),
            "first_cell": int(self.cells[0]) if len(self.cells) else None,
            "ends": self.ends,
            "local_complexity": self.local_complexity,
            "kind": self.kind,
            "homoclinic_cells": self.homoclinic_cells,
            "dissonant_cells": self.dissonant_cells,
        }


@dataclass
class FixedPointCensus:
    """Isolated fixed points outside I(K) by type."""

    attracting: int = 0
    hyperbolic: int = 0
    degenerate: int = 0
    repelling: int = 0
    heuristic: bool = False

    def as_tuple(self) -> Tuple[int, int, int]:
        return (self.attracting, self.hyperbolic, self.degenerate)

    @property
    def total(self) -> int:
        return self.attracting + self.hyperbolic + self.degenerate + self.repelling

    def as_dict(self) -> Dict[str, Any]:
        return {
            "attracting": self.attracting,
            "hyperbolic_saddle": self.hyperbolic,
            "degenerate_saddle": self.degenerate,
            "repelling": self.repelling,
            "heuristic": self.heuristic,
        }


@dataclass
class InfluenceReport:
    """Decomposition of the region of influence of K."""

    flow_name: str
    K: Subcomplex
    neighborhood: Subcomplex
    labels: np.ndarray
    sample_labels: np.ndarray
    forward_ends: List[Optional[EndKey]]
    backward_ends: List[Optional[EndKey]]
    components: List[ComponentSummary]
    ends: EndAssignment
    block: Optional[IsolatingBlock]
    tau: float
    dwell: float
    parameters: Dict[str, Any]
    dissonant: CellSet = frozenset()
    census: FixedPointCensus = field(default_factory=FixedPointCensus)
    k_character: KCharacter = KCharacter.NEITHER

    @property
    def complexity(self) -> int:
        return sum(c.local_complexity for c in self.components)

    @property
    def k(self) -> int:
        return self.ends.matched

    @property
    def m(self) -> int:
        return len(self.components)

    @property
    def local_complexities(self) -> List[int]:
        return [c.local_complexity for c in self.components]

    @property
    def n_samples(self) -> int:
        return int(np.sum(self.sample_labels != CellLabel.IN_K))

    @property
    def undetermined_fraction(self) -> float:
        n = self.n_samples
        return float(np.sum(self.sample_labels == CellLabel.UNDETERMINED)) / n if n else 0.0

    @property
    def invalid_reasons(self) -> List[str]:
        """Why the labels cannot be trusted; empty for a valid report."""
        reasons = []
        if self.block is None:
            reasons.append("no isolating block around K")
        endless = [c.index for c in self.components if c.ends == 0]
        if endless:
            reasons.append(f"components {endless} reach no end of K")
        limit = self.parameters.get("undetermined_limit", 0.01)
        if self.undetermined_fraction >= limit:
            reasons.append(f"{self.undetermined_fraction:.2%} of samples undetermined")
        return reasons

    @property
    def valid(self) -> bool:
        return not self.invalid_reasons

    @property
    def certified(self) -> bool:
        return self.block is not None and self.block.certified

    def label_counts(self) -> Dict[str, int]:
        counts = Counter(label.value for label in self.labels)
        return {label.value: counts.get(label.value, 0) for label in CellLabel}

    def component_of_cell(self) -> Dict[int, int]:
        return {int(c): comp.index for comp in self.components for c in comp.cells}


def _cell_sample_rows(M: SimplicialComplex2D) -> np.ndarray:
    """Sample indices of every cell: its three vertices and its centroid."""
    return np.column_stack([M.triangles, M.n_vertices + np.arange(M.n_triangles)])


def _surface_samples(M: SimplicialComplex2D) -> Tuple[np.ndarray, np.ndarray]:
    """One sample per vertex (in the chart of its first triangle) then every centroid."""
    first = np.array([int(ts[0]) for ts in M.vertex_triangles], dtype=np.int64)
    corner = np.array(
        [int(np.nonzero(M.triangles[t] == v)[0][0]) for v, t in enumerate(first)], dtype=np.int64
    )
    v_xy = M.corner_coords[first, corner]
    charts = np.concatenate([M.chart_of_triangle[first], M.chart_of_triangle])
    return charts, np.concatenate([v_xy, M.centroids])


def influence_components(
    K: Subcomplex, labels: np.ndarray
) -> List[np.ndarray]:
    """Components of the I(K)-labeled cells outside K, adjacent through non-K edges."""
    M = K.parent
    graph = M.cell_graph(blocked_edges=K.edge_mask)
    cells = [
        t for t in range(M.n_triangles) if not K.triangle_mask[t] and labels[t] in INFLUENCE_LABELS
    ]
    comps = nx.connected_components(graph.subgraph(cells))
    return sorted((np.array(sorted(c), dtype=np.int64) for c in comps), key=lambda c: int(c[0]))


def _component_kind(labels: Iterable[CellLabel]) -> str:
    kinds = set(labels)
    if len(kinds) == 1:
        return next(iter(kinds)).value
    return "mixed"


def influence_decomposition(
    M: SimplicialComplex2D,
    K: Subcomplex,
    flow: Flow,
    params: Optional[ClassificationParams] = None,
) -> InfluenceReport:
    """Classify every vertex and centroid and assemble the influence report.

    Raises:
        ValueError: If K is empty or lives on another complex
    """
    params = params or ClassificationParams()
    if K.parent is not M:
        raise ValueError("K must be a subcomplex of M")
    if K.is_empty():
        raise ValueError("K is empty")
    setup = prepare_analysis(M, K, flow, params)
    logger.info(
        f"Analyzing {flow.name}: {M.n_triangles} cells, block of {len(setup.neighborhood.cells)}, "
        f"τ={setup.tau:.3g}, dwell={setup.dwell:.3g}"
    )

    grid_cells = star_neighborhood(setup.neighborhood, 1).cells
    with log_duration(logger, f"{flow.name}: grid map on {len(grid_cells)} cells"):
        grid = build_grid(M, flow, setup.tau, grid_cells, params.step)
    try:
        block: Optional[IsolatingBlock] = isolating_block_refine(grid, setup.neighborhood)
    except NotIsolatingError as exc:
        logger.warning(f"Block around K is not isolating at this resolution: {exc}")
        block = None

    charts, xy = _surface_samples(M)
    in_k = np.concatenate([K.vertex_mask, K.triangle_mask])
    with log_duration(logger, f"{flow.name}: classifying {len(xy)} samples"):
        samples = classify_samples(setup, charts, xy, in_k)

    labels = samples.labels[M.n_vertices :].copy()
    comps = influence_components(K, labels)
    component_of_cell = {int(c): i for i, comp in enumerate(comps) for c in comp}
    ends = k_ends(block if block is not None else setup.neighborhood, K, component_of_cell, setup.frontier)

    components = [
        ComponentSummary(
            index=i,
            cells=comp,
            ends=ends.ends_of(i),
            kind=_component_kind(labels[comp]),
            homoclinic_cells=int(np.sum(labels[comp] == CellLabel.HOMOCLINIC)),
        )
        for i, comp in enumerate(comps)
    ]
    report = InfluenceReport(
        flow_name=flow.name,
        K=K,
        neighborhood=setup.neighborhood,
        labels=labels,
        sample_labels=samples.labels,
        forward_ends=samples.forward_ends,
        backward_ends=samples.backward_ends,
        components=components,
        ends=ends,
        block=block,
        tau=setup.tau,
        dwell=setup.dwell,
        parameters=dict(params.as_dict(), level=getattr(M, "level", 0), cells=M.n_triangles),
    )
    report.dissonant = detect_dissonant(report)
    for comp in report.components:
        comp.dissonant_cells = sum(1 for c in comp.cells if int(c) in report.dissonant)
    report.census = fixed_point_census(flow, report)
    report.k_character = _k_character(report)

    for comp in report.components:
        if comp.ends == 0:
            logger.warning(f"Component {comp.index} of I(K)∖K reaches no end of K")
    if not report.valid:
        logger.warning(f"Report marked invalid: {'; '.join(report.invalid_reasons)}")
    logger.info(
        f"{flow.name}: complexity {report.complexity} (k={report.k}, m={report.m}), "
        f"{len(report.dissonant)} dissonant cells"
    )
    return report


def _k_character(report: InfluenceReport) -> KCharacter:
    K = report.K
    collar = [
        report.labels[t]
        for t in report.neighborhood.cells
        if not K.triangle_mask[t] and report.labels[t] in INFLUENCE_LABELS
    ]
    if collar and all(label is CellLabel.PURELY_ATTRACTED for label in collar):
        return KCharacter.ATTRACTOR
    if collar and all(label is CellLabel.PURELY_REPELLED for label in collar):
        return KCharacter.REPELLER
    return KCharacter.NEITHER


def detect_dissonant(report: InfluenceReport) -> CellSet:
    """Cells where homoclinic behavior degenerates at the grid resolution.

    A cell outside K is dissonant when a purely attracted or repelled label
    meets a homoclinic one (inside the cell or across an edge not in K), or
    when its homoclinic samples run between different pairs of ends.
    """
    K = report.K
    M = K.parent
    rows = _cell_sample_rows(M)
    labels = report.labels
    sample_labels = report.sample_labels
    found: Set[int] = set()
    for t in range(M.n_triangles):
        if K.triangle_mask[t]:
            continue
        own = [sample_labels[s] for s in rows[t]]
        homoclinic = [s for s in rows[t] if sample_labels[s] is CellLabel.HOMOCLINIC]
        if homoclinic and any(label in PURE_LABELS for label in own):
            found.add(t)
            continue
        itineraries = {(report.backward_ends[s], report.forward_ends[s]) for s in homoclinic}
        if len(itineraries) > 1:
            found.add(t)

    et = M.edge_triangles
    for e in range(M.n_edges):
        t0, t1 = int(et[e, 0]), int(et[e, 1])
        if t1 < 0 or K.edge_mask[e]:
            continue
        for a, b in ((t0, t1), (t1, t0)):
            if labels[a] in PURE_LABELS and labels[b] is CellLabel.HOMOCLINIC:
                found.add(a)
    return frozenset(found)


def influence_complex(report: InfluenceReport) -> Subcomplex:
    """Closure of K and the I(K) cells that avoid stationary or undetermined vertices."""
    K = report.K
    M = K.parent
    vertex_labels = report.sample_labels[: M.n_vertices]
    excluded_vertex = np.array(
        [label in (CellLabel.OUTSIDE, CellLabel.UNDETERMINED) for label in vertex_labels]
    )
    keep = np.array([label in INFLUENCE_LABELS for label in report.labels]) & ~cells_touching(
        M, excluded_vertex
    )
    return Subcomplex.from_triangles(M, np.nonzero(keep)[0]).union(K)


def _heuristic_census(flow: Flow, K: Subcomplex) -> FixedPointCensus:
    """Zeros of the per-cell affine interpolant, typed by its Jacobian."""
    M = flow.complex
    census = FixedPointCensus(heuristic=True)
    cells = np.nonzero(~flow.frozen.triangle_mask & ~K.triangle_mask)[0]
    seen: List[Tuple[int, np.ndarray]] = []
    for t in cells:
        corners = M.corner_coords[t]
        v = flow.velocity_in_chart(int(M.chart_of_triangle[t]), corners)
        system = np.vstack([v.T, np.ones(3)])
        if abs(np.linalg.det(system)) < 1e-14:
            continue
        w = np.linalg.solve(system, np.array([0.0, 0.0, 1.0]))
        if np.any(w < -1e-9):
            continue
        zero = w @ corners
        chart = int(M.chart_of_triangle[t])
        if any(c == chart and np.linalg.norm(z - zero) < 1e-9 for c, z in seen):
            continue
        seen.append((chart, zero))
        edges_p = np.column_stack([corners[1] - corners[0], corners[2] - corners[0]])
        edges_v = np.column_stack([v[1] - v[0], v[2] - v[0]])
        jac = edges_v @ np.linalg.inv(edges_p)
        det, trace = float(np.linalg.det(jac)), float(np.trace(jac))
        if abs(det) < 1e-10:
            census.degenerate += 1
        elif det < 0:
            census.hyperbolic += 1
        elif trace < 0:
            census.attracting += 1
        else:
            census.repelling += 1
    return census


def fixed_point_census(flow: Flow, report: InfluenceReport) -> FixedPointCensus:
    """Isolated fixed points outside I(K), from tags when the flow carries them."""
    if not flow.fixed_points:
        return _heuristic_census(flow, report.K)
    census = FixedPointCensus()
    K = report.K
    located = fixed_point_cells(flow.complex, flow.fixed_points)
    for i, point in enumerate(flow.fixed_points):
        if not point.is_isolated:
            continue
        if any(K.triangle_mask[c] for c in located.get(i, [])):
            continue
        if point.kind is FixedPointKind.ATTRACTING:
            census.attracting += 1
        elif point.kind is FixedPointKind.REPELLING:
            census.repelling += 1
        elif point.kind is FixedPointKind.HYPERBOLIC_SADDLE:
            census.hyperbolic += 1
        elif point.kind is FixedPointKind.DEGENERATE_SADDLE:
            census.degenerate += 1
    return census


def analyze(
    M: SimplicialComplex2D,
    K: Subcomplex,
    flow: Flow,
    params: Optional[ClassificationParams] = None,
) -> InfluenceReport:
    """Alias of ``influence_decomposition`` used by the command line."""
    return influence_decomposition(M, K, flow, params)
