"""
Builtin flows.

Pieces carry planar model flows (disk, annulus, handle); the generator glues
them around a stationary core and the worked examples and continuation
families are assembled from the same parts.
"""

from enum import Enum
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .flow import FixedPoint, FixedPointKind, Flow, FlowFamily, beck_freeze
from .logging_config import get_logger
from .mesh import (
    DEFAULT_SIDES,
    PieceKind,
    Subcomplex,
    SurfacePiece,
    TriangulatedSurface,
    annulus_piece,
    disk_piece,
    glue,
    handle_hole_layout,
    handle_piece,
    sphere_with_holes,
)
from .validation import ValidationError, validate_partition

logger = get_logger("constructions")

FREEZE_SCALE = 0.1
DEGENERATE_POINT = (0.7, 0.0)
DEGENERATE_WIDTH = 0.2
EQUATOR_GAUGE = 0.7
EQUATOR_RATE = 6.0
DRIFT_STRENGTH = 1.0
BLOCK_GAUGES = (0.55, 0.85)


class ParameterError(ValidationError):
    """Raised for inconsistent construction parameters."""

    pass


class AnnulusVariant(Enum):
    """Annulus piece dynamics."""

    HOMOCLINIC = "homoclinic-fibered"
    DEGENERATE = "degenerate-saddle"


class Construction(NamedTuple):
    surface: TriangulatedSurface
    core: Subcomplex
    flow: Flow


def circle_subcomplex(piece: SurfacePiece, index: int) -> Subcomplex:
    return Subcomplex.from_edges(piece, piece.circle_edges(index))


def all_circles(piece: SurfacePiece) -> Subcomplex:
    edges: List[int] = []
    for i in range(piece.n_circles):
        edges.extend(piece.circle_edges(i))
    return Subcomplex.from_edges(piece, edges)


def _circle_tags(piece: SurfacePiece, kinds: Sequence[FixedPointKind]) -> List[FixedPoint]:
    tags = []
    for i, kind in enumerate(kinds):
        center = piece.circle_center(i)
        radius = float(np.mean(np.linalg.norm(piece.coords[list(piece.circles[i])] - center, axis=1)))
        tags.append(
            FixedPoint(0, (float(center[0]), float(center[1])), FixedPointKind.CIRCLE, f"circle-{i}", radius)
        )
    return tags


# ---------------------------------------------------------------------------
# Piece flows
# ---------------------------------------------------------------------------


def radial_field(sign: float = -1.0) -> Callable[[np.ndarray], np.ndarray]:
    """Linear radial field ``sign * (x, y)``."""

    def field(xy: np.ndarray) -> np.ndarray:
        return sign * np.asarray(xy, dtype=float)

    return field


def disk_flow(
    subdiv: int = 0,
    sides: int = DEFAULT_SIDES,
    freeze_scale: float = FREEZE_SCALE,
    repelling: bool = False,
) -> Tuple[SurfacePiece, Flow]:
    """Disk cap: frozen boundary circle, attracting center.

    With ``repelling=True`` the field is reversed and the center repels.
    """
    piece = disk_piece(sides).subdivided(subdiv)
    center_kind = FixedPointKind.REPELLING if repelling else FixedPointKind.ATTRACTING
    flow = Flow(
        piece,
        {0: radial_field(1.0 if repelling else -1.0)},
        fixed_points=[FixedPoint(0, (0.0, 0.0), center_kind, "center")]
        + _circle_tags(piece, [FixedPointKind.CIRCLE]),
        name="disk",
    )
    return piece, beck_freeze(flow, circle_subcomplex(piece, 0), freeze_scale)


def frozen_center_disk_flow(
    subdiv: int = 0, sides: int = DEFAULT_SIDES, freeze_scale: float = FREEZE_SCALE
) -> Tuple[SurfacePiece, Flow]:
    """Disk cap whose inner disk is stationary; the collar flows inward."""
    piece = disk_piece(sides).subdivided(subdiv)
    inner = np.nonzero(np.linalg.norm(piece.centroids, axis=1) < 0.5)[0]
    frozen = Subcomplex.from_triangles(piece, inner).union(circle_subcomplex(piece, 0))
    flow = Flow(
        piece,
        {0: radial_field(-1.0)},
        fixed_points=_circle_tags(piece, [FixedPointKind.CIRCLE]),
        name="disk-frozen-center",
    )
    return piece, beck_freeze(flow, frozen, freeze_scale)


def _outward_unit(xy: np.ndarray) -> np.ndarray:
    r = np.maximum(np.linalg.norm(xy, axis=1), 1e-12)
    return xy / r[:, None]


def annulus_flow(
    variant: AnnulusVariant = AnnulusVariant.DEGENERATE,
    subdiv: int = 0,
    sides: int = DEFAULT_SIDES,
    freeze_scale: float = FREEZE_SCALE,
) -> Tuple[SurfacePiece, Flow]:
    """Annulus flowing along radial fibers from circle 0 to circle 1.

    The degenerate variant breaks the fiber at angle 0 at its midpoint
    with a degenerate saddle.
    """
    variant = AnnulusVariant(variant)
    piece = annulus_piece(sides).subdivided(subdiv)
    fixed = _circle_tags(piece, [FixedPointKind.CIRCLE, FixedPointKind.CIRCLE])

    if variant is AnnulusVariant.DEGENERATE:
        saddle = np.asarray(DEGENERATE_POINT)

        def field(xy: np.ndarray) -> np.ndarray:
            xy = np.asarray(xy, dtype=float)
            d2 = np.sum((xy - saddle) ** 2, axis=1)
            return _outward_unit(xy) * (d2 / (DEGENERATE_WIDTH**2 + d2))[:, None]

        fixed.append(FixedPoint(0, DEGENERATE_POINT, FixedPointKind.DEGENERATE_SADDLE, "degenerate-saddle"))
    else:

        def field(xy: np.ndarray) -> np.ndarray:
            return _outward_unit(np.asarray(xy, dtype=float))

    flow = Flow(piece, {0: field}, fixed_points=fixed, name=f"annulus-{variant.value}")
    flow.metadata["annulus_variant"] = variant.value
    return piece, beck_freeze(flow, all_circles(piece), freeze_scale)


def zero_flow(piece: SurfacePiece) -> Flow:
    """Stationary flow on a piece."""
    return Flow(piece, {}, Subcomplex.full(piece), name="stationary")


def handle_saddles(k: int) -> List[float]:
    """x-coordinates of the k-1 saddles of the handle field."""
    centers, _ = handle_hole_layout(k)
    derivative = np.polyder(np.poly(centers))
    return sorted(float(r.real) for r in np.roots(derivative))


def handle_field(centers: Sequence[float]) -> Callable[[np.ndarray], np.ndarray]:
    """Normalized gradient of log|P|, P having roots at the hole centers."""
    roots = np.asarray(centers, dtype=complex)

    def field(xy: np.ndarray) -> np.ndarray:
        xy = np.asarray(xy, dtype=float)
        z = xy[:, 0] + 1j * xy[:, 1]
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.sum(1.0 / (z[:, None] - roots[None, :]), axis=1)
        g = np.conj(np.nan_to_num(w))
        scale = 1.0 / np.sqrt(1.0 + np.abs(g) ** 2)
        return np.column_stack([g.real * scale, g.imag * scale])

    return field


def handle_flow(
    k: int, subdiv: int = 0, sides: int = DEFAULT_SIDES, freeze_scale: float = FREEZE_SCALE
) -> Tuple[SurfacePiece, Flow]:
    """Sphere with k+1 holes: k repelling inner circles, attracting outer circle.

    The k-1 hyperbolic saddles sit between neighbouring inner holes.

    Raises:
        ParameterError: If k < 2
    """
    if k < 2:
        raise ParameterError("handle_flow needs k >= 2; use annulus_flow for k = 1")
    piece = handle_piece(k, sides).subdivided(subdiv)
    centers, _ = handle_hole_layout(k)
    fixed = _circle_tags(piece, [FixedPointKind.CIRCLE] * (k + 1))
    for j, x in enumerate(handle_saddles(k)):
        fixed.append(FixedPoint(0, (x, 0.0), FixedPointKind.HYPERBOLIC_SADDLE, f"saddle-{j}"))
    flow = Flow(piece, {0: handle_field(centers)}, fixed_points=fixed, name=f"handle-{k}")
    return piece, beck_freeze(flow, all_circles(piece), freeze_scale)


# ---------------------------------------------------------------------------
# Generator
# ---------------------------------------------------------------------------


def _assemble(
    core: SurfacePiece,
    parts: Sequence[Tuple[SurfacePiece, Flow]],
    name: str,
    metadata: Dict,
    pattern: Optional[Sequence[Tuple]] = None,
    extra_core: Sequence[int] = (),
) -> Construction:
    disks = [p for p in parts if p[0].kind is PieceKind.DISK]
    others = [p for p in parts if p[0].kind is not PieceKind.DISK]
    ordered = disks + others
    surface, K = glue(core, [p for p, _ in disks], [p for p, _ in others], pattern, name=name)

    fields = {}
    fixed: List[FixedPoint] = []
    frozen_cells: List[int] = list(K.cells)
    offset = core.n_triangles
    for chart, (piece, piece_flow) in enumerate(ordered, start=1):
        if chart - 1 in extra_core:
            K = K.union(Subcomplex.from_triangles(surface, range(offset, offset + piece.n_triangles)))
        else:
            fields[chart] = piece_flow.field_for(0)
            for point in piece_flow.fixed_points:
                if point.kind is FixedPointKind.CIRCLE:
                    continue
                fixed.append(
                    FixedPoint(chart, point.position, point.kind, f"{piece.name}-{chart}:{point.label}")
                )
        frozen_cells.extend(offset + int(t) for t in piece_flow.frozen.cells)
        offset += piece.n_triangles

    frozen = K.union(Subcomplex.from_triangles(surface, frozen_cells))
    flow = Flow(surface, fields, frozen, fixed, name=name, metadata=metadata)
    logger.info(
        f"Assembled {name}: genus {surface.genus}, {surface.n_triangles} triangles, "
        f"{len(fixed)} tagged fixed points"
    )
    return Construction(surface, K, flow)


def normalize_partition(g: int, ks: Sequence[int]) -> List[int]:
    """Validate a generator partition; g = 0 with no parts means one disk.

    Raises:
        ParameterError: If the parts are not non-negative integers summing to g
    """
    ks = list(ks)
    if g == 0 and not ks:
        ks = [0]
    errors = validate_partition(g, ks)
    if errors:
        raise ParameterError("; ".join(errors))
    return ks


def assemble_generator(
    g: int,
    ks: Sequence[int],
    subdiv: int = 0,
    annulus_variant: AnnulusVariant = AnnulusVariant.DEGENERATE,
    freeze_scale: float = FREEZE_SCALE,
    overrides: Optional[Dict[int, Tuple[SurfacePiece, Flow]]] = None,
    name: Optional[str] = None,
) -> Construction:
    """Surface of genus g with a stationary core K of complexity g.

    Part i is a disk cap when ks[i] = 0, an annulus when ks[i] = 1 and a
    handle with ks[i] maxima otherwise. ``overrides`` replaces the piece of
    a part by a prebuilt (piece, flow).

    Raises:
        ParameterError: If sum(ks) != g
    """
    ks = normalize_partition(g, ks)
    annulus_variant = AnnulusVariant(annulus_variant)
    overrides = overrides or {}
    parts = []
    for i, k in enumerate(ks):
        if i in overrides:
            parts.append(overrides[i])
        elif k == 0:
            parts.append(disk_flow(subdiv, freeze_scale=freeze_scale))
        elif k == 1:
            parts.append(annulus_flow(annulus_variant, subdiv, freeze_scale=freeze_scale))
        else:
            parts.append(handle_flow(k, subdiv, freeze_scale=freeze_scale))

    core = sphere_with_holes(g + len(ks), subdiv)
    name = name or f"generator-{g}-" + "-".join(str(k) for k in ks)
    metadata = {
        "construction": "generator",
        "g": g,
        "ks": ks,
        "subdiv": subdiv,
        "annulus_variant": annulus_variant.value,
    }
    return _assemble(core, parts, name, metadata)


def example_1(subdiv: int = 0) -> Construction:
    """Genus 2: K with four holes and two annuli of homoclinic orbits."""
    result = assemble_generator(
        2, [1, 1], subdiv, annulus_variant=AnnulusVariant.HOMOCLINIC, name="example-1"
    )
    result.flow.metadata.update(construction="example-1")
    return result


def example_2(subdiv: int = 0) -> Construction:
    """Genus 2: a purely repelled disk cap and a three-ended handle with one saddle."""
    cap = frozen_center_disk_flow(subdiv)
    result = assemble_generator(2, [0, 2], subdiv, overrides={0: cap}, name="example-2")
    result.flow.metadata.update(construction="example-2")
    return result


def nonseparating_torus(subdiv: int = 0) -> Construction:
    """Torus whose K (core plus a stationary annulus) has connected complement."""
    core = sphere_with_holes(3, subdiv)
    cap = disk_flow(subdiv)
    annulus = annulus_piece().subdivided(subdiv)
    pattern = [(0, 1, 0), (1, 2, 0), (2, 2, 1)]
    metadata = {"construction": "nonseparating-torus", "g": 1, "subdiv": subdiv}
    return _assemble(
        core,
        [cap, (annulus, zero_flow(annulus))],
        "nonseparating-torus",
        metadata,
        pattern=pattern,
        extra_core=[1],
    )


def sphere_fixture(subdiv: int = 0) -> Construction:
    """Sphere: stationary disk K capped by an attracting disk."""
    return assemble_generator(0, [], subdiv, name="sphere")


# ---------------------------------------------------------------------------
# Continuation families
# ---------------------------------------------------------------------------


def polygon_gauge(xy: np.ndarray, sides: int = DEFAULT_SIDES) -> np.ndarray:
    """Gauge of the regular polygon with a vertex at angle 0 (1 on its boundary)."""
    xy = np.asarray(xy, dtype=float)
    r = np.linalg.norm(xy, axis=1)
    sector = 2.0 * np.pi / sides
    phi = np.mod(np.arctan2(xy[:, 1], xy[:, 0]), sector) - 0.5 * sector
    return r * np.cos(phi) / np.cos(np.pi / sides)


def equator_field(
    lam: float, rate: float = EQUATOR_RATE, strength: float = DRIFT_STRENGTH, uniform: bool = False
) -> Callable[[np.ndarray], np.ndarray]:
    """Radial gauge dynamics u' = rate * (u² + strength·λ·(1 − cos θ)), u = gauge − 0.7.

    With ``uniform=True`` the push is strength·λ everywhere.
    """

    def field(xy: np.ndarray) -> np.ndarray:
        xy = np.asarray(xy, dtype=float)
        gauge = np.maximum(polygon_gauge(xy), 1e-12)
        u = gauge - EQUATOR_GAUGE
        u[np.abs(u) < 1e-12] = 0.0
        if uniform:
            push = strength * lam
        else:
            push = strength * lam * (1.0 - np.cos(np.arctan2(xy[:, 1], xy[:, 0])))
        rate_u = rate * (u**2 + push)
        return (rate_u / gauge)[:, None] * xy

    return field


class _SphereModel(NamedTuple):
    surface: TriangulatedSurface
    circles: Subcomplex
    equator: Subcomplex
    block: Subcomplex


def _equatorial_sphere(subdiv: int) -> _SphereModel:
    core = sphere_with_holes(2, subdiv)
    north = disk_piece().subdivided(subdiv)
    south = disk_piece().subdivided(subdiv)
    surface, band = glue(core, [north, south], name="sphere-equatorial")
    circles = band.boundary()

    chart0 = np.nonzero(surface.chart_of_triangle == 0)[0]
    coords = surface.vertex_coordinates(0)
    on_equator = []
    for e in np.unique(surface.triangle_edges[chart0]):
        u, v = surface.edges[e]
        gauges = polygon_gauge(np.array([coords[int(u)], coords[int(v)]]))
        if np.all(np.abs(gauges - EQUATOR_GAUGE) < 1e-6):
            on_equator.append(int(e))
    equator = Subcomplex.from_edges(surface, on_equator)

    gauge = polygon_gauge(surface.centroids[chart0])
    inside = chart0[(gauge > BLOCK_GAUGES[0]) & (gauge < BLOCK_GAUGES[1])]
    return _SphereModel(surface, circles, equator, Subcomplex.from_triangles(surface, inside))


def _equator_family(
    name: str, subdiv: int, uniform: bool, freeze_scale: float = FREEZE_SCALE
) -> FlowFamily:
    model = _equatorial_sphere(subdiv)

    def evaluate(lam: float) -> Flow:
        fixed = [
            FixedPoint(1, (0.0, 0.0), FixedPointKind.REPELLING, "north-pole"),
            FixedPoint(2, (0.0, 0.0), FixedPointKind.ATTRACTING, "south-pole"),
        ]
        if lam == 0:
            fixed.append(FixedPoint(0, (0.0, 0.0), FixedPointKind.CIRCLE, "equator", EQUATOR_GAUGE))
        elif not uniform:
            fixed.append(FixedPoint(0, (EQUATOR_GAUGE, 0.0), FixedPointKind.DEGENERATE_SADDLE, "equator-point"))
        flow = Flow(
            model.surface,
            {0: equator_field(lam, uniform=uniform), 1: radial_field(1.0), 2: radial_field(-1.0)},
            fixed_points=fixed,
            name=f"{name}@{lam:g}",
            metadata={"construction": name, "lambda": lam, "subdiv": subdiv},
        )
        return beck_freeze(flow, model.circles, freeze_scale)

    return FlowFamily(
        name=name,
        evaluator=evaluate,
        complex=model.surface,
        interval=(0.0, 1.0),
        reference_set=model.equator,
        block=model.block,
        metadata={"rate": EQUATOR_RATE, "strength": DRIFT_STRENGTH, "subdiv": subdiv},
    )


def sphere_circle_family(subdiv: int = 2) -> FlowFamily:
    """Semi-stable equator at λ=0 collapsing to one degenerate saddle for λ>0."""
    return _equator_family("sphere-circle", subdiv, uniform=False)


def sphere_drift_family(subdiv: int = 2) -> FlowFamily:
    """Equator pushed uniformly outward; nothing stays in the block for λ>0."""
    return _equator_family("sphere-drift", subdiv, uniform=True)


def constant_family(
    flow: Flow,
    block: Optional[Subcomplex] = None,
    reference_set: Optional[Subcomplex] = None,
    name: str = "constant",
) -> FlowFamily:
    """Family returning the same flow for every λ."""
    return FlowFamily(
        name=name,
        evaluator=lambda lam: flow,
        complex=flow.complex,
        reference_set=reference_set,
        block=block,
    )


def _frozen_at(lam: float, name: str) -> Callable[[int], FlowFamily]:
    def build(subdiv: int = 2) -> FlowFamily:
        family = sphere_circle_family(subdiv)
        return constant_family(family.at(lam), family.block, family.reference_set, name)

    return build


def sphere_equator_fixture(subdiv: int = 1) -> Construction:
    """Sphere family at λ=0 with K the equator."""
    family = sphere_circle_family(subdiv)
    return Construction(family.complex, family.reference_set, family.at(0.0))


FIXTURES: Dict[str, Callable[[int], Construction]] = {
    "sphere": sphere_fixture,
    "sphere-two-caps": lambda subdiv=0: assemble_generator(0, [0, 0], subdiv, name="sphere-two-caps"),
    "sphere-equator": sphere_equator_fixture,
    "torus": lambda subdiv=0: assemble_generator(1, [1], subdiv, name="torus"),
    "genus-2": lambda subdiv=0: assemble_generator(2, [1, 1], subdiv, name="genus-2"),
    "genus-2-handle": lambda subdiv=0: assemble_generator(2, [0, 2], subdiv, name="genus-2-handle"),
    "example-1": example_1,
    "example-2": example_2,
    "nonseparating-torus": nonseparating_torus,
}

FAMILIES: Dict[str, Callable[[int], FlowFamily]] = {
    "sphere-circle": sphere_circle_family,
    "sphere-drift": sphere_drift_family,
    "sphere-attractor-constant": _frozen_at(0.0, "sphere-attractor-constant"),
    "sphere-saddle-constant": _frozen_at(0.2, "sphere-saddle-constant"),
}


def build_fixture(name: str, subdiv: int = 1) -> Construction:
    """Build a registered fixture.

    Raises:
        ParameterError: If the name is unknown
    """
    if name not in FIXTURES:
        raise ParameterError(f"Unknown fixture {name!r}; choose from {', '.join(sorted(FIXTURES))}")
    return FIXTURES[name](subdiv)


def build_family(name: str, subdiv: int = 2) -> FlowFamily:
    """Build a registered continuation family.

    Raises:
        ParameterError: If the name is unknown
    """
    if name not in FAMILIES:
        raise ParameterError(f"Unknown family {name!r}; choose from {', '.join(sorted(FAMILIES))}")
    return FAMILIES[name](subdiv)
