"""
Continuation of isolated invariant sets along a flow family.

``sweep`` fixes a block N and τ at λ=0 and follows K_λ = Inv(N) across a λ
grid, evaluating the two cohomological non-saddle criteria next to a direct
dynamical probe for saddle behavior.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
import pandas as pd

from .algebra import Coefficients, cohomology, induced_map
from .dynamics import (
    ClassificationParams,
    NotIsolatingError,
    boundary_circles,
    boundary_collar,
    build_grid,
    grid_tau,
    invariant_part,
    isolating_block_refine,
)
from .flow import Flow, FlowFamily, FlowIntegrator
from .logging_config import get_logger, log_duration
from .mesh import Subcomplex, star_neighborhood
from .verify import Verdict, VerdictStatus

logger = get_logger("continuation")

PROBE_SAMPLES = 64
DEFAULT_LAMBDA_GRID = tuple(round(0.05 * i, 10) for i in range(11))


@dataclass
class SweepColumn:
    """Everything computed for one λ."""

    lam: float
    cells: FrozenSet[int]
    isolating: bool
    certified: bool
    betti: Optional[Tuple[int, int, int]]
    rchar: Optional[bool]
    strongrob: Optional[bool]
    saddle: Optional[bool]
    contains_reference: bool
    persistent: bool

    @property
    def empty(self) -> bool:
        return not self.cells

    @property
    def non_saddle(self) -> Optional[bool]:
        """Probe verdict when the probe ran, else the rchar criterion."""
        if self.empty:
            return None
        if self.saddle is not None:
            return not self.saddle
        return self.rchar

    def as_dict(self) -> Dict[str, Any]:
        return {
            "lambda": self.lam,
            "cells": sorted(int(c) for c in self.cells),
            "size": len(self.cells),
            "empty": self.empty,
            "isolating": self.isolating,
            "certified": self.certified,
            "betti": list(self.betti) if self.betti is not None else None,
            "rchar": self.rchar,
            "strongrob": self.strongrob,
            "saddle_probe": self.saddle,
            "contains_reference": self.contains_reference,
            "persistent": self.persistent,
        }


@dataclass
class SweepResult:
    """Per-λ columns of a sweep over one block."""

    family: str
    block_cells: int
    tau: float
    depth: int
    columns: List[SweepColumn]
    lipschitz_estimate: float = 0.0
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def lambdas(self) -> List[float]:
        return [c.lam for c in self.columns]

    def column(self, lam: float) -> SweepColumn:
        for c in self.columns:
            if math.isclose(c.lam, lam, abs_tol=1e-12):
                return c
        raise KeyError(f"No column for λ={lam}")

    def to_dataframe(self) -> pd.DataFrame:
        rows = []
        for c in self.columns:
            row = c.as_dict()
            row.pop("cells")
            row["betti"] = tuple(c.betti) if c.betti is not None else None
            rows.append(row)
        return pd.DataFrame(rows).set_index("lambda")

    def as_dict(self) -> Dict[str, Any]:
        return {
            "family": self.family,
            "block_cells": self.block_cells,
            "tau": self.tau,
            "depth": self.depth,
            "lipschitz_estimate": self.lipschitz_estimate,
            "metadata": self.metadata,
            "columns": [c.as_dict() for c in self.columns],
        }


def rchar_criterion(N: Subcomplex, K_lam: Subcomplex) -> bool:
    """Each component of N∖K_λ meets exactly one boundary circle of N."""
    M = N.parent
    rest = [int(t) for t in N.cells if not K_lam.triangle_mask[t]]
    if not rest:
        return True
    graph = M.cell_graph().subgraph(rest)
    circle_of_edge = {e: j for j, circle in enumerate(boundary_circles(N)) for e in circle}
    for comp in nx.connected_components(graph):
        touched = {
            circle_of_edge[int(e)]
            for t in comp
            for e in M.triangle_edges[t]
            if int(e) in circle_of_edge
        }
        if len(touched) != 1:
            return False
    return True


def strongrob_criterion(N: Subcomplex, K_lam: Subcomplex, coeff: Coefficients = Coefficients.Z2) -> bool:
    """The inclusion K_λ ⊆ N induces isomorphisms on H⁰, H¹ and H²."""
    return all(induced_map(N, K_lam, coeff, degree).is_isomorphism() for degree in (0, 1, 2))


def _evenly_spaced(ids: np.ndarray, limit: int) -> np.ndarray:
    if len(ids) <= limit:
        return ids
    return ids[np.linspace(0, len(ids) - 1, limit).round().astype(np.int64)]


def _leaves(
    flow: Flow,
    charts: np.ndarray,
    xy: np.ndarray,
    N: Subcomplex,
    K_lam: Subcomplex,
    direction: float,
    dwell: float,
    params: ClassificationParams,
) -> np.ndarray:
    """Which points leave N within t_max; points resting in K_λ for ``dwell`` stay."""
    integrator = FlowIntegrator(flow, params.step, params.t_max)
    n = len(xy)
    left = np.zeros(n, dtype=bool)
    charts, xy, tri = integrator.settle(charts, xy)
    clock = np.zeros(n)
    active = np.arange(n)
    for _ in range(int(math.ceil(params.t_max / params.step))):
        if not len(active):
            break
        charts[active], xy[active], tri[active] = integrator.step_batch(
            charts[active], xy[active], direction * params.step
        )
        a_tri = tri[active]
        out = ~N.triangle_mask[a_tri]
        left[active[out]] = True
        clock[active] = np.where(K_lam.triangle_mask[a_tri], clock[active] + params.step, 0.0)
        active = active[~out & (clock[active] < dwell)]
    return left


def saddle_probe(
    flow: Flow,
    K_lam: Subcomplex,
    N: Subcomplex,
    depth: int = 3,
    params: Optional[ClassificationParams] = None,
    tau: Optional[float] = None,
) -> Optional[bool]:
    """Look for points near K_λ whose orbit leaves N in both time directions.

    Levels j = 1..depth use the nested stars U_j of K_λ with depth + 1 − j
    rings; K_λ is a saddle when every level holds a witness. Returns None
    when ``depth`` is 0.
    """
    if depth <= 0:
        return None
    if K_lam.is_empty():
        return False
    params = params or ClassificationParams()
    M = K_lam.parent
    tau = tau or grid_tau(M, flow, params.tau_factor, N.cells)
    dwell = params.dwell_factor * tau

    for rings in range(depth, 0, -1):
        U = star_neighborhood(K_lam, rings)
        ids = _evenly_spaced(np.nonzero(U.triangle_mask & N.triangle_mask)[0], PROBE_SAMPLES)
        charts = M.chart_of_triangle[ids]
        xy = M.centroids[ids]
        forward = _leaves(flow, charts, xy, N, K_lam, 1.0, dwell, params)
        backward = _leaves(flow, charts, xy, N, K_lam, -1.0, dwell, params)
        witnesses = np.nonzero(forward & backward)[0]
        logger.debug(f"{flow.name}: {len(witnesses)} saddle witnesses among {len(ids)} samples at {rings} rings")
        if not len(witnesses):
            return False
    return True


def _boundary_normals(N: Subcomplex) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Charts, midpoints and outward normals of the boundary edges of N."""
    M = N.parent
    charts, mids, normals = [], [], []
    for e in N.boundary().edge_ids:
        for t in M.edge_triangles[e]:
            if t < 0 or not N.triangle_mask[t]:
                continue
            k = int(np.nonzero(M.triangle_edges[t] == e)[0][0])
            a = M.corner_coords[t, k]
            b = M.corner_coords[t, (k + 1) % 3]
            d = b - a
            charts.append(int(M.chart_of_triangle[t]))
            mids.append(0.5 * (a + b))
            normals.append([d[1], -d[0]])
    return (
        np.asarray(charts, dtype=np.int64),
        np.asarray(mids, dtype=float).reshape(-1, 2),
        np.asarray(normals, dtype=float).reshape(-1, 2),
    )


def boundary_flux_signs(flow: Flow, N: Subcomplex) -> np.ndarray:
    """Sign of the outward flux at each boundary edge midpoint of N (+1 exit, −1 entrance)."""
    charts, mids, normals = _boundary_normals(N)
    flux = np.einsum("nd,nd->n", flow.velocity(charts, mids), normals)
    return np.sign(flux).astype(np.int64)


def check_block_persistence(family: FlowFamily, N: Subcomplex, lam: float) -> bool:
    """Entrance and exit edges of N at λ=0 keep their strict crossing direction at λ."""
    reference = boundary_flux_signs(family.at(family.interval[0]), N)
    if np.any(reference == 0):
        logger.warning(f"{family.name}: field tangent to ∂N at λ={family.interval[0]}")
        return False
    return bool(np.array_equal(boundary_flux_signs(family.at(lam), N), reference))


def sweep(
    family: FlowFamily,
    N: Optional[Subcomplex] = None,
    lambda_grid: Sequence[float] = DEFAULT_LAMBDA_GRID,
    depth: int = 3,
    params: Optional[ClassificationParams] = None,
    coeff: Coefficients = Coefficients.Z2,
) -> SweepResult:
    """Track K_λ = Inv(N) across the grid.

    Raises:
        ValueError: If no block is given and the family has none
        NotIsolatingError: If N does not isolate its invariant part at the first λ
    """
    params = params or ClassificationParams()
    N = N if N is not None else family.block
    if N is None:
        raise ValueError(f"Family {family.name} has no block; pass N explicitly")
    M = family.complex
    lambdas = [float(x) for x in lambda_grid]
    grid_cells = star_neighborhood(N, 1).cells
    collar = boundary_collar(M, N)

    flow0 = family.at(lambdas[0])
    tau = grid_tau(M, flow0, params.tau_factor, grid_cells)
    grid0 = build_grid(M, flow0, tau, grid_cells, params.step)
    if invariant_part(grid0, N) & collar:
        raise NotIsolatingError(f"N is not an isolating neighborhood at λ={lambdas[0]:g}")
    block0 = isolating_block_refine(grid0, N)
    K0 = block0.invariant
    logger.info(f"Sweeping {family.name} over {len(lambdas)} values, block of {len(N.cells)} cells, τ={tau:.3g}")

    columns = []
    for lam in lambdas:
        flow = family.at(lam)
        with log_duration(logger, f"{family.name}: grid map at λ={lam:g}"):
            grid = grid0 if lam == lambdas[0] else build_grid(M, flow, tau, grid_cells, params.step)
        cells = invariant_part(grid, N)
        isolating = not (cells & collar)
        persistent = check_block_persistence(family, N, lam)
        if not cells:
            logger.info(f"{family.name}: K_λ is empty at λ={lam:g}; column excluded from criteria")
            columns.append(SweepColumn(lam, cells, isolating, False, None, None, None, None, False, persistent))
            continue
        try:
            certified = isolating_block_refine(grid, N).certified
        except NotIsolatingError:
            certified = False
        K_lam = Subcomplex.from_triangles(M, cells)
        column = SweepColumn(
            lam=lam,
            cells=cells,
            isolating=isolating,
            certified=certified,
            betti=cohomology(K_lam, coeff).betti,
            rchar=rchar_criterion(N, K_lam),
            strongrob=strongrob_criterion(N, K_lam, coeff),
            saddle=saddle_probe(flow, K_lam, N, depth, params, tau),
            contains_reference=K0 <= cells,
            persistent=persistent,
        )
        logger.debug(
            f"λ={lam:g}: |K_λ|={len(cells)} betti={column.betti} rchar={column.rchar} "
            f"strongrob={column.strongrob} saddle={column.saddle}"
        )
        columns.append(column)

    charts = M.chart_of_triangle[N.cells]
    lipschitz = family.continuity_modulus(lambdas, charts, M.centroids[N.cells]) if len(lambdas) > 1 else 0.0
    return SweepResult(
        family=family.name,
        block_cells=len(N.cells),
        tau=tau,
        depth=depth,
        columns=columns,
        lipschitz_estimate=lipschitz,
        metadata={"coeff": Coefficients(coeff).value, "b1_M": cohomology(M, coeff).betti[1]},
    )


def robustness_verdict(result: SweepResult) -> Verdict:
    """Agreement of the probe with both criteria, plus the H¹(M)=0 corollaries."""
    name, theorem = "robustness_verdict", "robustness"
    live = [c for c in result.columns if not c.empty]
    failures: List[str] = []
    details: Dict[str, Any] = {
        "excluded_empty": [c.lam for c in result.columns if c.empty],
        "small_lambda_from": next((c.lam for c in live if c.lam > 0), None),
        "persistent": [c.lam for c in result.columns if c.persistent],
        "non_persistent": [c.lam for c in result.columns if not c.persistent],
    }
    if not live:
        return Verdict(name, theorem, VerdictStatus.NOT_APPLICABLE, "every K_λ is empty", details)

    for c in live:
        if c.rchar != c.strongrob:
            failures.append(f"λ={c.lam:g}: rchar={c.rchar} but strongrob={c.strongrob}")
        if c.saddle is not None and c.saddle == c.rchar:
            failures.append(f"λ={c.lam:g}: saddle probe={c.saddle} but rchar={c.rchar}")

    base = result.columns[0]
    if result.metadata.get("b1_M") == 0 and not base.empty:
        for c in live[1:]:
            same_cohomology = c.betti == base.betti
            if base.non_saddle and c.non_saddle != same_cohomology:
                failures.append(
                    f"λ={c.lam:g}: non-saddle={c.non_saddle} but cohomology "
                    f"{'matches' if same_cohomology else 'differs from'} λ={base.lam:g}"
                )
        details["cohomology_corollary"] = "applied"
    else:
        details["cohomology_corollary"] = "not applicable"

    if base.non_saddle:
        for c in live:
            if c.contains_reference and not c.non_saddle:
                failures.append(f"λ={c.lam:g}: K_λ contains K_0 but is a saddle")
    transitions = [b.lam for a, b in zip(live, live[1:]) if a.non_saddle != b.non_saddle]
    details["transitions"] = transitions

    if failures:
        return Verdict(name, theorem, VerdictStatus.FAIL, "; ".join(failures), details)
    return Verdict(name, theorem, VerdictStatus.PASS, f"criteria agree on {len(live)} columns", details)
