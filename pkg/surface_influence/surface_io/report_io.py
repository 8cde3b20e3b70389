"""
JSON documents: flow specs, influence reports, verdicts and sweeps.

Every document carries ``schema`` and ``kind``; writers sort keys so equal
inputs give byte-identical files.
"""

import json
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

import numpy as np

from surface_influence.core.constructions import (
    FAMILIES,
    AnnulusVariant,
    Construction,
    ParameterError,
    assemble_generator,
    build_family,
    example_1,
    example_2,
    nonseparating_torus,
)
from surface_influence.core.continuation import SweepResult
from surface_influence.core.dynamics import InfluenceReport
from surface_influence.core.flow import FixedPoint, FixedPointKind, Flow
from surface_influence.core.logging_config import get_logger
from surface_influence.core.mesh import SimplicialComplex2D, Subcomplex, canonical_hash
from surface_influence.core.verify import SCHEMA_VERSION, TheoremContext, Verdict

logger = get_logger("surface_io.report")

PathLike = Union[str, Path]

NAMED_CONSTRUCTIONS = {
    "example-1": example_1,
    "example-2": example_2,
    "nonseparating-torus": nonseparating_torus,
}


class DocumentError(ValueError):
    """Raised for documents with a wrong schema, kind or content."""

    pass


def _plain(value: Any) -> Any:
    """numpy scalars and arrays to JSON-native values."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def write_json(document: Mapping[str, Any], path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(document) + "\n", encoding="utf-8")
    logger.debug(f"Wrote {document.get('kind', 'document')} to {path}")
    return path


def dumps(document: Mapping[str, Any]) -> str:
    return json.dumps(_plain(dict(document)), indent=2, sort_keys=True, ensure_ascii=False)


def read_json(path: PathLike, kind: Optional[str] = None) -> Dict[str, Any]:
    """Load a document and check its schema (and kind when given).

    Raises:
        FileNotFoundError: If the file does not exist
        DocumentError: If the JSON is invalid or of another schema or kind
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DocumentError(f"Invalid JSON in {path}: {exc}") from exc
    if not isinstance(document, dict) or document.get("schema") != SCHEMA_VERSION:
        raise DocumentError(f"{path}: expected schema {SCHEMA_VERSION}")
    if kind is not None and document.get("kind") != kind:
        raise DocumentError(f"{path}: expected a {kind} document, found {document.get('kind')!r}")
    return document


# ---------------------------------------------------------------------------
# Flow specs
# ---------------------------------------------------------------------------


def flow_to_spec(flow: Flow) -> Dict[str, Any]:
    """Recipe that rebuilds ``flow``.

    Raises:
        DocumentError: If the flow was not built by a known construction
    """
    meta = flow.metadata
    construction = meta.get("construction")
    spec: Dict[str, Any] = {"schema": SCHEMA_VERSION, "kind": "flow", "name": flow.name}
    if construction == "generator":
        spec.update(
            construction="generator",
            g=int(meta["g"]),
            ks=[int(k) for k in meta["ks"]],
            subdiv=int(meta.get("subdiv", 0)),
            annulus_variant=meta.get("annulus_variant", AnnulusVariant.DEGENERATE.value),
        )
    elif construction in NAMED_CONSTRUCTIONS:
        spec.update(construction=construction, subdiv=int(meta.get("subdiv", 0)))
    elif construction in FAMILIES:
        spec.update(
            construction="family",
            family=construction,
            subdiv=int(meta.get("subdiv", 2)),
            **{"lambda": float(meta.get("lambda", 0.0))},
        )
    elif meta.get("kind") == "vertex-vectors":
        spec.update(
            construction="vertex-vectors",
            vectors=np.asarray(meta["vectors"]).tolist(),
            frozen_vertices=[int(v) for v in flow.frozen.vertex_ids],
            fixed_points=[p.as_dict() for p in flow.fixed_points],
        )
    else:
        raise DocumentError(f"Flow {flow.name!r} has no serializable recipe")
    return spec


def _check_surface(rebuilt: SimplicialComplex2D, surface: Optional[SimplicialComplex2D]) -> None:
    if surface is not None and canonical_hash(surface) != canonical_hash(rebuilt):
        raise DocumentError("Flow spec does not describe the given mesh")


def flow_from_spec(
    spec: Mapping[str, Any], surface: Optional[SimplicialComplex2D] = None
) -> Construction:
    """Rebuild (surface, K, flow) from a flow spec.

    Recipes rebuild their own surface (checked against ``surface`` when
    given); vertex-vector flows live on ``surface`` and have an empty K.

    Raises:
        DocumentError: If the spec is malformed or does not match the mesh
    """
    construction = spec.get("construction")
    try:
        if construction == "generator":
            result = assemble_generator(
                int(spec["g"]),
                [int(k) for k in spec["ks"]],
                int(spec.get("subdiv", 0)),
                annulus_variant=AnnulusVariant(spec.get("annulus_variant", AnnulusVariant.DEGENERATE.value)),
                name=spec.get("name"),
            )
        elif construction in NAMED_CONSTRUCTIONS:
            result = NAMED_CONSTRUCTIONS[construction](int(spec.get("subdiv", 0)))
        elif construction == "family":
            family = build_family(str(spec["family"]), int(spec.get("subdiv", 2)))
            result = Construction(family.complex, family.reference_set, family.at(float(spec["lambda"])))
        elif construction == "vertex-vectors":
            if surface is None:
                raise DocumentError("A vertex-vector flow needs its mesh")
            frozen = Subcomplex.from_vertices(surface, spec.get("frozen_vertices", []))
            flow = Flow.from_vertex_vectors(surface, np.asarray(spec["vectors"], dtype=float), frozen, spec.get("name", "vertex-vectors"))
            flow.fixed_points = [
                FixedPoint(int(p["chart"]), tuple(p["position"]), FixedPointKind(p["kind"]), p.get("label", ""), float(p.get("radius", 0.0)))
                for p in spec.get("fixed_points", [])
            ]
            return Construction(surface, Subcomplex.empty(surface), flow)
        else:
            raise DocumentError(f"Unknown flow construction {construction!r}")
    except (KeyError, TypeError) as exc:
        raise DocumentError(f"Malformed flow spec: missing or invalid {exc}") from exc
    except ParameterError as exc:
        raise DocumentError(f"Invalid flow spec: {exc}") from exc
    _check_surface(result.surface, surface)
    return result


# ---------------------------------------------------------------------------
# Reports, verdicts and sweeps
# ---------------------------------------------------------------------------


def report_document(
    report: InfluenceReport,
    context: TheoremContext,
    flow_spec: Optional[Mapping[str, Any]] = None,
) -> Dict[str, Any]:
    """Influence report plus the facts ``verify`` needs to re-check it."""
    M = report.K.parent
    document: Dict[str, Any] = {
        "schema": SCHEMA_VERSION,
        "kind": "influence-report",
        "flow_name": report.flow_name,
        "flow": dict(flow_spec) if flow_spec else None,
        "surface": {
            "hash": canonical_hash(M),
            "vertices": M.n_vertices,
            "edges": M.n_edges,
            "triangles": M.n_triangles,
        },
        "parameters": report.parameters,
        "tau": report.tau,
        "dwell": report.dwell,
        "block": report.block.as_dict() if report.block is not None else None,
        "ends": [list(key) for key in report.ends.keys],
        "label_counts": report.label_counts(),
        "cell_labels": [label.value for label in report.labels],
        "dissonant_cells": sorted(int(c) for c in report.dissonant),
    }
    document.update(context.as_dict())
    return document


def sweep_document(result: SweepResult, verdict: Optional[Verdict] = None) -> Dict[str, Any]:
    document: Dict[str, Any] = {
        "schema": SCHEMA_VERSION,
        "kind": "sweep",
        "deviations": [
            "differentiability in (x, λ) relaxed to the sampled Lipschitz estimate",
            "cohomology of saddle K_λ is reported at the working resolution",
        ],
    }
    document.update(result.as_dict())
    document["verdict"] = verdict.as_dict() if verdict is not None else None
    return document
