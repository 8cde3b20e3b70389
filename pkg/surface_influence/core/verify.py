"""
Theorem checks on influence reports.

Every check takes a ``TheoremContext`` (the cohomological and dynamical
facts of one analysis) and returns a three-valued ``Verdict``; a check whose
hypothesis fails is not applicable rather than vacuously passed.
"""

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .algebra import Coefficients, cohomology, induced_map
from .dynamics import (
    CellLabel,
    ClassificationParams,
    InfluenceReport,
    KCharacter,
    boundary_circles,
    complement_components,
    influence_complex,
    influence_decomposition,
)
from .flow import Flow
from .logging_config import get_logger
from .mesh import SimplicialComplex2D, Subcomplex

logger = get_logger("verify")

SCHEMA_VERSION = 1


class VerdictStatus(Enum):
    """Outcome of a theorem check."""

    PASS = "pass"
    FAIL = "fail"
    NOT_APPLICABLE = "not-applicable"


@dataclass
class Verdict:
    """Result of one check."""

    name: str
    theorem: str
    status: VerdictStatus
    message: str = ""
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status is VerdictStatus.PASS

    @property
    def failed(self) -> bool:
        return self.status is VerdictStatus.FAIL

    def as_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "theorem": self.theorem,
            "status": self.status.value,
            "message": self.message,
            "details": self.details,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Verdict":
        return cls(
            data["name"],
            data.get("theorem", ""),
            VerdictStatus(data["status"]),
            data.get("message", ""),
            dict(data.get("details", {})),
        )


def _verdict(name: str, theorem: str, failures: List[str], ok: str, details: Dict[str, Any]) -> Verdict:
    if failures:
        return Verdict(name, theorem, VerdictStatus.FAIL, "; ".join(failures), details)
    return Verdict(name, theorem, VerdictStatus.PASS, ok, details)


def _not_applicable(name: str, theorem: str, reason: str, details: Optional[Dict[str, Any]] = None) -> Verdict:
    return Verdict(name, theorem, VerdictStatus.NOT_APPLICABLE, reason, details or {})


@dataclass
class TheoremContext:
    """Facts about one (M, K, flow) analysis that the checks consume.

    Built live by ``prepare_context`` or from a stored report document; the
    document form is what ``report_io`` writes, so stored reports can be
    re-verified without the mesh.
    """

    name: str
    genus: int
    coeff: str
    b1_M: int
    b1_K: int
    kernel_rank: int
    image_rank: int
    mono: bool
    complement_connected: bool
    complexity: int
    k: int
    m: int
    local_complexities: List[int]
    components: List[Dict[str, Any]]
    dissonant_count: int
    census: Dict[str, Any]
    k_character: str
    valid: bool
    certified: bool
    undetermined_fraction: float = 0.0
    invalid_reasons: List[str] = field(default_factory=list)
    complement: List[Dict[str, Any]] = field(default_factory=list)
    influence_b1: Optional[int] = None
    influence_mono: Optional[bool] = None
    generator: Optional[Dict[str, Any]] = None

    def as_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "genus": self.genus,
            "coeff": self.coeff,
            "cohomology": {
                "b1_M": self.b1_M,
                "b1_K": self.b1_K,
                "kernel_rank": self.kernel_rank,
                "image_rank": self.image_rank,
                "monomorphism": self.mono,
            },
            "complement_connected": self.complement_connected,
            "complement": self.complement,
            "complexity": self.complexity,
            "k": self.k,
            "m": self.m,
            "local_complexities": list(self.local_complexities),
            "components": self.components,
            "dissonant_count": self.dissonant_count,
            "census": self.census,
            "k_character": self.k_character,
            "valid": self.valid,
            "certified": self.certified,
            "undetermined_fraction": self.undetermined_fraction,
            "invalid_reasons": list(self.invalid_reasons),
            "influence_complex": {"b1": self.influence_b1, "monomorphism": self.influence_mono},
            "generator": self.generator,
        }

    @classmethod
    def from_document(cls, doc: Mapping[str, Any]) -> "TheoremContext":
        """Rebuild a context from a report document.

        Raises:
            ValueError: If the document lacks a required field
        """
        try:
            coh = doc["cohomology"]
            influence = doc.get("influence_complex") or {}
            return cls(
                name=str(doc.get("name", "report")),
                genus=int(doc["genus"]),
                coeff=str(doc.get("coeff", Coefficients.Z2.value)),
                b1_M=int(coh["b1_M"]),
                b1_K=int(coh["b1_K"]),
                kernel_rank=int(coh["kernel_rank"]),
                image_rank=int(coh["image_rank"]),
                mono=bool(coh["monomorphism"]),
                complement_connected=bool(doc["complement_connected"]),
                complement=list(doc.get("complement", [])),
                complexity=int(doc["complexity"]),
                k=int(doc["k"]),
                m=int(doc["m"]),
                local_complexities=[int(x) for x in doc["local_complexities"]],
                components=list(doc.get("components", [])),
                dissonant_count=int(doc["dissonant_count"]),
                census=dict(doc["census"]),
                k_character=str(doc["k_character"]),
                valid=bool(doc["valid"]),
                certified=bool(doc.get("certified", False)),
                undetermined_fraction=float(doc.get("undetermined_fraction", 0.0)),
                invalid_reasons=[str(r) for r in doc.get("invalid_reasons", [])],
                influence_b1=influence.get("b1"),
                influence_mono=influence.get("monomorphism"),
                generator=doc.get("generator"),
            )
        except KeyError as exc:
            raise ValueError(f"Report document is missing field {exc.args[0]!r}") from exc


def _genus(M: SimplicialComplex2D) -> int:
    genus = getattr(M, "genus", None)
    if genus is not None:
        return int(genus)
    chi = M.n_vertices - M.n_edges + M.n_triangles
    return (2 - chi) // 2


def _complement_facts(report: InfluenceReport) -> List[Dict[str, Any]]:
    """Label sets near K and touched ∂N circles for each component of M∖K."""
    K = report.K
    M = K.parent
    N = report.neighborhood
    owner = np.full(M.n_triangles, -1, dtype=np.int64)
    comps = complement_components(K)
    for i, comp in enumerate(comps):
        owner[comp] = i
    touched: List[set] = [set() for _ in comps]
    for j, circle in enumerate(boundary_circles(N)):
        for e in circle:
            for t in M.edge_triangles[e]:
                if t >= 0 and N.triangle_mask[t] and owner[t] >= 0:
                    touched[owner[t]].add(j)
    facts = []
    for i, comp in enumerate(comps):
        near = [report.labels[t] for t in comp if N.triangle_mask[t]]
        counts = Counter(label.value for label in near)
        facts.append(
            {
                "index": i,
                "size": int(len(comp)),
                "near_labels": dict(sorted(counts.items())),
                "boundary_circles": len(touched[i]),
            }
        )
    return facts


def prepare_context(
    M: SimplicialComplex2D,
    K: Subcomplex,
    flow: Flow,
    params: Optional[ClassificationParams] = None,
    report: Optional[InfluenceReport] = None,
    coeff: Coefficients = Coefficients.Z2,
    name: Optional[str] = None,
) -> TheoremContext:
    """Compute every fact the checks need for one analysis."""
    coeff = Coefficients(coeff)
    report = report or influence_decomposition(M, K, flow, params)
    i_star = induced_map(M, K, coeff, 1)
    b1_M = cohomology(M, coeff).betti[1]
    b1_K = cohomology(K, coeff).betti[1]

    influence_b1: Optional[int] = None
    influence_mono: Optional[bool] = None
    if report.valid:
        I = influence_complex(report)
        influence_b1 = cohomology(I, coeff).betti[1]
        influence_mono = induced_map(I, K, coeff, 1).is_monomorphism()

    generator = None
    if flow.metadata.get("construction") == "generator":
        generator = {
            "g": int(flow.metadata["g"]),
            "ks": [int(k) for k in flow.metadata["ks"]],
            "annulus_variant": flow.metadata.get("annulus_variant"),
        }

    context = TheoremContext(
        name=name or flow.name,
        genus=_genus(M),
        coeff=coeff.value,
        b1_M=b1_M,
        b1_K=b1_K,
        kernel_rank=i_star.kernel_rank,
        image_rank=i_star.image_rank,
        mono=i_star.is_monomorphism(),
        complement_connected=len(complement_components(K)) == 1,
        complement=_complement_facts(report),
        complexity=report.complexity,
        k=report.k,
        m=report.m,
        local_complexities=report.local_complexities,
        components=[c.as_dict() for c in report.components],
        dissonant_count=len(report.dissonant),
        census=report.census.as_dict(),
        k_character=report.k_character.value,
        valid=report.valid,
        certified=report.certified,
        undetermined_fraction=report.undetermined_fraction,
        invalid_reasons=report.invalid_reasons,
        influence_b1=influence_b1,
        influence_mono=influence_mono,
        generator=generator,
    )
    logger.debug(f"Context for {context.name}: genus {context.genus}, i* kernel {context.kernel_rank}")
    return context


def _invalid(name: str, theorem: str, ctx: TheoremContext) -> Optional[Verdict]:
    """Not-applicable verdict when the labels of the report cannot be trusted."""
    reasons = list(ctx.invalid_reasons)
    if not ctx.valid and not reasons:
        reasons.append(f"{ctx.undetermined_fraction:.2%} of samples undetermined")
    negative = [c["index"] for c in ctx.components if c.get("local_complexity", 0) < 0]
    if negative and not any("no end" in r for r in reasons):
        reasons.append(f"components {negative} reach no end of K")
    if not reasons:
        return None
    return _not_applicable(name, theorem, "report invalid: " + "; ".join(reasons), {"report_invalid": reasons})


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------


def check_structure(ctx: TheoremContext) -> Verdict:
    """Injective i* forbids dissonance and splits M∖K into one-sided pieces."""
    name, theorem = "check_structure", "structure"
    details = {"kernel_rank": ctx.kernel_rank, "complement": ctx.complement}
    if not ctx.mono:
        return _not_applicable(name, theorem, f"i* is not injective (kernel rank {ctx.kernel_rank})", details)
    invalid = _invalid(name, theorem, ctx)
    if invalid:
        return invalid
    failures = []
    if ctx.dissonant_count:
        failures.append(f"{ctx.dissonant_count} dissonant cells")
    one_sided = {
        frozenset({CellLabel.PURELY_ATTRACTED.value}),
        frozenset({CellLabel.PURELY_REPELLED.value}),
    }
    for comp in ctx.complement:
        if not comp["near_labels"]:
            details.setdefault("unlabelled_components", []).append(comp["index"])
            continue
        if frozenset(comp["near_labels"]) not in one_sided:
            failures.append(f"component {comp['index']} of M∖K mixes {sorted(comp['near_labels'])}")
        if comp["boundary_circles"] != 1:
            failures.append(
                f"component {comp['index']} of M∖K meets {comp['boundary_circles']} boundary circles of N"
            )
    return _verdict(name, theorem, failures, "no dissonance; M∖K components are one-sided", details)


def check_complexity_bounds(ctx: TheoremContext) -> Verdict:
    """Complexity is bounded by the kernel and image ranks of i* and by b₁(K)."""
    name, theorem = "check_complexity_bounds", "homoclinic-bounds"
    details = {
        "complexity": ctx.complexity,
        "kernel_rank": ctx.kernel_rank,
        "image_rank": ctx.image_rank,
        "b1_K": ctx.b1_K,
        "coeff": ctx.coeff,
    }
    invalid = _invalid(name, theorem, ctx)
    if invalid:
        return invalid
    failures = []
    if ctx.complexity > ctx.kernel_rank:
        failures.append(f"complexity {ctx.complexity} > rank ker i* = {ctx.kernel_rank}")
    if ctx.complexity > ctx.image_rank:
        failures.append(f"complexity {ctx.complexity} > rank im i* = {ctx.image_rank}")
    if ctx.complexity > ctx.b1_K:
        failures.append(f"complexity {ctx.complexity} > b1(K) = {ctx.b1_K}")
    return _verdict(name, theorem, failures, f"complexity {ctx.complexity} within bounds", details)


def check_genus_bound(ctx: TheoremContext) -> Verdict:
    name, theorem = "check_genus_bound", "genus-bound"
    details = {"complexity": ctx.complexity, "genus": ctx.genus}
    invalid = _invalid(name, theorem, ctx)
    if invalid:
        return invalid
    failures = []
    if ctx.complexity > ctx.genus:
        failures.append(f"complexity {ctx.complexity} > genus {ctx.genus}")
    return _verdict(name, theorem, failures, f"complexity {ctx.complexity} ≤ genus {ctx.genus}", details)


def check_nonsep(ctx: TheoremContext) -> Verdict:
    """Full-rank K with connected complement is an attractor or a repeller."""
    name, theorem = "check_nonsep", "nonseparating"
    details = {
        "b1_K": ctx.b1_K,
        "b1_M": ctx.b1_M,
        "complement_connected": ctx.complement_connected,
        "k_character": ctx.k_character,
    }
    if ctx.b1_K != ctx.b1_M:
        return _not_applicable(name, theorem, f"b1(K) = {ctx.b1_K} differs from b1(M) = {ctx.b1_M}", details)
    if not ctx.complement_connected:
        return _not_applicable(name, theorem, "M∖K is disconnected", details)
    invalid = _invalid(name, theorem, ctx)
    if invalid:
        return invalid
    failures = []
    if ctx.k_character == KCharacter.NEITHER.value:
        failures.append("K is neither an attractor nor a repeller on its block")
    return _verdict(name, theorem, failures, f"K is an {ctx.k_character}", details)


def expected_census(g: int, ks: Sequence[int]) -> Tuple[int, int, int]:
    """(attracting, hyperbolic, degenerate) counts for a generator partition."""
    disks = sum(1 for k in ks if k == 0)
    annuli = sum(1 for k in ks if k == 1)
    handles = sum(1 for k in ks if k >= 2)
    return disks, g - handles - annuli, annuli


def check_census(ctx: TheoremContext, g: Optional[int] = None, ks: Optional[Sequence[int]] = None) -> Verdict:
    """Fixed point counts and local complexities of a generator flow."""
    name, theorem = "check_census", "generator-census"
    generator = ctx.generator or {}
    if g is None or ks is None:
        if not generator:
            return _not_applicable(name, theorem, "not a generator flow")
        g, ks = generator["g"], generator["ks"]
    ks = list(ks)
    if generator.get("annulus_variant") not in (None, "degenerate-saddle") and 1 in ks:
        return _not_applicable(name, theorem, "annuli are not of the degenerate-saddle variant")
    invalid = _invalid(name, theorem, ctx)
    if invalid:
        return invalid

    expected = expected_census(g, ks)
    observed = (
        int(ctx.census.get("attracting", 0)),
        int(ctx.census.get("hyperbolic_saddle", 0)),
        int(ctx.census.get("degenerate_saddle", 0)),
    )
    details = {
        "g": g,
        "ks": ks,
        "expected": list(expected),
        "observed": list(observed),
        "local_complexities": sorted(ctx.local_complexities),
    }
    failures = []
    if observed != expected:
        failures.append(f"fixed points {observed} != expected {expected}")
    if sorted(ctx.local_complexities) != sorted(ks):
        failures.append(f"local complexities {sorted(ctx.local_complexities)} != partition {sorted(ks)}")
    if ctx.complexity != g:
        failures.append(f"complexity {ctx.complexity} != genus {g}")
    quiet = [c["index"] for c in ctx.components if c["local_complexity"] > 0 and not c["dissonant_cells"]]
    if quiet:
        failures.append(f"components {quiet} have positive local complexity but no dissonant cells")
    total = expected[0] + expected[1] + expected[2]
    return _verdict(name, theorem, failures, f"{total} isolated fixed points as predicted", details)


def check_torus_bound(ctx: TheoremContext) -> Verdict:
    name, theorem = "check_torus_bound", "torus-bound"
    if ctx.genus != 1:
        return _not_applicable(name, theorem, f"surface has genus {ctx.genus}")
    invalid = _invalid(name, theorem, ctx)
    if invalid:
        return invalid
    failures = [f"complexity {ctx.complexity} > 1 on a torus"] if ctx.complexity > 1 else []
    return _verdict(name, theorem, failures, "complexity ≤ 1 on the torus", {"complexity": ctx.complexity})


def check_influence_corollary(ctx: TheoremContext) -> Verdict:
    """Zero complexity iff H¹ of the influence complex injects into H¹(K)."""
    name, theorem = "check_influence_corollary", "influence-corollary"
    if ctx.influence_mono is None:
        return _not_applicable(name, theorem, "influence complex unavailable")
    invalid = _invalid(name, theorem, ctx)
    if invalid:
        return invalid
    details = {
        "complexity": ctx.complexity,
        "influence_b1": ctx.influence_b1,
        "monomorphism": ctx.influence_mono,
    }
    failures = []
    if (ctx.complexity == 0) != ctx.influence_mono:
        failures.append(
            f"complexity {ctx.complexity} but restriction to K "
            f"{'is' if ctx.influence_mono else 'is not'} injective"
        )
    return _verdict(name, theorem, failures, "complexity matches injectivity on the influence complex", details)


def check_local_complexity_remark(ctx: TheoremContext) -> Verdict:
    """Homoclinic cells appear exactly in components of positive local complexity."""
    name, theorem = "check_local_complexity_remark", "local-complexity"
    invalid = _invalid(name, theorem, ctx)
    if invalid:
        return invalid
    failures = []
    for comp in ctx.components:
        lc = comp["local_complexity"]
        if (lc == 0) != (comp["homoclinic_cells"] == 0):
            failures.append(f"component {comp['index']}: local complexity {lc} with {comp['homoclinic_cells']} homoclinic cells")
        if lc >= 2 and not comp["dissonant_cells"]:
            failures.append(f"component {comp['index']}: local complexity {lc} without dissonant cells")
    return _verdict(name, theorem, failures, f"{len(ctx.components)} components consistent", {"components": ctx.components})


def check_report_consistency(ctx: TheoremContext) -> Verdict:
    name, theorem = "check_report_consistency", "complexity-definition"
    details = {"complexity": ctx.complexity, "k": ctx.k, "m": ctx.m, "local_complexities": ctx.local_complexities}
    failures = []
    if ctx.complexity != ctx.k - ctx.m:
        failures.append(f"complexity {ctx.complexity} != k − m = {ctx.k - ctx.m}")
    if ctx.complexity != sum(ctx.local_complexities):
        failures.append(f"complexity {ctx.complexity} != Σ local complexities = {sum(ctx.local_complexities)}")
    if ctx.m != len(ctx.local_complexities):
        failures.append(f"m = {ctx.m} but {len(ctx.local_complexities)} components listed")
    return _verdict(name, theorem, failures, "complexity = k − m = Σ lc", details)


CHECKS: Dict[str, Callable[[TheoremContext], Verdict]] = {
    "check_structure": check_structure,
    "check_complexity_bounds": check_complexity_bounds,
    "check_genus_bound": check_genus_bound,
    "check_nonsep": check_nonsep,
    "check_torus_bound": check_torus_bound,
    "check_influence_corollary": check_influence_corollary,
    "check_local_complexity_remark": check_local_complexity_remark,
    "check_report_consistency": check_report_consistency,
}


def run_checks(
    ctx: TheoremContext, g: Optional[int] = None, ks: Optional[Sequence[int]] = None
) -> List[Verdict]:
    """Run every check; the census also uses an explicit (g, ks) when given."""
    verdicts = [check(ctx) for check in CHECKS.values()]
    verdicts.insert(4, check_census(ctx, g, ks))
    for verdict in verdicts:
        if verdict.failed:
            logger.warning(f"{ctx.name}: {verdict.name} failed: {verdict.message}")
        else:
            logger.debug(f"{ctx.name}: {verdict.name} {verdict.status.value}")
    return verdicts


@dataclass
class VerdictDocument:
    """Serializable verdict list with the process exit code."""

    document: Dict[str, Any]
    exit_code: int


def emit_report(verdicts: Sequence[Verdict], name: str = "verification", coeff: str = "z2") -> VerdictDocument:
    """Verdict document.

    Exit code 1 when any check failed or was skipped because the report is
    invalid; checks whose hypotheses do not hold only add warnings.
    """
    counts = Counter(v.status.value for v in verdicts)
    failed = [v.name for v in verdicts if v.failed]
    warnings = [f"{v.name}: {v.message}" for v in verdicts if v.status is VerdictStatus.NOT_APPLICABLE]
    untrusted = [v.name for v in verdicts if "report_invalid" in v.details]
    if untrusted:
        logger.warning(f"{name}: report invalid, {len(untrusted)} checks skipped")
    exit_code = 1 if failed or untrusted else 0
    document = {
        "schema": SCHEMA_VERSION,
        "kind": "verdicts",
        "name": name,
        "coefficients": coeff,
        "verdicts": [v.as_dict() for v in verdicts],
        "summary": {status.value: counts.get(status.value, 0) for status in VerdictStatus},
        "failed": failed,
        "untrusted": untrusted,
        "warnings": warnings,
        "exit_code": exit_code,
    }
    return VerdictDocument(document, exit_code)


def verify_document(doc: Mapping[str, Any]) -> VerdictDocument:
    """Re-run the checks on a stored report document."""
    ctx = TheoremContext.from_document(doc)
    return emit_report(run_checks(ctx), ctx.name, ctx.coeff)


def random_generator_configs(n: int, seed: int = 0, max_genus: int = 3, max_parts: int = 3) -> List[Tuple[int, List[int]]]:
    """Deterministic random (g, ks) pairs with sum(ks) = g."""
    rng = np.random.default_rng(seed)
    configs = []
    for _ in range(n):
        g = int(rng.integers(0, max_genus + 1))
        parts = int(rng.integers(1, max_parts + 1))
        ks = [int(x) for x in rng.multinomial(g, [1.0 / parts] * parts)] if g else [0] * parts
        configs.append((g, ks))
    return configs


def suite_summary(results: Mapping[str, Sequence[Verdict]]) -> pd.DataFrame:
    """One row per (configuration, check)."""
    rows = [
        {"config": config, "check": v.name, "theorem": v.theorem, "status": v.status.value, "message": v.message}
        for config, verdicts in results.items()
        for v in verdicts
    ]
    return pd.DataFrame(rows, columns=["config", "check", "theorem", "status", "message"])
