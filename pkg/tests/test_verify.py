"""Tests for theorem checks and verdict documents."""

from dataclasses import replace

import pytest

from surface_influence.core.constructions import assemble_generator
from surface_influence.core.verify import (
    SCHEMA_VERSION,
    TheoremContext,
    Verdict,
    VerdictStatus,
    check_census,
    check_complexity_bounds,
    check_genus_bound,
    check_influence_corollary,
    check_local_complexity_remark,
    check_nonsep,
    check_report_consistency,
    check_structure,
    check_torus_bound,
    emit_report,
    expected_census,
    prepare_context,
    random_generator_configs,
    run_checks,
    suite_summary,
    verify_document,
)


def _component(index, local_complexity, homoclinic, dissonant):
    return {
        "index": index,
        "size": 10,
        "first_cell": index,
        "ends": local_complexity + 1,
        "local_complexity": local_complexity,
        "kind": "homoclinic" if homoclinic else "purely-repelled",
        "homoclinic_cells": homoclinic,
        "dissonant_cells": dissonant,
    }


@pytest.fixture
def genus_two_context():
    """Facts of a generator(2, [1, 1]) analysis."""
    return TheoremContext(
        name="genus-2",
        genus=2,
        coeff="z2",
        b1_M=4,
        b1_K=3,
        kernel_rank=2,
        image_rank=2,
        mono=False,
        complement_connected=False,
        complexity=2,
        k=4,
        m=2,
        local_complexities=[1, 1],
        components=[_component(0, 1, 12, 2), _component(1, 1, 12, 2)],
        dissonant_count=4,
        census={"attracting": 0, "hyperbolic_saddle": 0, "degenerate_saddle": 2, "repelling": 0},
        k_character="neither",
        valid=True,
        certified=True,
        influence_b1=5,
        influence_mono=False,
        generator={"g": 2, "ks": [1, 1], "annulus_variant": "degenerate-saddle"},
    )


@pytest.fixture
def sphere_context():
    """Facts of a sphere with a repelling disk."""
    return TheoremContext(
        name="sphere",
        genus=0,
        coeff="z2",
        b1_M=0,
        b1_K=0,
        kernel_rank=0,
        image_rank=0,
        mono=True,
        complement_connected=True,
        complexity=0,
        k=1,
        m=1,
        local_complexities=[0],
        components=[_component(0, 0, 0, 0)],
        dissonant_count=0,
        census={"attracting": 1, "hyperbolic_saddle": 0, "degenerate_saddle": 0, "repelling": 0},
        k_character="repeller",
        valid=True,
        certified=True,
        complement=[{"index": 0, "size": 10, "near_labels": {"purely-repelled": 6}, "boundary_circles": 1}],
        influence_b1=0,
        influence_mono=True,
        generator={"g": 0, "ks": [0], "annulus_variant": "degenerate-saddle"},
    )


class TestExpectedCensus:
    @pytest.mark.parametrize(
        "g, ks, expected",
        [
            (2, [1, 1], (0, 0, 2)),
            (2, [0, 2], (1, 1, 0)),
            (3, [0, 1, 2], (1, 1, 1)),
            (0, [0], (1, 0, 0)),
        ],
    )
    def test_counts(self, g, ks, expected):
        assert expected_census(g, ks) == expected

    def test_total_is_g_minus_k_plus_l(self):
        for g, ks in random_generator_configs(40, seed=3):
            k = sum(1 for part in ks if part >= 2)
            l = sum(1 for part in ks if part == 0)
            assert sum(expected_census(g, ks)) == g - k + l

    def test_random_configs_are_partitions(self):
        configs = random_generator_configs(20, seed=1)
        assert configs == random_generator_configs(20, seed=1)
        for g, ks in configs:
            assert 0 <= g <= 3
            assert sum(ks) == g
            assert 1 <= len(ks) <= 3


class TestChecks:
    """Individual checks on synthetic contexts."""

    def test_genus_two_passes_everything_applicable(self, genus_two_context):
        verdicts = run_checks(genus_two_context)
        assert not any(v.failed for v in verdicts)
        statuses = {v.name: v.status for v in verdicts}
        assert statuses["check_structure"] is VerdictStatus.NOT_APPLICABLE
        assert statuses["check_census"] is VerdictStatus.PASS
        assert statuses["check_torus_bound"] is VerdictStatus.NOT_APPLICABLE

    def test_sphere_passes_structure(self, sphere_context):
        assert check_structure(sphere_context).passed
        assert check_nonsep(sphere_context).passed
        assert check_influence_corollary(sphere_context).passed

    def test_structure_rejects_dissonance(self, sphere_context):
        verdict = check_structure(replace(sphere_context, dissonant_count=3))
        assert verdict.failed
        assert "3 dissonant cells" in verdict.message

    def test_structure_rejects_mixed_side(self, sphere_context):
        mixed = [{"index": 0, "size": 10, "near_labels": {"purely-repelled": 3, "homoclinic": 1}, "boundary_circles": 1}]
        assert check_structure(replace(sphere_context, complement=mixed)).failed
        two = [{"index": 0, "size": 10, "near_labels": {"purely-attracted": 3}, "boundary_circles": 2}]
        assert check_structure(replace(sphere_context, complement=two)).failed

    def test_bounds(self, genus_two_context):
        assert check_complexity_bounds(genus_two_context).passed
        too_big = replace(genus_two_context, complexity=3)
        verdict = check_complexity_bounds(too_big)
        assert verdict.failed
        assert "rank ker" in verdict.message
        assert check_genus_bound(too_big).failed

    def test_torus_bound(self, genus_two_context):
        torus = replace(genus_two_context, genus=1, complexity=2)
        assert check_torus_bound(torus).failed
        assert check_torus_bound(replace(torus, complexity=1)).passed

    def test_nonsep_requires_full_rank(self, genus_two_context):
        assert check_nonsep(genus_two_context).status is VerdictStatus.NOT_APPLICABLE
        full = replace(genus_two_context, b1_K=4, complement_connected=True, k_character="neither")
        assert check_nonsep(full).failed
        assert check_nonsep(replace(full, k_character="attractor")).passed

    def test_census_mismatch(self, genus_two_context):
        wrong = dict(genus_two_context.census, degenerate_saddle=1)
        verdict = check_census(replace(genus_two_context, census=wrong))
        assert verdict.failed
        assert "fixed points" in verdict.message

    def test_census_explicit_partition(self, genus_two_context):
        verdict = check_census(replace(genus_two_context, generator=None), 2, [1, 1])
        assert verdict.passed
        assert check_census(replace(genus_two_context, generator=None)).status is VerdictStatus.NOT_APPLICABLE

    def test_census_skips_homoclinic_annuli(self, genus_two_context):
        homoclinic = dict(genus_two_context.generator, annulus_variant="homoclinic-fibered")
        verdict = check_census(replace(genus_two_context, generator=homoclinic))
        assert verdict.status is VerdictStatus.NOT_APPLICABLE

    def test_influence_corollary_mismatch(self, genus_two_context):
        assert check_influence_corollary(genus_two_context).passed
        assert check_influence_corollary(replace(genus_two_context, influence_mono=True)).failed
        missing = replace(genus_two_context, influence_mono=None)
        assert check_influence_corollary(missing).status is VerdictStatus.NOT_APPLICABLE

    def test_local_complexity_remark(self, genus_two_context):
        assert check_local_complexity_remark(genus_two_context).passed
        quiet = replace(genus_two_context, components=[_component(0, 2, 5, 0), _component(1, 0, 0, 0)])
        assert check_local_complexity_remark(quiet).failed
        stray = replace(genus_two_context, components=[_component(0, 0, 4, 0)])
        assert check_local_complexity_remark(stray).failed

    def test_report_consistency(self, genus_two_context):
        assert check_report_consistency(genus_two_context).passed
        verdict = check_report_consistency(replace(genus_two_context, k=5))
        assert verdict.failed
        assert "k − m" in verdict.message

    def test_invalid_report_is_not_applicable(self, genus_two_context):
        invalid = replace(genus_two_context, valid=False, undetermined_fraction=0.05)
        for check in (check_complexity_bounds, check_genus_bound, check_local_complexity_remark):
            verdict = check(invalid)
            assert verdict.status is VerdictStatus.NOT_APPLICABLE
            assert "invalid" in verdict.message

    def test_missing_block_is_not_applicable(self, genus_two_context):
        unblocked = replace(genus_two_context, valid=False, invalid_reasons=["no isolating block around K"])
        for check in (check_census, check_genus_bound, check_complexity_bounds):
            verdict = check(unblocked)
            assert verdict.status is VerdictStatus.NOT_APPLICABLE
            assert "no isolating block" in verdict.message
            assert verdict.details["report_invalid"] == ["no isolating block around K"]

    def test_negative_local_complexity_is_not_applicable(self, genus_two_context):
        endless = replace(
            genus_two_context,
            local_complexities=[-1, 1],
            components=[_component(0, -1, 0, 0), _component(1, 1, 12, 2)],
            complexity=0,
        )
        for check in (check_census, check_local_complexity_remark, check_genus_bound):
            verdict = check(endless)
            assert verdict.status is VerdictStatus.NOT_APPLICABLE
            assert "no end of K" in verdict.message

    def test_structure_skips_unlabelled_component(self, sphere_context):
        complement = sphere_context.complement + [{"index": 1, "size": 4, "near_labels": {}, "boundary_circles": 0}]
        verdict = check_structure(replace(sphere_context, complement=complement))
        assert verdict.passed
        assert verdict.details["unlabelled_components"] == [1]


class TestDocuments:
    """Verdict documents and exit codes."""

    def test_emit_report_exit_codes(self, genus_two_context):
        passing = emit_report(run_checks(genus_two_context), "genus-2")
        assert passing.exit_code == 0
        assert passing.document["schema"] == SCHEMA_VERSION
        assert passing.document["summary"]["fail"] == 0
        assert passing.document["warnings"]
        failing = emit_report(run_checks(replace(genus_two_context, complexity=3)))
        assert failing.exit_code == 1
        assert "check_genus_bound" in failing.document["failed"]

    def test_invalid_report_exits_one(self, genus_two_context):
        invalid = replace(genus_two_context, valid=False, undetermined_fraction=0.2, influence_mono=None)
        result = emit_report(run_checks(invalid), "genus-2")
        assert result.exit_code == 1
        assert result.document["failed"] == []
        assert "check_census" in result.document["untrusted"]
        assert not any(v.passed for v in run_checks(invalid) if v.name != "check_report_consistency")

    def test_unmet_hypotheses_only_warn(self, sphere_context):
        verdicts = [check_torus_bound(sphere_context)]
        assert verdicts[0].status is VerdictStatus.NOT_APPLICABLE
        result = emit_report(verdicts, "sphere")
        assert result.exit_code == 0
        assert result.document["untrusted"] == []
        assert result.document["warnings"]

    def test_context_document_round_trip(self, genus_two_context):
        rebuilt = TheoremContext.from_document(genus_two_context.as_dict())
        assert rebuilt == genus_two_context
        assert verify_document(genus_two_context.as_dict()).exit_code == 0

    def test_document_missing_field(self, genus_two_context):
        doc = genus_two_context.as_dict()
        del doc["complexity"]
        with pytest.raises(ValueError, match="complexity"):
            TheoremContext.from_document(doc)

    def test_verdict_dict(self):
        verdict = Verdict("check_x", "x", VerdictStatus.FAIL, "broken", {"a": 1})
        assert Verdict.from_dict(verdict.as_dict()) == verdict
        assert verdict.failed and not verdict.passed

    def test_suite_summary(self, genus_two_context, sphere_context):
        frame = suite_summary({"g2": run_checks(genus_two_context), "s": run_checks(sphere_context)})
        assert list(frame.columns) == ["config", "check", "theorem", "status", "message"]
        assert set(frame["config"]) == {"g2", "s"}
        assert (frame["status"] != "fail").all()


class TestLiveContext:
    """Contexts computed from real analyses."""

    def test_sphere_context(self, sphere_construction, sphere_report):
        M, K, flow = sphere_construction
        ctx = prepare_context(M, K, flow, report=sphere_report)
        assert (ctx.genus, ctx.b1_M, ctx.b1_K) == (0, 0, 0)
        assert ctx.mono
        assert ctx.complement_connected
        assert ctx.generator == {"g": 0, "ks": [0], "annulus_variant": "degenerate-saddle"}
        verdicts = {v.name: v for v in run_checks(ctx)}
        assert verdicts["check_structure"].passed
        assert verdicts["check_census"].passed
        assert not any(v.failed for v in verdicts.values())

    @pytest.mark.slow
    @pytest.mark.integration
    def test_torus_context(self, torus_refined_construction, default_params):
        M, K, flow = torus_refined_construction
        ctx = prepare_context(M, K, flow, default_params)
        assert ctx.kernel_rank == 1
        assert ctx.complexity == 1
        assert emit_report(run_checks(ctx)).exit_code == 0


GENERATOR_PARTITIONS = [
    (0, [0]),
    (1, [1]),
    (1, [0, 1]),
    (2, [1, 1]),
    (2, [2]),
    (2, [0, 2]),
    (2, [0, 1, 1]),
    (3, [1, 1, 1]),
    (3, [1, 2]),
    (3, [3]),
    (3, [0, 3]),
    (3, [0, 1, 2]),
    (3, [0, 0, 3]),
]


@pytest.mark.slow
@pytest.mark.integration
class TestGeneratorSuite:
    """Generator flows for every partition up to genus 3, refined once."""

    @pytest.mark.parametrize("g,ks", GENERATOR_PARTITIONS, ids=lambda v: str(v))
    def test_bounds_and_census_pass(self, g, ks, default_params):
        M, K, flow = assemble_generator(g, ks, 1)
        ctx = prepare_context(M, K, flow, default_params)
        assert ctx.valid, ctx.invalid_reasons
        for check in (check_census, check_genus_bound, check_complexity_bounds):
            verdict = check(ctx)
            assert verdict.status is VerdictStatus.PASS, f"{verdict.name}: {verdict.message}"
