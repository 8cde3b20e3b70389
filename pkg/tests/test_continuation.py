"""Tests for continuation sweeps and the non-saddle criteria."""

import numpy as np
import pytest

from surface_influence.core.constructions import build_family
from surface_influence.core.continuation import (
    DEFAULT_LAMBDA_GRID,
    SweepColumn,
    SweepResult,
    boundary_flux_signs,
    check_block_persistence,
    rchar_criterion,
    robustness_verdict,
    saddle_probe,
    strongrob_criterion,
    sweep,
)
from surface_influence.core.mesh import Subcomplex
from surface_influence.core.verify import VerdictStatus


@pytest.fixture(scope="module")
def circle_family():
    """Equator family at one subdivision."""
    return build_family("sphere-circle", 1)


def _equator_band(family):
    M = family.complex
    equator = family.reference_set
    cells = [int(t) for t in family.block.cells if equator.vertex_mask[M.triangles[t]].any()]
    return Subcomplex.from_triangles(M, cells)


def _column(
    lam, rchar, strongrob, saddle, betti=(1, 1, 0), cells=frozenset({1, 2}), contains=True, persistent=True
):
    return SweepColumn(lam, cells, True, True, betti, rchar, strongrob, saddle, contains, persistent)


def _result(columns, b1_M=0):
    return SweepResult("synthetic", 10, 0.1, 3, columns, metadata={"coeff": "z2", "b1_M": b1_M})


class TestCriteria:
    """Cohomological tests on a fixed block."""

    def test_band_around_equator_is_non_saddle(self, circle_family):
        N = circle_family.block
        band = _equator_band(circle_family)
        assert N.contains(band)
        assert rchar_criterion(N, band)
        assert strongrob_criterion(N, band)

    def test_single_cell_is_saddle_like(self, circle_family):
        N = circle_family.block
        cell = Subcomplex.from_triangles(N.parent, [int(N.cells[0])])
        assert not strongrob_criterion(N, cell)

    def test_whole_block_passes_rchar(self, circle_family):
        N = circle_family.block
        assert rchar_criterion(N, N)

    def test_probe_skipped_at_depth_zero(self, circle_family):
        N = circle_family.block
        assert saddle_probe(circle_family.at(0.1), _equator_band(circle_family), N, depth=0) is None

    def test_probe_on_empty_set(self, circle_family):
        N = circle_family.block
        assert saddle_probe(circle_family.at(0.1), Subcomplex.empty(N.parent), N) is False


class TestBlockPersistence:
    """Crossing directions on the boundary of the block."""

    def test_flux_signs_are_strict_at_zero(self, circle_family):
        signs = boundary_flux_signs(circle_family.at(0.0), circle_family.block)
        assert len(signs) > 0
        assert np.all(signs != 0)

    def test_block_persists_for_small_lambda(self, circle_family):
        assert check_block_persistence(circle_family, circle_family.block, 0.0)
        assert check_block_persistence(circle_family, circle_family.block, 0.05)


class TestRobustnessVerdict:
    """Agreement checks over synthetic sweep columns."""

    def test_agreeing_columns_pass(self):
        result = _result(
            [
                _column(0.0, True, True, False),
                _column(0.05, False, False, True, betti=(1, 0, 0), contains=False),
            ]
        )
        verdict = robustness_verdict(result)
        assert verdict.status is VerdictStatus.PASS
        assert verdict.details["transitions"] == [0.05]
        assert verdict.details["small_lambda_from"] == 0.05

    def test_criteria_disagreement_fails(self):
        verdict = robustness_verdict(_result([_column(0.0, True, False, False)]))
        assert verdict.failed
        assert "strongrob" in verdict.message

    def test_probe_disagreement_fails(self):
        verdict = robustness_verdict(_result([_column(0.0, True, True, True)]))
        assert verdict.failed
        assert "saddle probe" in verdict.message

    def test_cohomology_corollary_only_on_spheres(self):
        columns = [_column(0.0, True, True, False), _column(0.1, True, True, False, betti=(1, 0, 0))]
        assert robustness_verdict(_result(columns, b1_M=0)).failed
        torus = robustness_verdict(_result(columns, b1_M=2))
        assert torus.passed
        assert torus.details["cohomology_corollary"] == "not applicable"

    def test_all_empty_is_not_applicable(self):
        empty = _column(0.0, None, None, None, betti=None, cells=frozenset())
        assert empty.empty
        assert empty.non_saddle is None
        verdict = robustness_verdict(_result([empty]))
        assert verdict.status is VerdictStatus.NOT_APPLICABLE

    def test_block_persistence_in_details(self):
        columns = [_column(0.0, True, True, False), _column(0.3, True, True, False, persistent=False)]
        verdict = robustness_verdict(_result(columns, b1_M=2))
        assert verdict.passed
        assert verdict.details["persistent"] == [0.0]
        assert verdict.details["non_persistent"] == [0.3]

    def test_non_saddle_falls_back_to_rchar(self):
        assert _column(0.0, True, True, None).non_saddle is True
        assert _column(0.0, False, False, None).non_saddle is False

    def test_result_table(self):
        result = _result([_column(0.0, True, True, False), _column(0.05, False, False, True)])
        frame = result.to_dataframe()
        assert list(frame.index) == [0.0, 0.05]
        assert "cells" not in frame.columns
        assert result.column(0.05).saddle is True
        with pytest.raises(KeyError):
            result.column(0.3)


class TestSweep:
    """Sweeps over builtin families."""

    def test_default_grid(self):
        assert len(DEFAULT_LAMBDA_GRID) == 11
        assert DEFAULT_LAMBDA_GRID[0] == 0.0
        assert DEFAULT_LAMBDA_GRID[-1] == pytest.approx(0.5)

    def test_family_without_block(self, circle_family):
        from surface_influence.core.flow import FlowFamily

        bare = FlowFamily("bare", circle_family.evaluator, circle_family.complex)
        with pytest.raises(ValueError, match="no block"):
            sweep(bare, lambda_grid=[0.0])

    def test_constant_family_repeats_first_column(self):
        family = build_family("sphere-saddle-constant", 1)
        result = sweep(family, lambda_grid=[0.0, 0.1, 0.2], depth=0)
        first = result.columns[0]
        assert result.depth == 0
        for column in result.columns[1:]:
            assert column.cells == first.cells
            assert column.betti == first.betti
            assert column.rchar == first.rchar
            assert column.strongrob == first.strongrob
            assert column.saddle is None
        assert result.lipschitz_estimate == 0.0

    @pytest.mark.slow
    @pytest.mark.integration
    def test_circle_family_loses_robustness(self, circle_family):
        result = sweep(circle_family, lambda_grid=DEFAULT_LAMBDA_GRID)
        base = result.column(0.0)
        assert (base.rchar, base.strongrob, base.saddle) == (True, True, False)
        assert base.betti[1] == 1
        for column in result.columns[1:]:
            assert column.isolating
            assert not column.empty
            assert (column.rchar, column.strongrob, column.saddle) == (False, False, True)
            assert column.betti[1] == 0
        verdict = robustness_verdict(result)
        assert verdict.passed
        assert verdict.details["transitions"] == [0.05]

    @pytest.mark.slow
    @pytest.mark.integration
    def test_drift_family_empties_the_block(self):
        result = sweep(build_family("sphere-drift", 1), lambda_grid=[0.0, 0.1, 0.2])
        assert not result.column(0.0).empty
        assert result.column(0.1).empty
        assert result.column(0.2).empty
        assert robustness_verdict(result).details["excluded_empty"] == [0.1, 0.2]
