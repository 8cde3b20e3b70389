"""Tests for parameter validation helpers."""

import pytest

from surface_influence.core.validation import (
    ValidationError,
    ensure_valid,
    parse_lambda_grid,
    parse_partition,
    validate_integration_parameters,
    validate_lambda_grid,
    validate_partition,
    validate_surface_parameters,
)


class TestPartition:
    """Generator partitions of the genus."""

    def test_parse_partition(self):
        assert parse_partition("1,1") == [1, 1]
        assert parse_partition(" 0, 2 ") == [0, 2]
        assert parse_partition("") == []
        assert parse_partition(None) == []

    def test_parse_partition_rejects_text(self):
        with pytest.raises(ValidationError, match="expected integers"):
            parse_partition("1,x")

    @pytest.mark.parametrize("g, ks", [(0, [0]), (2, [1, 1]), (2, [0, 2]), (3, [3]), (1, [0, 1])])
    def test_valid_partitions(self, g, ks):
        assert validate_partition(g, ks) == []

    def test_sum_mismatch(self):
        errors = validate_partition(2, [1])
        assert len(errors) == 1
        assert "sums to 1" in errors[0]

    def test_negative_genus(self):
        assert any("negative" in e for e in validate_partition(-1, []))

    def test_negative_part(self):
        errors = validate_partition(1, [2, -1])
        assert errors == ["Part 2: parts must be non-negative"]

    def test_non_integer_genus(self):
        assert "integer" in validate_partition(1.5, [1])[0]
        assert "integer" in validate_partition(True, [1])[0]


class TestSurfaceAndIntegration:
    """Sphere-with-holes and integrator settings."""

    def test_surface_parameters(self):
        assert validate_surface_parameters(2, 0) == []
        assert len(validate_surface_parameters(0, 0)) == 1
        assert len(validate_surface_parameters(1, -1)) == 1

    def test_integration_parameters(self):
        assert validate_integration_parameters(0.02, 200) == []
        assert validate_integration_parameters(0, 200) == ["Integrator step must be positive"]
        assert validate_integration_parameters("fast", -1) == [
            "Integrator step must be a valid number",
            "Time horizon must be positive",
        ]


class TestLambdaGrid:
    """Continuation grids on [0, 1]."""

    def test_parse(self):
        assert parse_lambda_grid("0,0.05,0.1") == [0.0, 0.05, 0.1]

    def test_parse_rejects_text(self):
        with pytest.raises(ValidationError):
            parse_lambda_grid("0,a")

    def test_valid_grid(self):
        assert validate_lambda_grid([0.0, 0.05, 0.5, 1.0]) == []

    def test_grid_must_start_at_zero(self):
        assert validate_lambda_grid([0.1, 0.2]) == ["Lambda grid must start at 0"]

    def test_grid_must_increase(self):
        assert validate_lambda_grid([0.0, 0.2, 0.2]) == ["Lambda grid must be strictly increasing"]

    def test_grid_in_unit_interval(self):
        assert "Lambda values must lie in [0, 1]" in validate_lambda_grid([0.0, 1.5])

    def test_empty_grid(self):
        assert validate_lambda_grid([]) == ["Lambda grid is empty"]

    def test_non_numeric(self):
        assert len(validate_lambda_grid([0.0, "x"])) == 1


class TestEnsureValid:
    def test_no_errors(self):
        ensure_valid([])

    def test_joins_messages(self):
        with pytest.raises(ValidationError, match="a; b"):
            ensure_valid(["a", "b"])

    def test_is_value_error(self):
        assert issubclass(ValidationError, ValueError)
