"""Validation utilities for construction parameters and run settings."""

from typing import Any, Iterable, List, Sequence


class ValidationError(ValueError):
    """Raised when user supplied parameters are inconsistent."""

    pass


def parse_partition(text: str) -> List[int]:
    """Parse a comma separated partition such as ``"1,1"`` or ``""``.

    Raises:
        ValidationError: If an entry is not an integer
    """
    text = (text or "").strip()
    if not text:
        return []
    try:
        return [int(part) for part in text.split(",") if part.strip() != ""]
    except ValueError:
        raise ValidationError(f"Invalid partition {text!r}: expected integers")


def validate_partition(g: Any, ks: Sequence[Any]) -> List[str]:
    """Validate a generator input (genus and handle partition).

    Returns:
        List of validation error messages (empty if valid)
    """
    errors = []

    if not isinstance(g, int) or isinstance(g, bool):
        errors.append(f"Genus must be an integer, got {type(g).__name__}")
        return errors
    if g < 0:
        errors.append("Genus cannot be negative")

    for i, k in enumerate(ks):
        if not isinstance(k, int) or isinstance(k, bool):
            errors.append(f"Part {i + 1}: expected integer, got {k!r}")
        elif k < 0:
            errors.append(f"Part {i + 1}: parts must be non-negative")

    if not errors and sum(ks) != g:
        errors.append(f"Partition {list(ks)} sums to {sum(ks)}, expected genus {g}")

    return errors


def validate_surface_parameters(holes: Any, subdiv: Any) -> List[str]:
    """Validate the parameters of a sphere with holes."""
    errors = []
    if not isinstance(holes, int) or holes < 1:
        errors.append(
            "A sphere with holes needs at least one hole; use build_sphere instead"
        )
    if not isinstance(subdiv, int) or subdiv < 0:
        errors.append("Subdivision level must be a non-negative integer")
    return errors


def validate_integration_parameters(step: Any, t_max: Any) -> List[str]:
    """Validate integrator step and horizon."""
    errors = []
    try:
        if float(step) <= 0:
            errors.append("Integrator step must be positive")
    except (TypeError, ValueError):
        errors.append("Integrator step must be a valid number")
    try:
        if float(t_max) <= 0:
            errors.append("Time horizon must be positive")
    except (TypeError, ValueError):
        errors.append("Time horizon must be a valid number")
    return errors


def validate_lambda_grid(grid: Iterable[Any]) -> List[str]:
    """Validate a continuation parameter grid on [0, 1]."""
    errors = []
    values = []
    for item in grid:
        try:
            values.append(float(item))
        except (TypeError, ValueError):
            errors.append(f"Grid value {item!r} is not a number")
    if errors:
        return errors
    if not values:
        errors.append("Lambda grid is empty")
        return errors
    if any(v < 0 or v > 1 for v in values):
        errors.append("Lambda values must lie in [0, 1]")
    if values[0] != 0.0:
        errors.append("Lambda grid must start at 0")
    if any(b <= a for a, b in zip(values, values[1:])):
        errors.append("Lambda grid must be strictly increasing")
    return errors


def parse_lambda_grid(text: str) -> List[float]:
    """Parse ``"0,0.05,0.1"`` into floats; validation is separate."""
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ValidationError(f"Invalid lambda grid {text!r}")


def ensure_valid(errors: List[str]) -> None:
    """Raise ValidationError if any message was collected."""
    if errors:
        raise ValidationError("; ".join(errors))
