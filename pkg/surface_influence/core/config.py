"""
Configuration management for Surface Influence.

Supports loading configuration from YAML files with environment and CLI
overrides.
"""

import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

try:
    import yaml

    HAS_YAML = True
except ImportError:
    HAS_YAML = False


ENV_PREFIX = "SURFACE_INFLUENCE_"


def _coerce(raw: str, like: Any) -> Any:
    """Convert an environment string to the type of a default value."""
    if isinstance(like, bool):
        return raw.strip().lower() in ("1", "true", "yes", "on")
    if isinstance(like, int):
        return int(raw)
    if isinstance(like, float):
        return float(raw)
    return raw


class Config:
    """Configuration manager for analyses, sweeps and rendering."""

    DEFAULT_CONFIG_PATHS = [
        Path.home() / ".surface_influence.yaml",
        Path("surface_influence.yaml"),
        Path("surface_influence.yml"),
    ]

    DEFAULT_VALUES: Dict[str, Any] = {
        # Integration
        "step": 0.02,
        "t_max": 200.0,
        "refine": 1,
        "seed": 0,
        # Algebra
        "coeff": "z2",
        # Output
        "out": ".",
        # Grid dynamics and classification
        "tau_factor": 6.0,
        "dwell_factor": 20.0,
        "freeze_scale": 0.1,
        "block_width": 0.2,
        "undetermined_limit": 0.01,
        "fixed_point_radius": 0.5,
        # Continuation
        "lambda_max": 0.5,
        "lambda_points": 11,
        "probe_depth": 3,
        "sweep_refine": 2,
        # Rendering
        "seed_count": 24,
        # Logging
        "log_level": "INFO",
    }

    VALID_COEFFICIENTS = ["z", "z2"]

    def __init__(self, config_path: Optional[Path] = None):
        """Initialize configuration.

        Args:
            config_path: Path to config file. If None, searches default locations.
        """
        self.config_path = config_path
        self._config: Dict[str, Any] = self.DEFAULT_VALUES.copy()

        if config_path:
            if not config_path.exists():
                raise FileNotFoundError(f"Config file not found: {config_path}")
            self.load_from_file(config_path)
        else:
            for path in self.DEFAULT_CONFIG_PATHS:
                if path.exists():
                    self.load_from_file(path)
                    break

    def load_from_file(self, path: Path) -> None:
        """Load configuration from a YAML file.

        Raises:
            ImportError: If PyYAML is not installed
            ValueError: If file is not valid YAML
        """
        if not HAS_YAML:
            raise ImportError(
                "PyYAML is required to load config files. "
                "Install it with: pip install pyyaml"
            )

        try:
            with open(path, "r", encoding="utf-8") as f:
                loaded = yaml.safe_load(f)
                if loaded:
                    self._config.update(loaded)
                self.config_path = path
        except yaml.YAMLError as e:
            raise ValueError(f"Invalid YAML in config file {path}: {e}")

    def save_to_file(self, path: Optional[Path] = None) -> None:
        """Save current configuration to a YAML file.

        Raises:
            ImportError: If PyYAML is not installed
            ValueError: If no path specified and no config_path set
        """
        if not HAS_YAML:
            raise ImportError(
                "PyYAML is required to save config files. "
                "Install it with: pip install pyyaml"
            )

        save_path = path or self.config_path
        if not save_path:
            raise ValueError("No path specified for saving config")

        save_path.parent.mkdir(parents=True, exist_ok=True)

        with open(save_path, "w", encoding="utf-8") as f:
            yaml.safe_dump(self._config, f, default_flow_style=False, sort_keys=False)

        self.config_path = save_path

    def get(self, key: str, default: Any = None) -> Any:
        """Get a configuration value.

        An environment variable ``SURFACE_INFLUENCE_<KEY>`` wins over the file
        and is converted to the type of the built-in default.
        """
        env_value = os.getenv(f"{ENV_PREFIX}{key.upper()}")
        if env_value is not None:
            like = self.DEFAULT_VALUES.get(key)
            try:
                return _coerce(env_value, like)
            except ValueError:
                return env_value

        return self._config.get(key, default)

    def set(self, key: str, value: Any) -> None:
        """Set a configuration value."""
        self._config[key] = value

    def update(self, values: Dict[str, Any]) -> None:
        """Update multiple configuration values, skipping ``None`` overrides."""
        self._config.update({k: v for k, v in values.items() if v is not None})

    def as_dict(self) -> Dict[str, Any]:
        """Get configuration as dictionary."""
        return self._config.copy()

    def validate(self) -> Tuple[bool, List[str]]:
        """Validate configuration values.

        Returns:
            Tuple of (is_valid, list_of_errors)
        """
        errors = []

        for key in ("step", "t_max", "tau_factor", "dwell_factor", "freeze_scale"):
            value = self.get(key)
            if not isinstance(value, (int, float)) or value <= 0:
                errors.append(f"{key} must be > 0, got: {value}")

        block_width = self.get("block_width")
        if not isinstance(block_width, (int, float)) or block_width <= 0:
            errors.append(f"block_width must be > 0, got: {block_width}")

        limit = self.get("undetermined_limit")
        if not isinstance(limit, (int, float)) or not (0 <= limit <= 1):
            errors.append(f"undetermined_limit must be between 0 and 1, got: {limit}")

        for key in ("refine", "sweep_refine", "probe_depth", "seed"):
            value = self.get(key)
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                errors.append(f"{key} must be a non-negative integer, got: {value}")

        points = self.get("lambda_points")
        if not isinstance(points, int) or points < 1:
            errors.append(f"lambda_points must be >= 1, got: {points}")

        coeff = self.get("coeff")
        if coeff not in self.VALID_COEFFICIENTS:
            errors.append(
                f"coeff must be one of {self.VALID_COEFFICIENTS}, got: {coeff}"
            )

        return (len(errors) == 0, errors)

    @classmethod
    def create_default_config(cls, path: Path) -> "Config":
        """Create a new configuration file with default values."""
        config = cls()
        config.save_to_file(path)
        return config
