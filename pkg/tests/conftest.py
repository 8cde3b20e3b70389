"""
Shared pytest fixtures and configuration for Surface Influence tests.
"""

import shutil
import tempfile
from pathlib import Path

import pytest

from surface_influence.core.constructions import (
    build_fixture,
    example_1,
    example_2,
    sphere_fixture,
)
from surface_influence.core.dynamics import ClassificationParams, influence_decomposition


@pytest.fixture
def temp_dir():
    """Fixture providing a temporary directory for file operations."""
    temp_directory = tempfile.mkdtemp()
    yield Path(temp_directory)
    shutil.rmtree(temp_directory)


@pytest.fixture(scope="session")
def sphere_construction():
    """Sphere with a stationary disk K, refined once so the block isolates."""
    return sphere_fixture(1)


@pytest.fixture(scope="session")
def torus_construction():
    """Torus from the generator with partition [1]."""
    return build_fixture("torus", 0)


@pytest.fixture(scope="session")
def torus_refined_construction():
    """Torus refined once, for analyses that need an isolating block."""
    return build_fixture("torus", 1)


@pytest.fixture(scope="session")
def example_1_construction():
    """Genus 2 surface with two homoclinic annuli."""
    return example_1(1)


@pytest.fixture(scope="session")
def example_2_construction():
    """Genus 2 surface with a repelled cap and a three-ended handle."""
    return example_2(1)


@pytest.fixture(scope="session")
def default_params():
    """Classification parameters used by the analysis tests."""
    return ClassificationParams()


@pytest.fixture(scope="session")
def sphere_report(sphere_construction, default_params):
    """Influence report of the sphere fixture."""
    M, K, flow = sphere_construction
    return influence_decomposition(M, K, flow, default_params)


@pytest.fixture(scope="session")
def example_1_report(example_1_construction, default_params):
    """Influence report of the two-annulus genus 2 surface."""
    M, K, flow = example_1_construction
    return influence_decomposition(M, K, flow, default_params)


@pytest.fixture(scope="session")
def example_2_report(example_2_construction, default_params):
    """Influence report of the cap and handle genus 2 surface."""
    M, K, flow = example_2_construction
    return influence_decomposition(M, K, flow, default_params)


def pytest_configure(config):
    """Pytest configuration hook."""
    config.addinivalue_line("markers", "cli: mark test as CLI command test")
    config.addinivalue_line("markers", "integration: mark test as integration test")
    config.addinivalue_line("markers", "slow: mark test as slow running test")
    config.addinivalue_line("markers", "visualization: mark test as visualization test")
    config.addinivalue_line("markers", "unit: mark test as unit test")


@pytest.fixture
def mock_config():
    """Fixture providing a mock Config object for CLI tests."""
    from unittest.mock import MagicMock

    from surface_influence.core.config import Config

    config = MagicMock(spec=Config)
    config.get.side_effect = lambda key, default=None: {
        "step": 0.02,
        "t_max": 200.0,
        "refine": 0,
        "seed": 0,
        "coeff": "z2",
        "out": ".",
        "tau_factor": 6.0,
        "dwell_factor": 20.0,
        "freeze_scale": 0.1,
        "block_width": 0.2,
        "undetermined_limit": 0.01,
        "fixed_point_radius": 0.5,
        "lambda_max": 0.5,
        "lambda_points": 11,
        "probe_depth": 3,
        "sweep_refine": 2,
        "seed_count": 24,
        "log_level": "INFO",
    }.get(key, default)
    config.config_path = None

    return config
