"""Tests for version information module."""

import surface_influence
from surface_influence.__version__ import (
    __author__,
    __author_email__,
    __description__,
    __license__,
    __title__,
    __url__,
    __version__,
)


class TestVersion:
    """Test suite for version information."""

    def test_version_format(self):
        """Version follows major.minor.patch."""
        parts = __version__.split(".")
        assert len(parts) == 3
        assert all(part.isdigit() for part in parts)

    def test_package_exports_version(self):
        """The package re-exports the version string."""
        assert surface_influence.__version__ == __version__

    def test_title(self):
        assert __title__ == "Surface Influence"

    def test_description_mentions_surfaces(self):
        assert "surface" in __description__.lower()

    def test_author_information(self):
        assert __author__
        assert "@" in __author_email__

    def test_license_and_url(self):
        assert __license__ == "BSD-3-Clause"
        assert __url__.startswith("https://")
