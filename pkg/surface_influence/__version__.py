"""Version information for Surface Influence."""

__version__ = "0.3.0"
__title__ = "Surface Influence"
__description__ = (
    "Regions of influence of isolated non-saddle sets for flows on "
    "triangulated surfaces"
)
__author__ = "Bryan Kemp"
__author_email__ = "bryan@kempville.com"
__license__ = "BSD-3-Clause"
__url__ = "https://github.com/bryankemp/surface-influence"
