from .__version__ import __version__
from .core.algebra import Coefficients, cohomology, induced_map
from .core.constructions import assemble_generator, build_family, build_fixture
from .core.continuation import robustness_verdict, sweep
from .core.dynamics import ClassificationParams, influence_decomposition
from .core.flow import Flow, FlowFamily
from .core.mesh import Subcomplex, TriangulatedSurface
from .core.verify import emit_report, prepare_context, run_checks

__all__ = [
    "__version__",
    "Coefficients",
    "cohomology",
    "induced_map",
    "assemble_generator",
    "build_family",
    "build_fixture",
    "robustness_verdict",
    "sweep",
    "ClassificationParams",
    "influence_decomposition",
    "Flow",
    "FlowFamily",
    "Subcomplex",
    "TriangulatedSurface",
    "emit_report",
    "prepare_context",
    "run_checks",
]
