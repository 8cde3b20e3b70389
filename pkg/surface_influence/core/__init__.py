from .config import Config
from .mesh import MeshError, Subcomplex, TriangulatedSurface

__all__ = ["Config", "MeshError", "Subcomplex", "TriangulatedSurface"]
