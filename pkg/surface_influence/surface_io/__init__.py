from .mesh_io import (
    MeshFormatError,
    SurfaceBundle,
    read_subcomplex,
    read_surface,
    write_subcomplex,
    write_surface,
)
from .report_io import (
    DocumentError,
    flow_from_spec,
    flow_to_spec,
    read_json,
    report_document,
    sweep_document,
    write_json,
)

__all__ = [
    "MeshFormatError",
    "SurfaceBundle",
    "read_subcomplex",
    "read_surface",
    "write_subcomplex",
    "write_surface",
    "DocumentError",
    "flow_from_spec",
    "flow_to_spec",
    "read_json",
    "report_document",
    "sweep_document",
    "write_json",
]
