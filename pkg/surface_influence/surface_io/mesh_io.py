"""
Mesh and subcomplex files.

A surface is stored as an OFF file (vertex positions in the chart of their
first triangle, the chart index as third coordinate) plus a sidecar holding
the chart and corner coordinates of every triangle, which is what the atlas
is rebuilt from. Subcomplexes are plain text lists of simplices.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np

from surface_influence.core.logging_config import get_logger
from surface_influence.core.mesh import SimplicialComplex2D, Subcomplex, TriangulatedSurface

logger = get_logger("surface_io.mesh")

SIDECAR_HEADER = "# surface-influence sidecar 1"
SUBCOMPLEX_HEADER = "# surface-influence subcomplex 1"

PathLike = Union[str, Path]


class MeshFormatError(ValueError):
    """Raised for malformed mesh, sidecar or subcomplex files."""

    pass


def _data_lines(path: Path) -> List[str]:
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")
    lines = []
    for raw in path.read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append(line)
    return lines


def write_off(surface: SimplicialComplex2D, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    first_tri = np.array([int(ts[0]) for ts in surface.vertex_triangles], dtype=np.int64)
    lines = ["OFF", f"{surface.n_vertices} {surface.n_triangles} {surface.n_edges}"]
    for v, t in enumerate(first_tri):
        k = int(np.nonzero(surface.triangles[t] == v)[0][0])
        x, y = surface.corner_coords[t, k]
        lines.append(f"{x:.17g} {y:.17g} {int(surface.chart_of_triangle[t])}")
    for a, b, c in surface.triangles:
        lines.append(f"3 {a} {b} {c}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_off(path: PathLike) -> Dict[str, np.ndarray]:
    """Vertex rows and triangles of an OFF file.

    Raises:
        MeshFormatError: If the header or a face line is malformed
    """
    path = Path(path)
    lines = _data_lines(path)
    if not lines or lines[0] != "OFF":
        raise MeshFormatError(f"{path}: missing OFF header")
    try:
        n_vertices, n_faces = (int(x) for x in lines[1].split()[:2])
        vertices = np.array([[float(x) for x in line.split()[:3]] for line in lines[2 : 2 + n_vertices]])
        faces = []
        for line in lines[2 + n_vertices : 2 + n_vertices + n_faces]:
            parts = [int(x) for x in line.split()]
            if parts[0] != 3 or len(parts) < 4:
                raise MeshFormatError(f"{path}: only triangular faces are supported")
            faces.append(parts[1:4])
    except (IndexError, ValueError) as exc:
        if isinstance(exc, MeshFormatError):
            raise
        raise MeshFormatError(f"{path}: {exc}") from exc
    if len(vertices) != n_vertices or len(faces) != n_faces:
        raise MeshFormatError(f"{path}: expected {n_vertices} vertices and {n_faces} faces")
    return {"vertices": vertices.reshape(-1, 3), "triangles": np.asarray(faces, dtype=np.int64).reshape(-1, 3)}


def write_sidecar(surface: SimplicialComplex2D, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [
        SIDECAR_HEADER,
        f"name {getattr(surface, 'name', 'surface')}",
        f"level {getattr(surface, 'level', 0)}",
        f"triangles {surface.n_triangles}",
    ]
    for t in range(surface.n_triangles):
        coords = " ".join(f"{x:.17g}" for x in surface.corner_coords[t].ravel())
        lines.append(f"{t} {int(surface.chart_of_triangle[t])} {coords}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_surface(off_path: PathLike, sidecar_path: Optional[PathLike] = None) -> TriangulatedSurface:
    """Load a surface written by ``write_surface``.

    Without a sidecar every triangle is drawn in one chart from the OFF
    vertex positions.

    Raises:
        MeshFormatError: If the files disagree
        MeshError: If the triangles do not form a closed oriented surface
    """
    off = read_off(off_path)
    triangles = off["triangles"]
    n_vertices = len(off["vertices"])
    name, level = Path(off_path).stem, 0
    if sidecar_path is None:
        charts = np.zeros(len(triangles), dtype=np.int64)
        corners = off["vertices"][:, :2][triangles]
    else:
        sidecar = Path(sidecar_path)
        if not sidecar.exists():
            raise FileNotFoundError(f"File not found: {sidecar}")
        if not sidecar.read_text(encoding="utf-8").startswith(SIDECAR_HEADER):
            raise MeshFormatError(f"{sidecar}: missing sidecar header")
        rows = _data_lines(sidecar)
        header = dict(line.split(" ", 1) for line in rows[:3])
        name, level = header.get("name", name), int(header.get("level", 0))
        count = int(header.get("triangles", -1))
        if count != len(triangles):
            raise MeshFormatError(f"{sidecar_path}: {count} triangles, OFF file has {len(triangles)}")
        charts = np.zeros(count, dtype=np.int64)
        corners = np.zeros((count, 3, 2))
        for line in rows[3:]:
            parts = line.split()
            if len(parts) != 8:
                raise MeshFormatError(f"{sidecar_path}: malformed triangle line {line!r}")
            t = int(parts[0])
            charts[t] = int(parts[1])
            corners[t] = np.array([float(x) for x in parts[2:]]).reshape(3, 2)
    surface = TriangulatedSurface(triangles, n_vertices, charts, corners, name=name, level=level)
    logger.debug(f"Loaded {name}: {surface.n_vertices} vertices, {surface.n_triangles} triangles")
    return surface


def write_subcomplex(S: Subcomplex, path: PathLike) -> Path:
    """Write triangles, edges (as vertex pairs) and vertices of S."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    M = S.parent
    lines = [SUBCOMPLEX_HEADER]
    lines.extend(f"t {int(t)}" for t in S.cells)
    lines.extend(f"e {int(M.edges[e][0])} {int(M.edges[e][1])}" for e in S.edge_ids)
    lines.extend(f"v {int(v)}" for v in S.vertex_ids)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_subcomplex(path: PathLike, parent: SimplicialComplex2D) -> Subcomplex:
    """Read a subcomplex of ``parent``; the result is closed under faces.

    Raises:
        MeshFormatError: If a line names a simplex that ``parent`` lacks
    """
    path = Path(path)
    triangles = np.zeros(parent.n_triangles, dtype=bool)
    edges = np.zeros(parent.n_edges, dtype=bool)
    vertices = np.zeros(parent.n_vertices, dtype=bool)
    for line in _data_lines(path):
        kind, *values = line.split()
        try:
            ids = [int(x) for x in values]
            if kind == "t":
                triangles[ids[0]] = True
            elif kind == "e":
                edges[parent.edge_id(ids[0], ids[1])] = True
            elif kind == "v":
                vertices[ids[0]] = True
            else:
                raise MeshFormatError(f"{path}: unknown simplex kind {kind!r}")
        except (IndexError, KeyError, ValueError) as exc:
            if isinstance(exc, MeshFormatError):
                raise
            raise MeshFormatError(f"{path}: invalid simplex line {line!r}") from exc
    return Subcomplex(parent, vertices, edges, triangles)


@dataclass
class SurfaceBundle:
    """File names written by ``generate`` inside one output directory."""

    directory: Path
    surface_name: str = "surface.off"
    sidecar_name: str = "surface.sidecar"
    flow_name: str = "flow.json"
    core_name: str = "core.sub"

    @property
    def surface_path(self) -> Path:
        return self.directory / self.surface_name

    @property
    def sidecar_path(self) -> Path:
        return self.directory / self.sidecar_name

    @property
    def flow_path(self) -> Path:
        return self.directory / self.flow_name

    @property
    def core_path(self) -> Path:
        return self.directory / self.core_name

    @property
    def paths(self) -> List[Path]:
        return [self.surface_path, self.sidecar_path, self.flow_path, self.core_path]


def write_surface(surface: SimplicialComplex2D, off_path: PathLike, sidecar_path: PathLike) -> None:
    write_off(surface, off_path)
    write_sidecar(surface, sidecar_path)
