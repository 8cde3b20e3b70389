"""
Integer and ℤ₂ linear algebra, simplicial cohomology and inclusion maps.

ℤ₂ computations run on Python integers used as bitsets. A spanning forest of
the 1-skeleton and a spanning forest of the dual graph (tree-cotree) order the
edge coordinates so that almost every triangle boundary is already an
echelon row, which keeps the elimination close to linear in the mesh size.
ℤ computations reduce the chain complex along unit pivots and finish with an
exact Smith normal form over Python integers.
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from .logging_config import get_logger
from .mesh import SimplicialComplex2D, Subcomplex

logger = get_logger("algebra")

SparseColumn = Dict[int, int]


class AlgebraError(ValueError):
    """Raised for invalid algebraic input."""

    pass


class ContractViolation(AlgebraError):
    """Raised when boundary matrices do not compose to zero."""

    pass


class Coefficients(Enum):
    """Coefficient systems."""

    Z = "z"
    Z2 = "z2"


# ---------------------------------------------------------------------------
# Smith normal form
# ---------------------------------------------------------------------------


def _identity(n: int) -> np.ndarray:
    eye = np.zeros((n, n), dtype=object)
    for i in range(n):
        eye[i, i] = 1
    return eye


def smith_normal_form(A) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Smith normal form ``D = U @ A @ V`` with exact integer arithmetic.

    U and V are unimodular, D is diagonal with non-negative entries and
    d1 | d2 | ... along the diagonal.

    Returns:
        Tuple (U, D, V) of numpy object arrays holding Python ints
    """
    D = np.array(A, dtype=object)
    if D.ndim != 2:
        D = D.reshape(-1, 1) if D.size else np.zeros((0, 0), dtype=object)
    D = np.vectorize(int, otypes=[object])(D) if D.size else D.astype(object)
    m, n = D.shape
    U, V = _identity(m), _identity(n)

    for t in range(min(m, n)):
        while True:
            entries = [
                (abs(D[i, j]), i, j)
                for i in range(t, m)
                for j in range(t, n)
                if D[i, j] != 0
            ]
            if not entries:
                return U, D, V
            _, i, j = min(entries)
            if i != t:
                D[[t, i], :] = D[[i, t], :]
                U[[t, i], :] = U[[i, t], :]
            if j != t:
                D[:, [t, j]] = D[:, [j, t]]
                V[:, [t, j]] = V[:, [j, t]]

            clean = True
            for r in range(t + 1, m):
                q = D[r, t] // D[t, t]
                if q:
                    D[r, :] = D[r, :] - q * D[t, :]
                    U[r, :] = U[r, :] - q * U[t, :]
                if D[r, t] != 0:
                    clean = False
            for c in range(t + 1, n):
                q = D[t, c] // D[t, t]
                if q:
                    D[:, c] = D[:, c] - q * D[:, t]
                    V[:, c] = V[:, c] - q * V[:, t]
                if D[t, c] != 0:
                    clean = False
            if not clean:
                continue

            offender = next(
                (
                    r
                    for r in range(t + 1, m)
                    for c in range(t + 1, n)
                    if D[r, c] % D[t, t] != 0
                ),
                None,
            )
            if offender is None:
                break
            D[t, :] = D[t, :] + D[offender, :]
            U[t, :] = U[t, :] + U[offender, :]

        if D[t, t] < 0:
            D[t, :] = -D[t, :]
            U[t, :] = -U[t, :]
    return U, D, V


def snf_diagonal(A) -> List[int]:
    """Non-zero invariant factors of A."""
    _, D, _ = smith_normal_form(A)
    return [int(D[i, i]) for i in range(min(D.shape)) if D[i, i] != 0]


def determinant(A) -> int:
    """Exact determinant of a square integer matrix (Bareiss elimination)."""
    M = [[int(x) for x in row] for row in np.array(A, dtype=object)]
    n = len(M)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if M[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if M[r][k] != 0), None)
            if swap is None:
                return 0
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


# ---------------------------------------------------------------------------
# Chain complexes
# ---------------------------------------------------------------------------


@dataclass
class ChainComplex:
    """Simplicial chain complex in degrees 0..2 with sparse boundaries.

    ``d1`` maps each edge to ``{vertex: coefficient}`` and ``d2`` each
    triangle to ``{edge: coefficient}``, all indices local. Complexes built
    from a mesh also keep the simplicial structure used by the ℤ₂ engine.
    """

    sizes: Tuple[int, int, int]
    d1: Dict[int, SparseColumn]
    d2: Dict[int, SparseColumn]
    parent: Optional[SimplicialComplex2D] = None
    vertex_ids: Optional[np.ndarray] = None
    edge_ids: Optional[np.ndarray] = None
    triangle_ids: Optional[np.ndarray] = None
    edge_vertices: Optional[np.ndarray] = None
    triangle_edges: Optional[np.ndarray] = None
    triangle_signs: Optional[np.ndarray] = None

    @property
    def is_simplicial(self) -> bool:
        return self.edge_vertices is not None

    @classmethod
    def from_subcomplex(cls, S: Subcomplex) -> "ChainComplex":
        p = S.parent
        vertex_ids, edge_ids, triangle_ids = S.vertex_ids, S.edge_ids, S.cells
        local_vertex = -np.ones(p.n_vertices, dtype=np.int64)
        local_vertex[vertex_ids] = np.arange(len(vertex_ids))
        local_edge = -np.ones(p.n_edges, dtype=np.int64)
        local_edge[edge_ids] = np.arange(len(edge_ids))

        edge_vertices = local_vertex[p.edges[edge_ids]]
        tri_edges = local_edge[p.triangle_edges[triangle_ids]]
        tris = p.triangles[triangle_ids]
        # edge k of (a, b, c) runs t[k] -> t[k+1]; +1 when that matches low -> high
        signs = np.where(tris < np.roll(tris, -1, axis=1), 1, -1).astype(np.int64)

        d1 = {e: {int(u): -1, int(v): 1} for e, (u, v) in enumerate(edge_vertices)}
        d2: Dict[int, SparseColumn] = {}
        for t in range(len(triangle_ids)):
            d2[t] = {int(tri_edges[t, k]): int(signs[t, k]) for k in range(3)}
        return cls(
            sizes=(len(vertex_ids), len(edge_ids), len(triangle_ids)),
            d1=d1,
            d2=d2,
            parent=p,
            vertex_ids=vertex_ids,
            edge_ids=edge_ids,
            triangle_ids=triangle_ids,
            edge_vertices=edge_vertices,
            triangle_edges=tri_edges,
            triangle_signs=signs,
        )

    @classmethod
    def from_complex(cls, parent: SimplicialComplex2D) -> "ChainComplex":
        return cls.from_subcomplex(Subcomplex.full(parent))

    @classmethod
    def from_matrices(cls, d1: np.ndarray, d2: np.ndarray) -> "ChainComplex":
        """Chain complex from dense boundary matrices (rows = faces)."""
        d1 = np.asarray(d1, dtype=object)
        d2 = np.asarray(d2, dtype=object)
        n0, n1 = d1.shape
        if d2.shape[0] != n1:
            raise ContractViolation(
                f"∂2 has {d2.shape[0]} rows but there are {n1} edges"
            )
        n2 = d2.shape[1]
        cols1 = {j: {i: int(d1[i, j]) for i in range(n0) if d1[i, j] != 0} for j in range(n1)}
        cols2 = {j: {i: int(d2[i, j]) for i in range(n1) if d2[i, j] != 0} for j in range(n2)}
        return cls(sizes=(n0, n1, n2), d1=cols1, d2=cols2)

    def boundary_matrix(self, k: int) -> np.ndarray:
        """Dense ∂k with exact entries; k in {1, 2}."""
        if k not in (1, 2):
            raise AlgebraError(f"No boundary map in degree {k}")
        rows, cols = self.sizes[k - 1], self.sizes[k]
        columns = self.d1 if k == 1 else self.d2
        M = np.zeros((rows, cols), dtype=object)
        for j, column in columns.items():
            for i, value in column.items():
                M[i, j] = value
        return M

    def validate(self) -> None:
        """Check ∂1 ∘ ∂2 = 0.

        Raises:
            ContractViolation: If the composition is non-zero
        """
        for t, column in self.d2.items():
            total: Dict[int, int] = {}
            for e, a in column.items():
                for v, b in self.d1.get(e, {}).items():
                    total[v] = total.get(v, 0) + a * b
            if any(total.values()):
                raise ContractViolation(f"∂1∘∂2 is non-zero on 2-cell {t}")


def _as_subcomplex(obj: Union[SimplicialComplex2D, Subcomplex]) -> Subcomplex:
    if isinstance(obj, Subcomplex):
        return obj
    return Subcomplex.full(obj)


# ---------------------------------------------------------------------------
# ℤ₂ engine
# ---------------------------------------------------------------------------


class _Z2Echelon:
    """Row echelon form over ℤ₂ on int bitsets; pivot = highest set bit."""

    def __init__(self):
        self.rows: Dict[int, Tuple[int, int]] = {}

    def reduce(self, vec: int, tag: int = 0) -> Tuple[int, int]:
        while vec:
            entry = self.rows.get(vec.bit_length() - 1)
            if entry is None:
                break
            vec ^= entry[0]
            tag ^= entry[1]
        return vec, tag

    def reduce_fully(self, vec: int) -> int:
        """Canonical representative of vec modulo the row space."""
        result = 0
        while vec:
            top = vec.bit_length() - 1
            entry = self.rows.get(top)
            if entry is None:
                result |= 1 << top
                vec ^= 1 << top
            else:
                vec ^= entry[0]
        return result

    def insert(self, vec: int, tag: int = 0) -> Tuple[bool, int]:
        vec, tag = self.reduce(vec, tag)
        if vec:
            self.rows[vec.bit_length() - 1] = (vec, tag)
            return True, tag
        return False, tag

    @property
    def rank(self) -> int:
        return len(self.rows)


def z2_rank(matrix) -> int:
    """Rank over ℤ₂ of an integer matrix."""
    M = np.asarray(matrix, dtype=object)
    if M.size == 0:
        return 0
    echelon = _Z2Echelon()
    for row in M:
        bits = 0
        for j, value in enumerate(row):
            if int(value) % 2:
                bits |= 1 << j
        echelon.insert(bits)
    return echelon.rank


def rational_rank(matrix) -> int:
    """Rank over ℚ of an integer matrix."""
    M = np.asarray(matrix, dtype=object)
    if M.size == 0:
        return 0
    return len(snf_diagonal(M))


class _SpanningData:
    """Primal spanning forest and dual (cotree) forest of a simplicial chain."""

    def __init__(self, chain: ChainComplex):
        n_v, n_e, n_f = chain.sizes
        ev = chain.edge_vertices

        graph = nx.Graph()
        graph.add_nodes_from(range(n_v))
        for e, (u, v) in enumerate(ev):
            graph.add_edge(int(u), int(v), index=e)
        self.tree = np.zeros(n_e, dtype=bool)
        self.parent = -np.ones(n_v, dtype=np.int64)
        self.parent_edge = -np.ones(n_v, dtype=np.int64)
        self.depth = np.zeros(n_v, dtype=np.int64)
        self.components = sorted(
            (sorted(c) for c in nx.connected_components(graph)), key=lambda c: c[0]
        )
        for comp in self.components:
            for a, b in nx.bfs_edges(graph, comp[0]):
                e = graph[a][b]["index"]
                self.tree[e] = True
                self.parent[b] = a
                self.parent_edge[b] = e
                self.depth[b] = self.depth[a] + 1

        incident: List[List[int]] = [[] for _ in range(n_e)]
        for t in range(n_f):
            for e in chain.triangle_edges[t]:
                incident[int(e)].append(t)
        dual = nx.Graph()
        dual.add_nodes_from(range(n_f))
        for e in range(n_e):
            if not self.tree[e] and len(incident[e]) == 2:
                dual.add_edge(incident[e][0], incident[e][1], index=e)
        child_depth: Dict[int, int] = {}
        tri_depth = np.zeros(n_f, dtype=np.int64)
        self.dual_roots: List[int] = []
        for comp in sorted(nx.connected_components(dual), key=min):
            root = min(comp)
            self.dual_roots.append(root)
            for a, b in nx.bfs_edges(dual, root):
                tri_depth[b] = tri_depth[a] + 1
                child_depth[dual[a][b]["index"]] = int(tri_depth[b])

        leftover = [e for e in range(n_e) if not self.tree[e] and e not in child_depth]
        self.coord = -np.ones(n_e, dtype=np.int64)
        for i, e in enumerate(leftover):
            self.coord[e] = i
        # deeper cotree edges get lower bits so each row's pivot is its parent edge
        for j, e in enumerate(sorted(child_depth, key=lambda e: (-child_depth[e], e))):
            self.coord[e] = len(leftover) + j
        self.edge_of_coord = np.empty(int(np.sum(self.coord >= 0)), dtype=np.int64)
        self.edge_of_coord[self.coord[self.coord >= 0]] = np.nonzero(self.coord >= 0)[0]
        roots = set(self.dual_roots)
        self.row_order = [t for t in range(n_f) if t not in roots] + self.dual_roots
        self.n_coords = len(self.edge_of_coord)

    def fundamental_cycle(self, chain: ChainComplex, e: int) -> Dict[int, int]:
        """Signed cycle made of edge e (low -> high) and the tree path back."""
        u, v = (int(x) for x in chain.edge_vertices[e])
        cycle = {e: 1}
        a, b = v, u
        up_a, up_b = [], []
        while a != b:
            if self.depth[a] >= self.depth[b]:
                up_a.append((a, int(self.parent[a]), int(self.parent_edge[a])))
                a = int(self.parent[a])
            else:
                up_b.append((b, int(self.parent[b]), int(self.parent_edge[b])))
                b = int(self.parent[b])
        steps = up_a + [(to, frm, edge) for frm, to, edge in reversed(up_b)]
        for frm, to, edge in steps:
            cycle[edge] = cycle.get(edge, 0) + (1 if frm < to else -1)
        return {k: c for k, c in cycle.items() if c}


class _Z2Homology:
    """ℤ₂ homology of a simplicial chain complex in degrees 0..2."""

    def __init__(self, chain: ChainComplex):
        self.chain = chain
        self.span = _SpanningData(chain)
        coord = self.span.coord
        self.echelon = _Z2Echelon()
        cycles2 = _Z2Echelon()
        for t in self.span.row_order:
            bits = 0
            for e in chain.triangle_edges[t]:
                c = coord[int(e)]
                if c >= 0:
                    bits ^= 1 << int(c)
            added, tag = self.echelon.insert(bits, 1 << t)
            if not added:
                cycles2.insert(tag)
        pivots = set(self.echelon.rows)
        self.free = [c for c in range(self.span.n_coords) if c not in pivots]
        self.free_position = {c: i for i, c in enumerate(self.free)}

        # fully reduced 2-cycle basis; pivot triangles carry the dual cocycles
        self.cycles2: List[int] = []
        self.pivots2: List[int] = []
        for pivot in sorted(cycles2.rows):
            row = cycles2.rows[pivot][0]
            rest = _reduce_below(cycles2, row ^ (1 << pivot))
            self.cycles2.append((1 << pivot) | rest)
            self.pivots2.append(pivot)

    @property
    def betti(self) -> Tuple[int, int, int]:
        return (len(self.span.components), len(self.free), len(self.cycles2))

    def coordinates1(self, edges: Dict[int, int]) -> int:
        """H₁ coordinates (bitset over free positions) of a 1-cycle."""
        bits = 0
        for e, c in edges.items():
            if c % 2:
                k = self.span.coord[e]
                if k >= 0:
                    bits ^= 1 << int(k)
        reduced = self.echelon.reduce_fully(bits)
        result = 0
        while reduced:
            top = reduced.bit_length() - 1
            result |= 1 << self.free_position[top]
            reduced ^= 1 << top
        return result

    def basis_cycles1(self) -> List[Dict[int, int]]:
        return [
            self.span.fundamental_cycle(self.chain, int(self.span.edge_of_coord[c]))
            for c in self.free
        ]

    def cocycles1(self) -> List[np.ndarray]:
        """Cocycles dual to ``basis_cycles1``, as 0/1 arrays over local edges."""
        n_e = self.chain.sizes[1]
        values = np.zeros((len(self.free), n_e), dtype=np.int64)
        for e in range(n_e):
            if self.span.coord[e] < 0:
                continue
            coords = self.coordinates1({e: 1})
            for i in range(len(self.free)):
                if (coords >> i) & 1:
                    values[i, e] = 1
        return list(values)


def _reduce_below(echelon: _Z2Echelon, vec: int) -> int:
    return echelon.reduce_fully(vec)


# ---------------------------------------------------------------------------
# ℚ engine for integral representatives
# ---------------------------------------------------------------------------


class _RationalEchelon:
    """Sparse row echelon form over ℚ; pivot = largest index."""

    def __init__(self):
        self.rows: Dict[int, Dict[int, Fraction]] = {}

    def reduce_fully(self, vec: Dict[int, Fraction]) -> Dict[int, Fraction]:
        vec = {k: Fraction(v) for k, v in vec.items() if v}
        result: Dict[int, Fraction] = {}
        while vec:
            top = max(vec)
            value = vec.pop(top)
            row = self.rows.get(top)
            if row is None:
                result[top] = value
                continue
            factor = value / row[top]
            for k, a in row.items():
                if k == top:
                    continue
                updated = vec.get(k, Fraction(0)) - factor * a
                if updated:
                    vec[k] = updated
                else:
                    vec.pop(k, None)
        return result

    def insert(self, vec: Dict[int, Fraction]) -> bool:
        vec = {k: Fraction(v) for k, v in vec.items() if v}
        while vec:
            top = max(vec)
            row = self.rows.get(top)
            if row is None:
                self.rows[top] = vec
                return True
            factor = vec[top] / row[top]
            for k, a in row.items():
                updated = vec.get(k, Fraction(0)) - factor * a
                if updated:
                    vec[k] = updated
                else:
                    vec.pop(k, None)
        return False


class _RationalHomology:
    """Degree-1 homology over ℚ with integral cycle representatives."""

    def __init__(self, chain: ChainComplex):
        self.chain = chain
        self.span = _SpanningData(chain)
        self.echelon = _RationalEchelon()
        for t in self.span.row_order:
            row: Dict[int, Fraction] = {}
            for e, s in zip(chain.triangle_edges[t], chain.triangle_signs[t]):
                c = int(self.span.coord[int(e)])
                if c >= 0:
                    row[c] = row.get(c, Fraction(0)) + int(s)
            self.echelon.insert(row)
        pivots = set(self.echelon.rows)
        self.free = [c for c in range(self.span.n_coords) if c not in pivots]
        self.free_position = {c: i for i, c in enumerate(self.free)}

    def coordinates1(self, edges: Dict[int, int]) -> List[Fraction]:
        vec: Dict[int, Fraction] = {}
        for e, c in edges.items():
            k = int(self.span.coord[e])
            if k >= 0 and c:
                vec[k] = vec.get(k, Fraction(0)) + c
        reduced = self.echelon.reduce_fully(vec)
        out = [Fraction(0)] * len(self.free)
        for k, value in reduced.items():
            out[self.free_position[k]] = value
        return out

    def basis_cycles1(self) -> List[Dict[int, int]]:
        return [
            self.span.fundamental_cycle(self.chain, int(self.span.edge_of_coord[c]))
            for c in self.free
        ]

    def cocycles1(self) -> List[np.ndarray]:
        """Integral cocycles, each a primitive multiple of the dual cocycle."""
        n_e = self.chain.sizes[1]
        table = [[Fraction(0)] * n_e for _ in self.free]
        for e in range(n_e):
            if self.span.coord[e] < 0:
                continue
            for i, value in enumerate(self.coordinates1({e: 1})):
                table[i][e] = value
        return [_primitive(row) for row in table]


def _primitive(values: Sequence[Fraction]) -> np.ndarray:
    denominators = [v.denominator for v in values if v]
    if not denominators:
        return np.zeros(len(values), dtype=object)
    lcm = reduce(lambda a, b: a * b // gcd(a, b), denominators, 1)
    ints = [int(v * lcm) for v in values]
    common = reduce(gcd, (abs(x) for x in ints if x), 0) or 1
    return np.array([x // common for x in ints], dtype=object)


# ---------------------------------------------------------------------------
# ℤ homology by unit-pivot reduction
# ---------------------------------------------------------------------------


def _integer_homology(chain: ChainComplex) -> Tuple[List[int], List[List[int]]]:
    """Betti numbers and torsion of H₀..H₂ over ℤ."""
    cols = {1: {j: dict(c) for j, c in chain.d1.items()}, 2: {j: dict(c) for j, c in chain.d2.items()}}
    cells = {0: set(range(chain.sizes[0])), 1: set(range(chain.sizes[1])), 2: set(range(chain.sizes[2]))}
    rows: Dict[int, Dict[int, set]] = {1: {}, 2: {}}
    for k in (1, 2):
        for j, column in cols[k].items():
            for i in column:
                rows[k].setdefault(i, set()).add(j)

    def remove_pair(k: int, sigma: int, tau: int) -> None:
        pivot = cols[k][sigma][tau]
        for other in list(rows[k].get(tau, ())):
            if other == sigma:
                continue
            factor = cols[k][other][tau] * pivot  # pivot is ±1
            for face, value in cols[k][sigma].items():
                updated = cols[k][other].get(face, 0) - factor * value
                if updated:
                    cols[k][other][face] = updated
                    rows[k].setdefault(face, set()).add(other)
                else:
                    cols[k][other].pop(face, None)
                    rows[k].get(face, set()).discard(other)
        for face in cols[k][sigma]:
            rows[k].get(face, set()).discard(sigma)
        del cols[k][sigma]
        cells[k].discard(sigma)
        cells[k - 1].discard(tau)
        # sigma as a face of (k+1)-cells, tau as a (k-1)-chain
        if k + 1 in cols:
            for coface in rows[k + 1].pop(sigma, set()):
                cols[k + 1][coface].pop(sigma, None)
        if k - 1 >= 1:
            for face in cols[k - 1].pop(tau, {}):
                rows[k - 1].get(face, set()).discard(tau)

    for k in (2, 1):
        changed = True
        while changed:
            changed = False
            for sigma in sorted(cols[k]):
                column = cols[k].get(sigma)
                if not column:
                    continue
                units = [t for t, v in column.items() if abs(v) == 1]
                if not units:
                    continue
                tau = min(units, key=lambda t: (len(rows[k].get(t, ())), t))
                remove_pair(k, sigma, tau)
                changed = True

    index = {k: {c: i for i, c in enumerate(sorted(cells[k]))} for k in (0, 1, 2)}
    dense = {}
    for k in (1, 2):
        M = np.zeros((len(index[k - 1]), len(index[k])), dtype=object)
        for sigma, column in cols[k].items():
            for tau, value in column.items():
                M[index[k - 1][tau], index[k][sigma]] = value
        dense[k] = M
    factors = {k: snf_diagonal(dense[k]) if dense[k].size else [] for k in (1, 2)}
    ranks = {0: 0, 1: len(factors[1]), 2: len(factors[2]), 3: 0}
    betti = [len(index[k]) - ranks[k] - ranks[k + 1] for k in (0, 1, 2)]
    torsion = [
        [d for d in factors[k + 1] if d > 1] if k + 1 in factors else [] for k in (0, 1, 2)
    ]
    return betti, torsion


# ---------------------------------------------------------------------------
# Public API
# ---------------------------------------------------------------------------


@dataclass
class CohomologyResult:
    """Cohomology in degrees 0..2 over the chosen coefficients."""

    coeff: Coefficients
    betti: Tuple[int, int, int]
    torsion: Tuple[Tuple[int, ...], Tuple[int, ...], Tuple[int, ...]] = ((), (), ())
    cocycles: Optional[Dict[int, List[np.ndarray]]] = None

    @property
    def euler_characteristic(self) -> int:
        return self.betti[0] - self.betti[1] + self.betti[2]

    def as_dict(self) -> Dict:
        return {
            "coeff": self.coeff.value,
            "betti": list(self.betti),
            "torsion": [list(t) for t in self.torsion],
        }


def cohomology(
    complex_: Union[ChainComplex, SimplicialComplex2D, Subcomplex],
    coeff: Coefficients = Coefficients.Z2,
    representatives: bool = False,
) -> CohomologyResult:
    """Cohomology of a chain complex in degrees 0..2.

    Over ℤ the torsion of Hᵏ is the torsion of Hₖ₋₁ (universal coefficients).
    Representative cocycles are dual to the homology basis used by
    ``induced_map``; integral degree-1 representatives are primitive integer
    multiples of those duals.

    Raises:
        ContractViolation: If ∂1∘∂2 ≠ 0
    """
    chain = complex_ if isinstance(complex_, ChainComplex) else ChainComplex.from_subcomplex(
        _as_subcomplex(complex_)
    )
    chain.validate()
    coeff = Coefficients(coeff)

    if coeff is Coefficients.Z:
        betti, homology_torsion = _integer_homology(chain)
        torsion = ((), tuple(homology_torsion[0]), tuple(homology_torsion[1]))
        result = CohomologyResult(coeff, tuple(betti), torsion)
    elif chain.is_simplicial:
        result = CohomologyResult(coeff, _Z2Homology(chain).betti)
    else:
        r1 = z2_rank(chain.boundary_matrix(1)) if chain.sizes[1] else 0
        r2 = z2_rank(chain.boundary_matrix(2)) if chain.sizes[2] else 0
        n0, n1, n2 = chain.sizes
        result = CohomologyResult(coeff, (n0 - r1, n1 - r1 - r2, n2 - r2))

    if representatives:
        if not chain.is_simplicial:
            raise AlgebraError("Representatives need a simplicial chain complex")
        result.cocycles = _representatives(chain, coeff)
    logger.debug(f"Cohomology over {coeff.value}: betti={result.betti}")
    return result


def _representatives(chain: ChainComplex, coeff: Coefficients) -> Dict[int, List[np.ndarray]]:
    z2 = _Z2Homology(chain)
    degree0 = []
    for comp in z2.span.components:
        vec = np.zeros(chain.sizes[0], dtype=np.int64)
        vec[comp] = 1
        degree0.append(vec)
    degree2 = []
    for pivot in z2.pivots2:
        vec = np.zeros(chain.sizes[2], dtype=np.int64)
        vec[pivot] = 1
        degree2.append(vec)
    if coeff is Coefficients.Z:
        degree1 = _RationalHomology(chain).cocycles1()
    else:
        degree1 = z2.cocycles1()
    return {0: degree0, 1: degree1, 2: degree2}


@dataclass(frozen=True)
class InducedMap:
    """Matrix of i*: Hᵏ(X) → Hᵏ(Y) for Y ⊆ X.

    Columns follow the basis of Hᵏ(X), rows the basis of Hᵏ(Y) dual to the
    homology basis of Y.
    """

    matrix: np.ndarray
    coeff: Coefficients
    degree: int
    source_dim: int
    target_dim: int
    rank: int

    @property
    def kernel_rank(self) -> int:
        return self.source_dim - self.rank

    @property
    def image_rank(self) -> int:
        return self.rank

    @property
    def cokernel_rank(self) -> int:
        return self.target_dim - self.rank

    def is_monomorphism(self) -> bool:
        return self.kernel_rank == 0

    def is_isomorphism(self) -> bool:
        return self.kernel_rank == 0 and self.cokernel_rank == 0

    def compose(self, after: "InducedMap") -> "InducedMap":
        """Matrix of ``after ∘ self`` (restrict further along a smaller Y)."""
        product = after.matrix.dot(self.matrix) if self.matrix.size and after.matrix.size else np.zeros(
            (after.target_dim, self.source_dim), dtype=object
        )
        if self.coeff is Coefficients.Z2:
            product = np.vectorize(lambda x: int(x) % 2, otypes=[object])(product) if product.size else product
        rank = _matrix_rank(product, self.coeff)
        return InducedMap(product, self.coeff, self.degree, self.source_dim, after.target_dim, rank)

    def as_dict(self) -> Dict:
        return {
            "coeff": self.coeff.value,
            "degree": self.degree,
            "source_dim": self.source_dim,
            "target_dim": self.target_dim,
            "kernel_rank": self.kernel_rank,
            "image_rank": self.image_rank,
            "cokernel_rank": self.cokernel_rank,
            "matrix": [[str(x) for x in row] for row in self.matrix.tolist()],
        }


def _matrix_rank(matrix: np.ndarray, coeff: Coefficients) -> int:
    if matrix.size == 0:
        return 0
    if coeff is Coefficients.Z2:
        return z2_rank(matrix)
    scale = reduce(
        lambda a, b: a * b // gcd(a, b),
        (Fraction(x).denominator for x in matrix.ravel()),
        1,
    )
    return rational_rank(np.vectorize(lambda x: int(Fraction(x) * scale), otypes=[object])(matrix))


def induced_map(
    X: Union[SimplicialComplex2D, Subcomplex],
    Y: Subcomplex,
    coeff: Coefficients = Coefficients.Z2,
    degree: int = 1,
) -> InducedMap:
    """Map induced on cohomology by the inclusion Y ⊆ X.

    Entry (j, i) is the value of the i-th basis cocycle of X on the j-th
    basis cycle of Y. Over ℤ the entries are rational coordinates and ranks
    are free ranks.

    Raises:
        AlgebraError: If Y is not contained in X or the degree is not 0..2
    """
    coeff = Coefficients(coeff)
    if degree not in (0, 1, 2):
        raise AlgebraError(f"Degree must be 0, 1 or 2, got {degree}")
    Xs = _as_subcomplex(X)
    if Y.parent is not Xs.parent or not Xs.contains(Y):
        raise AlgebraError("Y must be a subcomplex of X")

    cx = ChainComplex.from_subcomplex(Xs)
    cy = ChainComplex.from_subcomplex(Y)
    hx, hy = _Z2Homology(cx), _Z2Homology(cy)

    if degree == 0:
        vertex_component = {}
        for i, comp in enumerate(hx.span.components):
            for v in comp:
                vertex_component[int(cx.vertex_ids[v])] = i
        rows = []
        for comp in hy.span.components:
            row = [0] * len(hx.span.components)
            row[vertex_component[int(cy.vertex_ids[comp[0]])]] = 1
            rows.append(row)
        source, target = len(hx.span.components), len(hy.span.components)
    elif degree == 2:
        local_x = {int(t): i for i, t in enumerate(cx.triangle_ids)}
        rows = []
        for cycle in hy.cycles2:
            support = {local_x[int(cy.triangle_ids[t])] for t in _bits(cycle)}
            rows.append([1 if p in support else 0 for p in hx.pivots2])
        source, target = len(hx.pivots2), len(hy.pivots2)
    else:
        local_x = {int(e): i for i, e in enumerate(cx.edge_ids)}
        if coeff is Coefficients.Z2:
            engine_x, cycles = hx, hy.basis_cycles1()
            source = len(hx.free)
        else:
            engine_x = _RationalHomology(cx)
            cycles = _RationalHomology(cy).basis_cycles1()
            source = len(engine_x.free)
        rows = []
        for cycle in cycles:
            mapped = {local_x[int(cy.edge_ids[e])]: c for e, c in cycle.items()}
            coords = engine_x.coordinates1(mapped)
            if coeff is Coefficients.Z2:
                rows.append([(coords >> i) & 1 for i in range(source)])
            else:
                rows.append([c if c.denominator != 1 else int(c) for c in coords])
        target = len(cycles)

    matrix = np.zeros((target, source), dtype=object)
    for j, row in enumerate(rows):
        for i, value in enumerate(row):
            matrix[j, i] = value
    rank = _matrix_rank(matrix, coeff)
    logger.debug(
        f"Induced map in degree {degree} over {coeff.value}: "
        f"{source} -> {target}, rank {rank}"
    )
    return InducedMap(matrix, coeff, degree, source, target, rank)


def _bits(value: int) -> List[int]:
    out = []
    while value:
        top = value.bit_length() - 1
        out.append(top)
        value ^= 1 << top
    return out


def is_monomorphism(im: InducedMap) -> bool:
    return im.is_monomorphism()


def is_isomorphism(im: InducedMap) -> bool:
    return im.is_isomorphism()


def kernel_rank(im: InducedMap) -> int:
    return im.kernel_rank


def image_rank(im: InducedMap) -> int:
    return im.image_rank


def cokernel_rank(im: InducedMap) -> int:
    return im.cokernel_rank
