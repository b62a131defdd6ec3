# This file is part of the affinform package.
#
# This program is free software: you can redistribute it and/or modify it under the
# terms of the Apache License (v2.0) as published by the Apache Software Foundation.
#
# This program is distributed in the hope that it will be useful, but WITHOUT ANY
# WARRANTY; without even the implied warranty of MERCHANTABILITY or FITNESS FOR A
# PARTICULAR PURPOSE. See the Apache License for more details.
#
# You should have received a copy of the Apache License along with this program.
# If not, see <https://www.apache.org/licenses/LICENSE-2.0>.

"""Complex-plane configurations, affine maps, interaction graphs and shape projectors."""

# standard libs
from numbers import Number
from typing import Dict, Iterable, Iterator, List, Sequence, Tuple, Union

# external libs
import numpy as np
from scipy import linalg
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

# internal libs
from ..core.exceptions import GraphError, DegenerateShapeError


# singular-value threshold (relative to the largest) for rank decisions
RANK_TOL = 1e-9

Edge = Tuple[int, int]
ConfigurationLike = Union[np.ndarray, Sequence[complex]]


def _frozen(array: np.ndarray) -> np.ndarray:
    """Read-only view so shared instances stay immutable."""
    array = np.array(array)
    array.setflags(write=False)
    return array


def as_configuration(x: ConfigurationLike, n: int = None) -> np.ndarray:
    """Coerce `x` to a length-n complex vector with finite entries.

       Parameters
       ----------
       x: array-like
           Complex positions (real part = x, imaginary part = y).
       n: int (default=None)
           Expected number of agents; not checked when None.

       Returns
       -------
       p: np.ndarray
           One-dimensional complex array.
    """
    p = np.asarray(x, dtype=complex)
    if p.ndim != 1:
        raise ValueError(f'configuration must be one-dimensional, given shape {p.shape}')
    if n is not None and p.size != n:
        raise ValueError(f'configuration expects {n} agents, given {p.size}')
    if not np.all(np.isfinite(p)):
        raise ValueError('configuration has non-finite entries')
    return p


class Graph:
    """Undirected interaction graph with one declared direction per edge.

       Nodes are 0-based internally. Edges are kept in the declared order and every
       matrix built from a graph is a deterministic function of that order.
    """

    def __init__(self, node_count: int, edges: Iterable[Edge]) -> None:
        """Initialize attributes."""
        self.node_count = node_count
        self.edges = edges

    @classmethod
    def from_one_based(cls, node_count: int, edges: Iterable[Edge]) -> 'Graph':
        """Build from 1-based (tail, head) pairs as written in scenario files."""
        return cls(node_count, [(int(i) - 1, int(j) - 1) for i, j in edges])

    @classmethod
    def complete(cls, node_count: int) -> 'Graph':
        """Complete graph with edges (i, j), i < j, in lexicographic order."""
        return cls(node_count, [(i, j) for i in range(node_count) for j in range(i + 1, node_count)])

    @property
    def node_count(self) -> int:
        """Number of agents n."""
        return self.__node_count

    @node_count.setter
    def node_count(self, val: int) -> None:
        if not isinstance(val, (int, np.integer)) or isinstance(val, bool) or val < 1:
            raise TypeError(f'{self.__class__.__name__}.node_count expects a positive integer, '
                            f'given {val}.')
        self.__node_count = int(val)

    @property
    def edges(self) -> Tuple[Edge, ...]:
        """Ordered (tail, head) pairs."""
        return self.__edges

    @edges.setter
    def edges(self, val: Iterable[Edge]) -> None:
        n = self.node_count
        edges, seen = [], {}
        for pair in val:
            try:
                i, j = (int(v) for v in pair)
            except (TypeError, ValueError):
                raise TypeError(f'{self.__class__.__name__}.edges expects (tail, head) pairs, '
                                f'given {pair}.') from None
            if not (0 <= i < n and 0 <= j < n):
                raise GraphError(f'edge ({i + 1}, {j + 1}) references a node outside 1..{n}')
            if i == j:
                raise GraphError(f'self-loop on node {i + 1}')
            key = (min(i, j), max(i, j))
            if key in seen:
                raise GraphError(f'duplicate edge between nodes {key[0] + 1} and {key[1] + 1}')
            seen[key] = len(edges)
            edges.append((i, j))
        if n > 1 and not edges:
            raise GraphError('graph has no edges')
        if n > 1:
            rows = [i for i, _ in edges] + [j for _, j in edges]
            cols = [j for _, j in edges] + [i for i, _ in edges]
            adjacency = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
            count, _ = connected_components(adjacency, directed=False)
            if count != 1:
                raise GraphError(f'graph is not connected ({count} components)')
        self.__edges = tuple(edges)
        self.__index = seen
        self.__neighbors = [sorted({j for a, b in edges for j in (a, b) if i in (a, b) and j != i})
                            for i in range(n)]

    @property
    def edge_count(self) -> int:
        """Number of declared edges |Z|."""
        return len(self.__edges)

    def neighbors(self, i: int) -> List[int]:
        """Sorted neighbor indices of node `i`."""
        return list(self.__neighbors[i])

    def has_edge(self, i: int, j: int) -> bool:
        """True if {i, j} is an edge (either direction)."""
        return (min(i, j), max(i, j)) in self.__index

    def edge_index(self, i: int, j: int) -> int:
        """Column of the incidence matrix for the pair {i, j}."""
        try:
            return self.__index[(min(i, j), max(i, j))]
        except KeyError:
            raise GraphError(f'no edge between nodes {i + 1} and {j + 1}') from None

    def is_complete(self) -> bool:
        """True if every pair of nodes is adjacent."""
        n = self.node_count
        return self.edge_count == n * (n - 1) // 2

    def to_one_based(self) -> List[List[int]]:
        """Edges as 1-based lists (for serialization)."""
        return [[i + 1, j + 1] for i, j in self.edges]

    def __eq__(self, other: 'Graph') -> bool:
        return isinstance(other, Graph) and (self.node_count, self.edges) == (other.node_count, other.edges)

    def __str__(self) -> str:
        return f'<Graph n={self.node_count} edges={self.edge_count}>'

    def __repr__(self) -> str:
        return str(self)


def _phi(p: np.ndarray) -> np.ndarray:
    """Real n×3 matrix with columns 1, Re(p), Im(p)."""
    return np.column_stack([np.ones(p.size), p.real, p.imag])


def _rank(matrix: np.ndarray, tol: float = RANK_TOL) -> int:
    values = linalg.svdvals(matrix)
    if values.size == 0 or values[0] == 0:
        return 0
    return int(np.sum(values > tol * values[0]))


class ReferenceShape:
    """Centered reference shape p* in the body frame.

       The input is re-centered to zero mean; the applied shift is kept in `shift`.
       Raises DegenerateShapeError if 1, Re(p*), Im(p*) are linearly dependent.
    """

    def __init__(self, positions: ConfigurationLike) -> None:
        """Initialize attributes."""
        p = as_configuration(positions)
        shift = complex(p.mean())
        centered = p - shift
        if p.size < 3 or _rank(_phi(centered)) < 3:
            raise DegenerateShapeError('reference shape is degenerate: 1, Re(p*) and Im(p*) '
                                       'are not linearly independent')
        self.__p_star = _frozen(centered)
        self.__shift = shift

    @property
    def p_star(self) -> np.ndarray:
        """Centered positions."""
        return self.__p_star

    @property
    def shift(self) -> complex:
        """Mean subtracted from the input positions."""
        return self.__shift

    @property
    def node_count(self) -> int:
        return self.__p_star.size

    def __str__(self) -> str:
        return f'<ReferenceShape n={self.node_count} shift={self.shift}>'

    def __repr__(self) -> str:
        return str(self)


class AffineCoords:
    """Six real affine coordinates [dx, dy, dax, day, dhx, dhy].

       As a shape these parameterize T(p*) = c1·1 + c2·Re(p*) + c3·Im(p*) with
       c1 = dx + i·dy, c2 = dax + i·dhy, c3 = dhx + i·day. As a motion the same six
       numbers are read as [vx, vy, vax, vay, vhx, vhy].
    """

    FIELDS = ('dx', 'dy', 'dax', 'day', 'dhx', 'dhy')
    MOTIONS = ('vx', 'vy', 'vax', 'vay', 'vhx', 'vhy')
    __slots__ = ('_AffineCoords__values', )

    def __init__(self, dx: float = 0.0, dy: float = 0.0, dax: float = 0.0,
                 day: float = 0.0, dhx: float = 0.0, dhy: float = 0.0) -> None:
        """Initialize attributes."""
        values = (dx, dy, dax, day, dhx, dhy)
        for name, value in zip(self.FIELDS, values):
            if not isinstance(value, Number) or isinstance(value, complex):
                raise TypeError(f'{self.__class__.__name__}.{name} expects a real number, given {value}.')
            if not np.isfinite(value):
                raise ValueError(f'{self.__class__.__name__}.{name} must be finite, given {value}.')
        self.__values = tuple(float(v) for v in values)

    @classmethod
    def from_array(cls, values: Sequence[float]) -> 'AffineCoords':
        """Build from a length-6 sequence."""
        values = list(values)
        if len(values) != 6:
            raise ValueError(f'{cls.__name__} expects six values, given {len(values)}')
        return cls(*(float(v) for v in values))

    @classmethod
    def identity(cls) -> 'AffineCoords':
        """The identity transform (c2 = 1, c3 = i)."""
        return cls(dax=1.0, day=1.0)

    @classmethod
    def unit(cls, name: str) -> 'AffineCoords':
        """Unit coordinate named by `FIELDS` or `MOTIONS` (e.g., 'vhx')."""
        names = cls.FIELDS if name in cls.FIELDS else cls.MOTIONS
        if name not in names:
            raise ValueError(f'{cls.__name__}.unit: unknown coordinate "{name}"')
        values = [0.0] * 6
        values[names.index(name)] = 1.0
        return cls(*values)

    @classmethod
    def rotation(cls, omega: float) -> 'AffineCoords':
        """Rigid rotation at angular rate `omega` (vhy - vhx direction)."""
        return cls(dhx=-omega, dhy=omega)

    @classmethod
    def cross_shear(cls, rate: float) -> 'AffineCoords':
        """Combined shear (vhy + vhx direction)."""
        return cls(dhx=rate, dhy=rate)

    dx = property(lambda self: self.__values[0])
    dy = property(lambda self: self.__values[1])
    dax = property(lambda self: self.__values[2])
    day = property(lambda self: self.__values[3])
    dhx = property(lambda self: self.__values[4])
    dhy = property(lambda self: self.__values[5])

    @property
    def c1(self) -> complex:
        return complex(self.dx, self.dy)

    @property
    def c2(self) -> complex:
        return complex(self.dax, self.dhy)

    @property
    def c3(self) -> complex:
        return complex(self.dhx, self.day)

    def to_array(self) -> np.ndarray:
        return np.array(self.__values)

    def to_dict(self, motion: bool = False) -> Dict[str, float]:
        names = self.MOTIONS if motion else self.FIELDS
        return dict(zip(names, self.__values))

    def is_zero(self) -> bool:
        return not any(self.__values)

    def __iter__(self) -> Iterator[float]:
        return iter(self.__values)

    def __add__(self, other: 'AffineCoords') -> 'AffineCoords':
        if not isinstance(other, AffineCoords):
            return NotImplemented
        return AffineCoords(*(a + b for a, b in zip(self, other)))

    def __sub__(self, other: 'AffineCoords') -> 'AffineCoords':
        if not isinstance(other, AffineCoords):
            return NotImplemented
        return AffineCoords(*(a - b for a, b in zip(self, other)))

    def __mul__(self, scalar: float) -> 'AffineCoords':
        if not isinstance(scalar, Number) or isinstance(scalar, complex):
            return NotImplemented
        return AffineCoords(*(scalar * a for a in self))

    __rmul__ = __mul__

    def __neg__(self) -> 'AffineCoords':
        return self * -1.0

    def __eq__(self, other: 'AffineCoords') -> bool:
        return isinstance(other, AffineCoords) and self.__values == other.__values

    def __hash__(self) -> int:
        return hash(self.__values)

    def __str__(self) -> str:
        fields = ' '.join(f'{name}={value:g}' for name, value in zip(self.FIELDS, self.__values))
        return f'<AffineCoords {fields}>'

    def __repr__(self) -> str:
        return str(self)


def affine_map(delta: AffineCoords, x: ConfigurationLike) -> np.ndarray:
    """Apply T_delta: returns c1·1 + c2·Re(x) + c3·Im(x)."""
    x = as_configuration(x)
    return delta.c1 + delta.c2 * x.real + delta.c3 * x.imag


def compose(outer: AffineCoords, inner: AffineCoords) -> AffineCoords:
    """Affine coordinates of T_outer(T_inner(.)) as a single map."""
    o, i = outer, inner
    return AffineCoords(dx=o.dx + o.dax * i.dx + o.dhx * i.dy,
                        dy=o.dy + o.dhy * i.dx + o.day * i.dy,
                        dax=o.dax * i.dax + o.dhx * i.dhy,
                        day=o.dhy * i.dhx + o.day * i.day,
                        dhx=o.dax * i.dhx + o.dhx * i.day,
                        dhy=o.dhy * i.dax + o.day * i.dhy)


def decode_to_r2(x: ConfigurationLike) -> np.ndarray:
    """Interleaved real coordinates [x1, y1, x2, y2, ...]."""
    x = as_configuration(x)
    return np.kron(x.real, [1.0, 0.0]) + np.kron(x.imag, [0.0, 1.0])


def encode_from_r2(v: Sequence[float]) -> np.ndarray:
    """Inverse of `decode_to_r2`."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size % 2:
        raise ValueError(f'expected an even-length real vector, given shape {v.shape}')
    return v[0::2] + 1j * v[1::2]


def incidence_matrix(graph: Graph) -> np.ndarray:
    """Incidence matrix B: +1 at the tail and -1 at the head of every edge column."""
    B = np.zeros((graph.node_count, graph.edge_count))
    for k, (tail, head) in enumerate(graph.edges):
        B[tail, k] = 1.0
        B[head, k] = -1.0
    return B


class ShapeBasis:
    """Basis of the desired shape set S and its orthogonal projectors.

       Attributes
       ----------
       phi: np.ndarray
           n×3 complex matrix with columns [1, Re(p*), Im(p*)].
       proj_s: np.ndarray
           Orthogonal projector onto S.
       proj_c: np.ndarray
           I - proj_s.
       orthonormal: np.ndarray
           n×3 real orthonormal basis of S.
       complement: np.ndarray
           n×(n-3) real orthonormal basis of the orthogonal complement of S.
    """

    def __init__(self, shape: ReferenceShape) -> None:
        """Initialize attributes."""
        real_phi = _phi(shape.p_star)
        q, _ = linalg.qr(real_phi, mode='economic')
        proj_s = q @ q.T
        self.__shape = shape
        self.__phi = _frozen(real_phi.astype(complex))
        self.__pinv = _frozen(linalg.pinv(real_phi))
        self.__orthonormal = _frozen(q)
        self.__complement = _frozen(linalg.null_space(real_phi.T))
        self.__proj_s = _frozen(proj_s)
        self.__proj_c = _frozen(np.eye(shape.node_count) - proj_s)

    shape = property(lambda self: self.__shape)
    phi = property(lambda self: self.__phi)
    orthonormal = property(lambda self: self.__orthonormal)
    complement = property(lambda self: self.__complement)
    proj_s = property(lambda self: self.__proj_s)
    proj_c = property(lambda self: self.__proj_c)

    @property
    def node_count(self) -> int:
        return self.__phi.shape[0]

    def coordinates(self, p: ConfigurationLike) -> np.ndarray:
        """Least-squares coordinates [c1, c2, c3] of `p` in the basis [1, Re(p*), Im(p*)]."""
        return self.__pinv @ as_configuration(p, self.node_count)

    def lift(self, coords: Sequence[complex]) -> np.ndarray:
        """Configuration c1·1 + c2·Re(p*) + c3·Im(p*)."""
        return self.__phi @ np.asarray(coords, dtype=complex)

    def distance(self, p: ConfigurationLike) -> float:
        """Norm of the component of `p` outside S."""
        return float(linalg.norm(self.__proj_c @ as_configuration(p, self.node_count)))


def shape_basis(shape: Union[ReferenceShape, ConfigurationLike]) -> ShapeBasis:
    """Build the ShapeBasis of a reference shape (raw positions are centered first)."""
    if not isinstance(shape, ReferenceShape):
        shape = ReferenceShape(shape)
    return ShapeBasis(shape)


def shape_distance(p: ConfigurationLike, basis: ShapeBasis) -> float:
    """‖proj_C·p‖, zero iff p lies in the desired shape set."""
    return basis.distance(p)


class Framework:
    """Interaction graph together with its reference shape."""

    def __init__(self, graph: Graph, shape: Union[ReferenceShape, ConfigurationLike]) -> None:
        """Initialize attributes."""
        if not isinstance(graph, Graph):
            raise TypeError(f'{self.__class__.__name__}.graph expects Graph, given {type(graph)}.')
        if not isinstance(shape, ReferenceShape):
            shape = ReferenceShape(shape)
        if shape.node_count != graph.node_count:
            raise GraphError(f'graph has {graph.node_count} nodes but the shape has '
                             f'{shape.node_count} positions')
        self.__graph = graph
        self.__shape = shape
        self.__incidence = _frozen(incidence_matrix(graph))
        self.__basis = ShapeBasis(shape)

    graph = property(lambda self: self.__graph)
    shape = property(lambda self: self.__shape)
    incidence = property(lambda self: self.__incidence)
    basis = property(lambda self: self.__basis)

    @property
    def p_star(self) -> np.ndarray:
        return self.__shape.p_star

    @property
    def node_count(self) -> int:
        return self.__graph.node_count

    def relative_refs(self, i: int) -> List[Tuple[int, complex]]:
        """Pairs (j, z*_ij = p*_i - p*_j) over the neighbors of agent `i`."""
        p = self.p_star
        return [(j, complex(p[i] - p[j])) for j in self.__graph.neighbors(i)]

    def __str__(self) -> str:
        return f'<Framework n={self.node_count} edges={self.__graph.edge_count}>'

    def __repr__(self) -> str:
        return str(self)


def motion_projector(v_star: ConfigurationLike) -> np.ndarray:
    """Orthogonal projector onto span{1, Re(v*), Im(v*)}.

       The rank is decided from the singular values so pure translations (and v* = 0)
       give the projector onto the constant vectors.
    """
    v = as_configuration(v_star)
    u, s, _ = linalg.svd(_phi(v), full_matrices=False)
    q = u[:, :int(np.sum(s > RANK_TOL * s[0]))]
    return q @ q.T
