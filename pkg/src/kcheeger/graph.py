"""Undirected simple graphs, vertex sets, partitions, generators and edge-list I/O.

Edge counts follow the ordered-incidence convention: ``edge_count_between(g, s, t)``
is ``sum(A[u, v] for u in s for v in t)``, so an edge with both endpoints inside
``s`` is counted twice by ``edge_count_between(g, s, s)``.  With that reading
``volume(s) == e(s, s) + e(s, complement(s))`` holds for every set.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from itertools import combinations

import numpy as np

from .errors import ParameterError, ParseError, ValidationError

__all__ = [
    "Graph",
    "VertexSet",
    "Partition",
    "volume",
    "edge_count_between",
    "edge_count_quadform",
    "generate",
    "disjoint_union",
    "block_labels",
    "read_edge_list",
    "write_edge_list",
    "GENERATOR_KINDS",
]


class Graph:
    """Immutable undirected simple graph on vertices ``0..n-1``."""

    __slots__ = ("_n", "_edges", "_degrees", "_adjacency")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 0:
            raise ParameterError(f"vertex count must be a nonnegative integer, got {n!r}")
        n = int(n)
        seen = set()
        degrees = [0] * n
        for e in edges:
            u, v = (int(x) for x in e)
            if u == v:
                raise ValidationError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValidationError(f"edge ({u}, {v}) out of range for n={n}")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise ValidationError(f"duplicate edge {key}")
            seen.add(key)
            degrees[u] += 1
            degrees[v] += 1
        self._n = n
        self._edges = tuple(sorted(seen))
        self._degrees = tuple(degrees)
        self._adjacency = None

    @property
    def n(self) -> int:
        return self._n

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        """Sorted ``(u, v)`` pairs with ``u < v``."""
        return self._edges

    @property
    def degrees(self) -> tuple[int, ...]:
        return self._degrees

    @property
    def num_edges(self) -> int:
        return len(self._edges)

    @property
    def volume(self) -> int:
        return 2 * len(self._edges)

    @property
    def max_degree(self) -> int:
        return max(self._degrees, default=0)

    @property
    def adjacency(self) -> np.ndarray:
        """Dense 0/1 adjacency matrix (read-only, cached)."""
        if self._adjacency is None:
            a = np.zeros((self._n, self._n))
            if self._edges:
                idx = np.array(self._edges)
                a[idx[:, 0], idx[:, 1]] = 1.0
                a[idx[:, 1], idx[:, 0]] = 1.0
            a.flags.writeable = False
            self._adjacency = a
        return self._adjacency

    def neighbors(self, v: int) -> list[int]:
        return [int(u) for u in np.flatnonzero(self.adjacency[v])]

    def components(self) -> list[list[int]]:
        """Connected components as sorted vertex lists, ordered by smallest vertex."""
        parent = list(range(self._n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for u, v in self._edges:
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[max(ru, rv)] = min(ru, rv)
        groups: dict[int, list[int]] = {}
        for v in range(self._n):
            groups.setdefault(find(v), []).append(v)
        return [groups[r] for r in sorted(groups)]

    def num_components(self) -> int:
        return len(self.components())

    def is_connected(self) -> bool:
        return self._n > 0 and self.num_components() == 1

    def vertex_set(self, members: Iterable[int] = ()) -> "VertexSet":
        return VertexSet(self._n, members)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self._n == other._n and self._edges == other._edges

    def __hash__(self):
        return hash((self._n, self._edges))

    def __repr__(self):
        return f"Graph(n={self._n}, m={len(self._edges)})"


class VertexSet:
    """A subset of ``{0, ..., n-1}`` bound to a vertex count."""

    __slots__ = ("n", "members", "_mask")

    def __init__(self, n: int, members: Iterable[int] = ()):
        members = frozenset(int(v) for v in members)
        bad = [v for v in members if not 0 <= v < n]
        if bad:
            raise ParameterError(f"vertices {sorted(bad)} out of range for n={n}")
        self.n = n
        self.members = members
        self._mask = None

    @property
    def indicator(self) -> np.ndarray:
        if self._mask is None:
            m = np.zeros(self.n)
            m[list(self.members)] = 1.0
            m.flags.writeable = False
            self._mask = m
        return self._mask

    def complement(self) -> "VertexSet":
        return VertexSet(self.n, set(range(self.n)) - self.members)

    def __contains__(self, v):
        return v in self.members

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(sorted(self.members))

    def __eq__(self, other):
        if not isinstance(other, VertexSet):
            return NotImplemented
        return self.n == other.n and self.members == other.members

    def __hash__(self):
        return hash((self.n, self.members))

    def __repr__(self):
        return f"VertexSet({sorted(self.members)})"


class Partition:
    """Assignment of each vertex to one of ``k`` labelled parts.

    All parts must be nonempty unless ``allow_empty`` is set (rounding output).
    """

    __slots__ = ("k", "assignment", "allow_empty")

    def __init__(self, k: int, assignment: Sequence[int], allow_empty: bool = False):
        if k < 2:
            raise ParameterError(f"a partition needs k >= 2 parts, got {k}")
        assignment = tuple(int(x) for x in assignment)
        if any(not 0 <= x < k for x in assignment):
            raise ParameterError(f"labels must lie in 0..{k - 1}")
        if not allow_empty and len(set(assignment)) != k:
            missing = sorted(set(range(k)) - set(assignment))
            raise ParameterError(f"parts {missing} are empty")
        self.k = k
        self.assignment = assignment
        self.allow_empty = allow_empty

    @classmethod
    def from_parts(cls, n: int, parts: Sequence[Iterable[int]], allow_empty: bool = False):
        labels = [-1] * n
        for j, part in enumerate(parts):
            for v in part:
                if labels[v] != -1:
                    raise ParameterError(f"vertex {v} appears in two parts")
                labels[v] = j
        if -1 in labels:
            raise ParameterError(f"vertex {labels.index(-1)} is not covered")
        return cls(len(parts), labels, allow_empty=allow_empty)

    @property
    def n(self) -> int:
        return len(self.assignment)

    def parts(self) -> list[VertexSet]:
        groups: list[list[int]] = [[] for _ in range(self.k)]
        for v, j in enumerate(self.assignment):
            groups[j].append(v)
        return [VertexSet(self.n, g) for g in groups]

    def sizes(self) -> list[int]:
        counts = [0] * self.k
        for j in self.assignment:
            counts[j] += 1
        return counts

    def has_empty_part(self) -> bool:
        return 0 in self.sizes()

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return self.k == other.k and self.assignment == other.assignment

    def __hash__(self):
        return hash((self.k, self.assignment))

    def __repr__(self):
        return f"Partition(k={self.k}, parts={[sorted(p.members) for p in self.parts()]})"


def _check_bound(g: Graph, *sets: VertexSet):
    for s in sets:
        if s.n != g.n:
            raise ParameterError(f"vertex set bound to n={s.n}, graph has n={g.n}")


def volume(g: Graph, s: VertexSet) -> int:
    """Sum of degrees over ``s``."""
    _check_bound(g, s)
    deg = g.degrees
    return sum(deg[v] for v in s.members)


def edge_count_between(g: Graph, s: VertexSet, t: VertexSet) -> int:
    """Ordered incidence count ``sum_{u in s, v in t} A[u, v]``."""
    _check_bound(g, s, t)
    count = 0
    for u, v in g.edges:
        count += (u in s.members and v in t.members) + (v in s.members and u in t.members)
    return count


def edge_count_quadform(g: Graph, laplacian, s: VertexSet, t: VertexSet) -> float:
    """Evaluate ``(D^{1/2} 1_s)^T (I - L) (D^{1/2} 1_t)`` for a normalized Laplacian.

    ``laplacian`` is a :class:`kcheeger.spectral.NormalizedLaplacian` (or a bare
    matrix) built from ``g``.
    """
    _check_bound(g, s, t)
    mat = np.asarray(getattr(laplacian, "matrix", laplacian), dtype=float)
    if mat.shape != (g.n, g.n):
        raise ParameterError("laplacian shape does not match graph")
    sqrt_d = np.sqrt(np.asarray(g.degrees, dtype=float))
    ys = sqrt_d * s.indicator
    yt = sqrt_d * t.indicator
    return float(ys @ yt - ys @ (mat @ yt))


# --- generators -----------------------------------------------------------------

GENERATOR_KINDS = ("complete", "path", "cycle", "disjoint_union", "grid", "planted_partition", "gnp")


def _count(name, value, minimum=0):
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < minimum:
        raise ParameterError(f"{name} must be an integer >= {minimum}, got {value!r}", param=name)
    return int(value)


def _prob(name, value):
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ParameterError(f"{name} must be a probability, got {value!r}", param=name) from None
    if not 0.0 <= value <= 1.0:
        raise ParameterError(f"{name} must lie in [0, 1], got {value}", param=name)
    return value


def _rng(seed):
    return np.random.Generator(np.random.Philox(int(seed) & 0xFFFFFFFFFFFFFFFF))


def disjoint_union(*graphs: Graph) -> Graph:
    """Vertex-disjoint union; vertices of later graphs are shifted past earlier ones."""
    edges, offset = [], 0
    for h in graphs:
        edges.extend((u + offset, v + offset) for u, v in h.edges)
        offset += h.n
    return Graph(offset, edges)


def block_labels(n: int, k: int) -> list[int]:
    """Contiguous near-equal blocks: vertex ``v`` goes to block ``v * k // n``."""
    return [v * k // n for v in range(n)]


def generate(kind: str, seed: int = 0, **params) -> Graph:
    """Build a graph of the given kind.

    complete/path/cycle take ``n``; grid takes ``rows`` and ``cols``;
    disjoint_union takes ``parts`` (a sequence of graphs); gnp takes ``n`` and
    ``p``; planted_partition takes ``n``, ``k``, ``p_in`` and ``p_out`` with
    contiguous near-equal blocks.  Only gnp and planted_partition use ``seed``.
    """
    if kind == "complete":
        n = _count("n", params.get("n"))
        return Graph(n, combinations(range(n), 2))
    if kind == "path":
        n = _count("n", params.get("n"))
        return Graph(n, ((i, i + 1) for i in range(n - 1)))
    if kind == "cycle":
        n = _count("n", params.get("n"), 3)
        return Graph(n, [(i, (i + 1) % n) for i in range(n)])
    if kind == "grid":
        rows = _count("rows", params.get("rows"), 1)
        cols = _count("cols", params.get("cols"), 1)
        edges = []
        for r in range(rows):
            for c in range(cols):
                v = r * cols + c
                if c + 1 < cols:
                    edges.append((v, v + 1))
                if r + 1 < rows:
                    edges.append((v, v + cols))
        return Graph(rows * cols, edges)
    if kind == "disjoint_union":
        parts = params.get("parts")
        if not parts or not all(isinstance(h, Graph) for h in parts):
            raise ParameterError("disjoint_union needs a nonempty sequence of graphs in 'parts'")
        return disjoint_union(*parts)
    if kind == "gnp":
        n = _count("n", params.get("n"))
        p = _prob("p", params.get("p"))
        rng = _rng(seed)
        pairs = list(combinations(range(n), 2))
        draws = rng.random(len(pairs))
        return Graph(n, [e for e, x in zip(pairs, draws) if x < p])
    if kind == "planted_partition":
        n = _count("n", params.get("n"), 1)
        k = _count("k", params.get("k"), 1)
        if k > n:
            raise ParameterError(f"k={k} blocks cannot exceed n={n}", param="k")
        p_in = _prob("p_in", params.get("p_in"))
        p_out = _prob("p_out", params.get("p_out"))
        if not p_in > p_out:
            raise ParameterError(f"planted partition needs p_in > p_out, got {p_in} <= {p_out}", param="p_in")
        labels = block_labels(n, k)
        rng = _rng(seed)
        pairs = list(combinations(range(n), 2))
        draws = rng.random(len(pairs))
        edges = [
            (u, v)
            for (u, v), x in zip(pairs, draws)
            if x < (p_in if labels[u] == labels[v] else p_out)
        ]
        return Graph(n, edges)
    raise ParameterError(f"unknown graph kind {kind!r}; expected one of {', '.join(GENERATOR_KINDS)}")


# --- edge-list text format --------------------------------------------------------

def read_edge_list(text: str) -> Graph:
    """Parse the ``n <count>`` + ``u v`` per line format (``#`` starts a comment line)."""
    n = None
    edges = []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if n is None:
            if len(fields) != 2 or fields[0] != "n":
                raise ParseError(f"expected header 'n <count>', got {line!r}", lineno)
            try:
                n = int(fields[1])
            except ValueError:
                raise ParseError(f"vertex count {fields[1]!r} is not an integer", lineno) from None
            if n < 0:
                raise ParseError("vertex count must be nonnegative", lineno)
            continue
        if len(fields) != 2:
            raise ParseError(f"expected 'u v', got {line!r}", lineno)
        try:
            u, v = int(fields[0]), int(fields[1])
        except ValueError:
            raise ParseError(f"non-integer vertex in {line!r}", lineno) from None
        if u == v:
            raise ValidationError(f"line {lineno}: self-loop at vertex {u}")
        if not (0 <= u < n and 0 <= v < n):
            raise ValidationError(f"line {lineno}: vertex index out of range for n={n}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise ValidationError(f"line {lineno}: duplicate edge {key}")
        seen.add(key)
        edges.append(key)
    if n is None:
        raise ParseError("missing 'n <count>' header")
    return Graph(n, edges)


def write_edge_list(g: Graph) -> str:
    lines = [f"n {g.n}"]
    lines.extend(f"{u} {v}" for u, v in g.edges)
    return "\n".join(lines) + "\n"
