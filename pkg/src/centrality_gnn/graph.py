"""Undirected simple graphs, adjacency matrices, batching and file ingestion."""

from __future__ import annotations

import io
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import InputError, ParseError

__all__ = [
    "Graph",
    "BatchedGraph",
    "from_edge_list",
    "adjacency",
    "disjoint_union",
    "parse_edge_list",
    "read_graph",
    "is_connected",
]


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on vertices ``0..n-1``.

    ``edges`` holds pairs ``(i, j)`` with ``i < j``, sorted lexicographically.
    Build instances through :func:`from_edge_list` unless the edge tuple is
    already canonical.
    """

    n: int
    edges: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.n < 1:
            raise InputError(f"graph needs at least one vertex, got n={self.n}")
        prev = None
        for e in self.edges:
            i, j = e
            if not (0 <= i < j < self.n):
                raise InputError(f"edge {e} is not canonical for n={self.n}")
            if prev is not None and e <= prev:
                raise InputError("edges must be sorted and unique")
            prev = e

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return tuple(tuple(sorted(a)) for a in adj)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        if self.edges:
            e = np.asarray(self.edges)
            np.add.at(deg, e[:, 0], 1)
            np.add.at(deg, e[:, 1], 1)
        return deg

    def sparse_adjacency(self) -> sp.csr_matrix:
        """Symmetric 0/1 adjacency in CSR form."""
        if not self.edges:
            return sp.csr_matrix((self.n, self.n), dtype=np.float64)
        e = np.asarray(self.edges)
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        data = np.ones(len(rows), dtype=np.float64)
        return sp.csr_matrix((data, (rows, cols)), shape=(self.n, self.n))

    def permuted(self, perm: Sequence[int]) -> "Graph":
        """Relabel vertex ``v`` as ``perm[v]``."""
        perm = list(perm)
        if sorted(perm) != list(range(self.n)):
            raise InputError("perm must be a permutation of range(n)")
        return from_edge_list(self.n, [(perm[i], perm[j]) for i, j in self.edges])

    def subgraph_range(self, start: int, stop: int) -> "Graph":
        """Induced subgraph on ``start..stop-1``, relabelled from 0."""
        pairs = [(i - start, j - start) for i, j in self.edges if start <= i and j < stop]
        return from_edge_list(stop - start, pairs)

    def to_text(self) -> str:
        """Dataset serialization: header ``n m`` then one ``i j`` line per edge."""
        lines = [f"{self.n} {self.m}"]
        lines.extend(f"{i} {j}" for i, j in self.edges)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Graph":
        rows = [ln.split() for ln in text.splitlines() if ln.strip()]
        if not rows:
            raise ParseError("empty graph file", 1)
        try:
            n, m = (int(x) for x in rows[0])
        except ValueError:
            raise ParseError("header must be 'n m'", 1) from None
        pairs = []
        for lineno, row in enumerate(rows[1:], start=2):
            if len(row) != 2:
                raise ParseError(f"expected 2 fields, got {len(row)}", lineno)
            try:
                pairs.append((int(row[0]), int(row[1])))
            except ValueError:
                raise ParseError(f"non-integer vertex id in {row!r}", lineno) from None
        if len(pairs) != m:
            raise ParseError(f"header announces {m} edges, found {len(pairs)}", 1)
        return from_edge_list(n, pairs)


@dataclass(frozen=True)
class BatchedGraph:
    """Disjoint union of ``graphs``; member ``k`` occupies ``offsets[k]..offsets[k]+graphs[k].n``."""

    graphs: tuple[Graph, ...]
    offsets: tuple[int, ...]
    union: Graph = field(repr=False)

    def member_slice(self, k: int) -> slice:
        start = self.offsets[k]
        return slice(start, start + self.graphs[k].n)

    def member(self, k: int) -> Graph:
        s = self.member_slice(k)
        return self.union.subgraph_range(s.start, s.stop)

    def __len__(self):
        return len(self.graphs)


def from_edge_list(n: int, pairs: Iterable[tuple[int, int]]) -> Graph:
    """Build a graph, dropping self-loops and collapsing duplicate/reversed pairs."""
    if n < 1:
        raise InputError(f"graph needs at least one vertex, got n={n}")
    edges = set()
    for pair in pairs:
        i, j = int(pair[0]), int(pair[1])
        if not (0 <= i < n and 0 <= j < n):
            raise InputError(f"edge ({i}, {j}) out of range for n={n}")
        if i == j:
            continue
        edges.add((i, j) if i < j else (j, i))
    return Graph(n, tuple(sorted(edges)))


def adjacency(g: Graph) -> np.ndarray:
    """Dense symmetric 0/1 adjacency matrix with zero diagonal."""
    return g.sparse_adjacency().toarray()


def disjoint_union(gs: Sequence[Graph]) -> BatchedGraph:
    if not gs:
        raise InputError("disjoint_union needs at least one graph")
    offsets = []
    edges = []
    total = 0
    for g in gs:
        offsets.append(total)
        edges.extend((i + total, j + total) for i, j in g.edges)
        total += g.n
    # member edges are sorted and offsets increase, so the union stays canonical
    union = Graph(total, tuple(edges))
    return BatchedGraph(tuple(gs), tuple(offsets), union)


def is_connected(g: Graph) -> bool:
    seen = np.zeros(g.n, dtype=bool)
    seen[0] = True
    queue = deque([0])
    nbrs = g.neighbors
    while queue:
        v = queue.popleft()
        for w in nbrs[v]:
            if not seen[w]:
                seen[w] = True
                queue.append(w)
    return bool(seen.all())


def _tokens(line: str) -> list[str]:
    return line.replace(",", " ").split()


def parse_edge_list(text: str | bytes | io.IOBase, format: str = "snap-edgelist") -> Graph:
    """Parse a SNAP edge list or a MatrixMarket coordinate file.

    Vertex ids are relabelled to ``0..n-1`` in order of first appearance.
    Directed entries are symmetrized; self-loops and duplicates are dropped.
    """
    if hasattr(text, "read"):
        text = text.read()
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    if format in ("snap", "snap-edgelist"):
        pairs = _parse_snap(text)
    elif format in ("mtx", "matrix-market"):
        pairs = _parse_matrix_market(text)
    else:
        raise InputError(f"unknown edge-list format {format!r}")

    labels: dict[int, int] = {}
    relabelled = []
    for a, b in pairs:
        for key in (a, b):
            if key not in labels:
                labels[key] = len(labels)
        relabelled.append((labels[a], labels[b]))
    if not labels:
        raise ParseError("file contains no edges")
    return from_edge_list(len(labels), relabelled)


def _parse_snap(text: str) -> list[tuple[int, int]]:
    pairs = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        tok = _tokens(s)
        if len(tok) < 2:
            raise ParseError(f"expected two vertex ids, got {s!r}", lineno)
        try:
            pairs.append((int(tok[0]), int(tok[1])))
        except ValueError:
            raise ParseError(f"non-integer vertex id in {s!r}", lineno) from None
    return pairs


def _parse_matrix_market(text: str) -> list[tuple[int, int]]:
    pairs = []
    header_seen = False
    size_seen = False
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if s.startswith("%%MatrixMarket"):
            if header_seen or size_seen:
                raise ParseError("misplaced MatrixMarket banner", lineno)
            header_seen = True
            if "coordinate" not in s.lower():
                raise ParseError("only coordinate MatrixMarket files are supported", lineno)
            continue
        if not s or s.startswith("%"):
            continue
        tok = _tokens(s)
        if not size_seen:
            if len(tok) != 3:
                raise ParseError(f"expected 'rows cols nnz', got {s!r}", lineno)
            try:
                [int(t) for t in tok]
            except ValueError:
                raise ParseError(f"non-integer size line {s!r}", lineno) from None
            size_seen = True
            continue
        if len(tok) < 2:
            raise ParseError(f"expected a coordinate entry, got {s!r}", lineno)
        try:
            i, j = int(tok[0]), int(tok[1])
        except ValueError:
            raise ParseError(f"non-integer index in {s!r}", lineno) from None
        if i < 1 or j < 1:
            raise ParseError("MatrixMarket indices are 1-based", lineno)
        pairs.append((i, j))
    if not size_seen:
        raise ParseError("missing MatrixMarket size line")
    return pairs


_EXTENSIONS = {
    ".mtx": "matrix-market",
    ".txt": "snap-edgelist",
    ".edges": "snap-edgelist",
    ".edgelist": "snap-edgelist",
    ".el": "snap-edgelist",
}


def format_for_path(path) -> str | None:
    from pathlib import Path

    return _EXTENSIONS.get(Path(path).suffix.lower())


def read_graph(path, format: str | None = None) -> Graph:
    """Read a graph file. ``format`` may be ``graph`` (dataset format),
    ``snap-edgelist`` or ``matrix-market``; inferred from the suffix if omitted."""
    from pathlib import Path

    path = Path(path)
    if format is None:
        format = "graph" if path.suffix == ".graph" else format_for_path(path)
        if format is None:
            raise InputError(f"cannot infer graph format from {path.name!r}")
    text = path.read_text()
    if format == "graph":
        return Graph.from_text(text)
    return parse_edge_list(text, format)
