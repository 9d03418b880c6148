"""Multigraphs with loops, DIMACS-like edge-list I/O and exact colouring values."""

from __future__ import annotations

import logging
from collections import OrderedDict
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

log = logging.getLogger(__name__)


class GraphError(ValueError):
    """Invalid graph or colouring."""


class ParseError(GraphError):
    """Malformed graph file. Carries the 1-based line number."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class MalformedLineError(ParseError):
    pass


class VertexRangeError(ParseError):
    pass


class MultiplicityError(ParseError):
    pass


class EmptyGraphError(GraphError):
    """Value is undefined when there are no edges."""


@dataclass(frozen=True)
class Graph:
    """Undirected multigraph on vertices 1..n.

    ``edges`` holds ``(u, v, mult)`` with ``u <= v``; ``u == v`` is a loop.
    Each unordered pair appears at most once; edges are kept sorted.
    """

    n: int
    edges: tuple[tuple[int, int, int], ...] = ()
    m: int = field(init=False)

    def __post_init__(self) -> None:
        if self.n < 0:
            raise GraphError("vertex count must be non-negative")
        merged: OrderedDict[tuple[int, int], int] = OrderedDict()
        for u, v, mult in self.edges:
            if not (1 <= u <= self.n and 1 <= v <= self.n):
                raise GraphError(f"edge ({u}, {v}) out of range 1..{self.n}")
            if mult < 1:
                raise GraphError(f"edge ({u}, {v}) has multiplicity {mult} < 1")
            key = (u, v) if u <= v else (v, u)
            merged[key] = merged.get(key, 0) + int(mult)
        edges = tuple((u, v, w) for (u, v), w in sorted(merged.items()))
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "m", sum(w for _, _, w in edges))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> "Graph":
        """Build from ``(u, v)`` or ``(u, v, mult)`` tuples."""
        triples = []
        for e in edges:
            if len(e) == 2:
                triples.append((int(e[0]), int(e[1]), 1))
            else:
                triples.append((int(e[0]), int(e[1]), int(e[2])))
        return cls(n, tuple(triples))

    @property
    def loop_count(self) -> int:
        return sum(w for u, v, w in self.edges if u == v)

    def proper_edges(self) -> list[tuple[int, int, int]]:
        """Non-loop edges, the only ones a colouring can satisfy."""
        return [(u, v, w) for u, v, w in self.edges if u != v]

    def edge_arrays(self, loops: bool = False) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """0-based endpoint arrays and multiplicities."""
        es = self.edges if loops else self.proper_edges()
        if not es:
            z = np.zeros(0, dtype=np.int64)
            return z, z.copy(), z.copy()
        arr = np.asarray(es, dtype=np.int64)
        return arr[:, 0] - 1, arr[:, 1] - 1, arr[:, 2]

    def disjoint_union(self, other: "Graph") -> "Graph":
        shifted = tuple((u + self.n, v + self.n, w) for u, v, w in other.edges)
        return Graph(self.n + other.n, self.edges + shifted)

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Return the graph with vertex ``i`` renamed ``perm[i-1]``."""
        if sorted(perm) != list(range(1, self.n + 1)):
            raise GraphError("relabelling must be a permutation of 1..n")
        return Graph(self.n, tuple((perm[u - 1], perm[v - 1], w) for u, v, w in self.edges))

    def to_text(self, comment: str | None = None) -> str:
        lines = []
        if comment:
            lines.extend(f"c {c}" for c in comment.splitlines())
        lines.append(f"p edge {self.n} {self.m}")
        for u, v, w in self.edges:
            lines.append(f"e {u} {v}" if w == 1 else f"e {u} {v} {w}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Colouring:
    """Colours in 1..palette, one per vertex (index 0 is vertex 1)."""

    colours: tuple[int, ...]
    palette: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "colours", tuple(int(c) for c in self.colours))
        if self.palette < 1:
            raise GraphError("palette must be positive")
        bad = [c for c in self.colours if not 1 <= c <= self.palette]
        if bad:
            raise GraphError(f"colour {bad[0]} outside 1..{self.palette}")

    def __len__(self) -> int:
        return len(self.colours)

    @classmethod
    def from_array(cls, arr: Sequence[int], palette: int | None = None) -> "Colouring":
        cols = tuple(int(c) for c in arr)
        return cls(cols, palette if palette is not None else max(cols, default=1))


def parse_graph(text: str | bytes) -> Graph:
    """Parse the ``p edge`` / ``e u v [mult]`` format.

    Duplicate edge lines accumulate multiplicity. The declared edge count is
    advisory; a mismatch is logged, not raised.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    n: int | None = None
    declared = 0
    raw_edges: list[tuple[int, int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        tag = parts[0]
        if tag == "p":
            if n is not None:
                raise MalformedLineError(lineno, "duplicate header")
            if len(parts) != 4 or parts[1] != "edge":
                raise MalformedLineError(lineno, f"bad header {line!r}")
            try:
                n, declared = int(parts[2]), int(parts[3])
            except ValueError:
                raise MalformedLineError(lineno, f"bad header {line!r}") from None
            if n < 0 or declared < 0:
                raise MalformedLineError(lineno, "negative counts in header")
        elif tag == "e":
            if n is None:
                raise MalformedLineError(lineno, "edge before header")
            if len(parts) not in (3, 4):
                raise MalformedLineError(lineno, f"bad edge line {line!r}")
            try:
                nums = [int(x) for x in parts[1:]]
            except ValueError:
                raise MalformedLineError(lineno, f"bad edge line {line!r}") from None
            u, v = nums[0], nums[1]
            mult = nums[2] if len(nums) == 3 else 1
            if not (1 <= u <= n and 1 <= v <= n):
                raise VertexRangeError(lineno, f"vertex out of range 1..{n} in {line!r}")
            if mult <= 0:
                raise MultiplicityError(lineno, f"multiplicity must be positive, got {mult}")
            raw_edges.append((u, v, mult))
        else:
            raise MalformedLineError(lineno, f"unknown line type {tag!r}")
    if n is None:
        raise MalformedLineError(0, "missing 'p edge' header")
    g = Graph(n, tuple(raw_edges))
    if declared != g.m:
        log.warning("header declares %d edges, found %d", declared, g.m)
    return g


def read_graph(path: str | Path) -> Graph:
    return parse_graph(Path(path).read_bytes())


def write_graph(g: Graph, path: str | Path, comment: str | None = None) -> None:
    Path(path).write_text(g.to_text(comment), encoding="utf-8")


def colouring_value(g: Graph, c: Colouring | Sequence[int]) -> Fraction:
    """Exact fraction of edges (with multiplicity) whose endpoints differ in colour."""
    colours = c.colours if isinstance(c, Colouring) else tuple(int(x) for x in c)
    if len(colours) != g.n:
        raise GraphError(f"colouring has length {len(colours)}, graph has {g.n} vertices")
    if g.m == 0:
        raise EmptyGraphError("colouring value undefined for a graph without edges")
    good = sum(w for u, v, w in g.edges if colours[u - 1] != colours[v - 1])
    return Fraction(good, g.m)


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)])


def complete_bipartite(a: int, b: int) -> Graph:
    return Graph.from_edges(a + b, [(i, a + j) for i in range(1, a + 1) for j in range(1, b + 1)])


def cycle_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i % n + 1) for i in range(1, n + 1)])


def planted_colourable(n: int, k: int, p: float, rng: np.random.Generator) -> tuple[Graph, Colouring]:
    """Random graph with a hidden proper k-colouring: each cross-class pair is an edge w.p. ``p``."""
    hidden = np.arange(n) % k
    rng.shuffle(hidden)
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if hidden[i] != hidden[j] and rng.random() < p:
                edges.append((i + 1, j + 1))
    return Graph.from_edges(n, edges), Colouring(tuple(int(h) + 1 for h in hidden), k)


def from_networkx(nxg) -> Graph:
    """Convert a networkx graph (any hashable node labels) preserving node order."""
    index = {v: i + 1 for i, v in enumerate(nxg.nodes())}
    return Graph.from_edges(len(index), [(index[u], index[v]) for u, v in nxg.edges()])
