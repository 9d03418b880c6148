"""Graph reductions: the loop-padding scale gadget and a label-cover PCP construction.

Label-cover conventions: left vertices 1..|V_A|, right vertices 1..|V_B|;
every edge (a, b) carries a permutation pi of [p r] (1-based). The p-to-1
constraint is sigma . pi with sigma(x) = ceil(x / p). A labelling assigns
c(a) in [r] to left vertices and c(b) in [p r] to right vertices; the edge is
satisfied iff c(a) = sigma(pi(c(b))).

The reduction places a vertex v_b(x) for every right vertex b and
x in [k]^{p r}. For each left vertex a, every ordered pair of its edges
(a, b), (a, b') (b = b' included) and all x, y, it adds
T^{(x) r}(xbar <-> ybar) / L^r parallel edges between v_b(x^pi_ab) and
v_b'(y^pi_ab'), where x^pi = (x_pi(1), ..., x_pi(pr)) and xbar groups x into r
blocks of p colours, each block read as an element of [k]^p.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .graph import Colouring, EmptyGraphError, Graph, GraphError, colouring_value
from .oracle import BudgetError

VERTEX_BUDGET = 100_000


def scale_gadget(g: Graph, p: int, q: int) -> Graph:
    """p disjoint copies of G plus (q - p) m isolated vertices with one loop each.

    p/q is reduced first. A k-colouring of G that is proper gives the gadget
    value exactly p/q; the gadget has q m edges.
    """
    if p <= 0 or q <= 0:
        raise ValueError("p and q must be positive")
    if p > q:
        raise ValueError(f"need p <= q, got {p}/{q}")
    if g.m == 0:
        raise EmptyGraphError("gadget needs a graph with edges")
    d = math.gcd(p, q)
    p, q = p // d, q // d
    edges = []
    for copy in range(p):
        off = copy * g.n
        edges.extend((u + off, v + off, w) for u, v, w in g.edges)
    base = p * g.n
    loops = (q - p) * g.m
    edges.extend((base + i, base + i, 1) for i in range(1, loops + 1))
    return Graph(base + loops, tuple(edges))


def _digits(index: int, base: int, width: int) -> tuple[int, ...]:
    out = []
    for _ in range(width):
        index, d = divmod(index, base)
        out.append(d)
    return tuple(reversed(out))


def _all_digits(base: int, width: int) -> np.ndarray:
    """Rows are the base-``base`` digits of 0..base^width - 1, most significant first."""
    if width == 0:
        return np.zeros((1, 0), dtype=np.int64)
    return np.array(list(itertools.product(range(base), repeat=width)), dtype=np.int64)


@dataclass(frozen=True)
class MarkovOperator:
    """Symmetric stochastic matrix on [k]^p with entries on a grid of step L.

    Element d of [D] = [k^p] is the colour tuple given by the base-k digits of
    d - 1 (most significant first), colours 1..k. Construction fails unless
    the operator is colourful: any nonzero entry joins tuples with disjoint
    colour sets.
    """

    k: int
    p: int
    matrix: tuple[tuple[Fraction, ...], ...]
    grain: Fraction

    def __post_init__(self) -> None:
        D = self.k ** self.p
        rows = tuple(tuple(Fraction(x) for x in row) for row in self.matrix)
        object.__setattr__(self, "matrix", rows)
        object.__setattr__(self, "grain", Fraction(self.grain))
        if len(rows) != D or any(len(r) != D for r in rows):
            raise GraphError(f"operator on [{self.k}]^{self.p} needs a {D}x{D} matrix")
        if self.grain <= 0:
            raise GraphError("grain must be positive")
        for i, row in enumerate(rows):
            if sum(row) != 1:
                raise GraphError(f"row {i + 1} sums to {sum(row)}, not 1")
            for j, x in enumerate(row):
                if x < 0:
                    raise GraphError(f"negative entry at ({i + 1}, {j + 1})")
                if x != rows[j][i]:
                    raise GraphError(f"not symmetric at ({i + 1}, {j + 1})")
                if (x / self.grain).denominator != 1:
                    raise GraphError(f"entry {x} at ({i + 1}, {j + 1}) is not a multiple of {self.grain}")
                if x and set(self.tuple_of(i)) & set(self.tuple_of(j)):
                    raise GraphError(f"not colourful: entry ({i + 1}, {j + 1}) joins overlapping tuples")

    @property
    def D(self) -> int:
        return self.k ** self.p

    def tuple_of(self, index: int) -> tuple[int, ...]:
        """Colour tuple (1-based colours) of 0-based element ``index``."""
        return tuple(d + 1 for d in _digits(index, self.k, self.p))

    def as_float(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.matrix])

    def integer_matrix(self) -> np.ndarray:
        """Entries divided by the grain, as exact integers."""
        return np.array([[int(x / self.grain) for x in row] for row in self.matrix], dtype=object)

    def eigenvalues(self) -> np.ndarray:
        return np.sort(np.linalg.eigvalsh(self.as_float()))

    def spectral_radius(self) -> float:
        """Largest |eigenvalue| once the trivial eigenvalue 1 is removed."""
        ev = self.eigenvalues()
        if ev.size == 1:
            return 0.0
        rest = np.delete(ev, int(np.argmin(np.abs(ev - 1.0))))
        return float(np.max(np.abs(rest)))

    def to_text(self) -> str:
        lines = [f"mo {self.D} {self.grain}"]
        lines += [" ".join(str(x) for x in row) for row in self.matrix]
        return "\n".join(lines) + "\n"


def parse_markov(text: str, k: int | None = None) -> MarkovOperator:
    """Read ``mo <D> <L>`` followed by D rows of D fractions.

    Tuples have length p with k^p = D; without ``k`` the operator is taken
    to act on single colours (p = 1).
    """
    lines = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("c ")]
    if not lines or lines[0][0] != "mo" or len(lines[0]) != 3:
        raise GraphError("operator file must start with 'mo <D> <L>'")
    D = int(lines[0][1])
    grain = Fraction(lines[0][2])
    rows = [tuple(Fraction(x) for x in ln) for ln in lines[1:]]
    if len(rows) != D:
        raise GraphError(f"expected {D} rows, found {len(rows)}")
    if k is None:
        k, p = D, 1
    else:
        p = round(math.log(D, k)) if k > 1 else 0
        if k ** p != D:
            raise GraphError(f"D={D} is not a power of k={k}")
    return MarkovOperator(k, p, tuple(rows), grain)


def bonami_beckner(k: int) -> MarkovOperator:
    """Zero diagonal, 1/(k-1) elsewhere: a uniformly random different colour."""
    if k < 2:
        raise ValueError("need k >= 2")
    off = Fraction(1, k - 1)
    rows = tuple(tuple(Fraction(0) if i == j else off for j in range(k)) for i in range(k))
    return MarkovOperator(k, 1, rows, off)


@dataclass(frozen=True)
class LabelCoverInstance:
    n_left: int
    n_right: int
    p: int
    r: int
    edges: tuple[tuple[int, int, tuple[int, ...]], ...]

    def __post_init__(self) -> None:
        if self.p not in (1, 2):
            raise GraphError("p must be 1 or 2")
        if self.r < 1 or self.n_left < 0 or self.n_right < 0:
            raise GraphError("sizes must be non-negative and r positive")
        target = list(range(1, self.p * self.r + 1))
        clean = []
        for a, b, perm in self.edges:
            perm = tuple(int(x) for x in perm)
            if not (1 <= a <= self.n_left and 1 <= b <= self.n_right):
                raise GraphError(f"edge ({a}, {b}) out of range")
            if sorted(perm) != target:
                raise GraphError(f"permutation on edge ({a}, {b}) is not a bijection of [{self.p * self.r}]")
            clean.append((int(a), int(b), perm))
        object.__setattr__(self, "edges", tuple(clean))

    @property
    def domain(self) -> int:
        return self.p * self.r

    @cached_property
    def left_degrees(self) -> tuple[int, ...]:
        deg = [0] * self.n_left
        for a, _, _ in self.edges:
            deg[a - 1] += 1
        return tuple(deg)

    @property
    def left_regular(self) -> bool:
        return len(set(self.left_degrees)) <= 1

    def projection(self, edge: int, label: int) -> int:
        """Left label forced by right label ``label`` across edge number ``edge``."""
        perm = self.edges[edge][2]
        return -(-perm[label - 1] // self.p)

    def satisfied(self, left: Sequence[int], right: Sequence[int]) -> list[bool]:
        return [left[a - 1] == self.projection(i, right[b - 1]) for i, (a, b, _) in enumerate(self.edges)]

    def to_text(self) -> str:
        lines = [f"lc {self.n_left} {self.n_right} {self.p} {self.r}"]
        lines += [f"pi {a} {b} " + " ".join(map(str, perm)) for a, b, perm in self.edges]
        return "\n".join(lines) + "\n"


def parse_label_cover(text: str) -> LabelCoverInstance:
    header = None
    edges = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        tok = line.split()
        if not tok or tok[0] == "c":
            continue
        try:
            if tok[0] == "lc" and header is None and len(tok) == 5:
                header = tuple(int(x) for x in tok[1:])
            elif tok[0] == "pi" and header is not None:
                edges.append((int(tok[1]), int(tok[2]), tuple(int(x) for x in tok[3:])))
            else:
                raise ValueError
        except ValueError:
            raise GraphError(f"line {lineno}: cannot parse {line.strip()!r}") from None
    if header is None:
        raise GraphError("missing 'lc' header")
    return LabelCoverInstance(*header, tuple(edges))


@dataclass(frozen=True)
class LabelCoverLabelling:
    left: tuple[int, ...]
    right: tuple[int, ...]


@dataclass(frozen=True)
class PcpGraph:
    """Reduction output with the vertex layout needed to read it back."""

    graph: Graph
    k: int
    width: int
    n_right: int
    stats: dict = field(default_factory=dict, compare=False)

    def vertex(self, b: int, x: Sequence[int]) -> int:
        """1-based vertex id of v_b(x) for colours x in 1..k."""
        idx = 0
        for c in x:
            idx = idx * self.k + (c - 1)
        return (b - 1) * self.k ** self.width + idx + 1


def pcp_reduce(
    inst: LabelCoverInstance,
    k: int,
    T: MarkovOperator,
    r_blow: int | None = None,
    vertex_budget: int = VERTEX_BUDGET,
) -> PcpGraph:
    if r_blow is None:
        r_blow = inst.r
    if r_blow != inst.r:
        raise ValueError(f"tensor power {r_blow} must equal the label-cover domain size r={inst.r}")
    if T.k != k or T.p != inst.p:
        raise ValueError(f"operator acts on [{T.k}]^{T.p}, need [{k}]^{inst.p}")
    if not inst.edges:
        raise EmptyGraphError("label cover instance has no edges")
    if not inst.left_regular:
        raise ValueError("label cover instance must be left-regular")
    width = inst.p * r_blow
    per_b = k ** width
    n_vertices = per_b * inst.n_right
    if n_vertices > vertex_budget:
        raise BudgetError(f"{n_vertices} vertices exceeds the budget of {vertex_budget}")

    # Integer T^{(x) r} / L^r over [D^r], with block order matching base-k digit order of x.
    Tint = T.integer_matrix()
    big = np.ones((1, 1), dtype=object)
    for _ in range(r_blow):
        big = np.kron(big, Tint)
    xs, ys = np.nonzero(big != 0)
    mult = big[xs, ys]
    digits = _all_digits(k, width)
    powers = k ** np.arange(width - 1, -1, -1, dtype=np.int64)

    def permuted(perm: tuple[int, ...]) -> np.ndarray:
        # index of x^pi for every x
        return digits[:, np.array(perm) - 1] @ powers

    by_left: dict[int, list[int]] = {}
    for i, (a, _, _) in enumerate(inst.edges):
        by_left.setdefault(a, []).append(i)
    images = [permuted(perm) for _, _, perm in inst.edges]
    acc: dict[tuple[int, int], int] = {}
    for a, idxs in by_left.items():
        for e1 in idxs:
            b1 = inst.edges[e1][1]
            src = images[e1][xs] + (b1 - 1) * per_b + 1
            for e2 in idxs:
                b2 = inst.edges[e2][1]
                dst = images[e2][ys] + (b2 - 1) * per_b + 1
                for u, v, w in zip(src.tolist(), dst.tolist(), mult):
                    key = (u, v) if u <= v else (v, u)
                    acc[key] = acc.get(key, 0) + int(w)
    edges = tuple((u, v, w) for (u, v), w in sorted(acc.items()))
    g = Graph(n_vertices, edges)
    stats = {"pairs": sum(len(v) ** 2 for v in by_left.values()), "support": int(xs.size)}
    return PcpGraph(g, k, width, inst.n_right, stats)


def induced_colouring(inst: LabelCoverInstance, labelling: LabelCoverLabelling, built: PcpGraph) -> Colouring:
    """Long-code colouring f_b(x) = x_{c(b)}."""
    if len(labelling.right) != inst.n_right or len(labelling.left) != inst.n_left:
        raise ValueError("labelling size does not match the instance")
    for c in labelling.right:
        if not 1 <= c <= inst.domain:
            raise ValueError(f"right label {c} outside 1..{inst.domain}")
    for c in labelling.left:
        if not 1 <= c <= inst.r:
            raise ValueError(f"left label {c} outside 1..{inst.r}")
    if built.width != inst.domain or built.n_right != inst.n_right:
        raise ValueError("graph was not built from this instance")
    digits = _all_digits(built.k, built.width)
    cols = np.concatenate([digits[:, c - 1] + 1 for c in labelling.right])
    return Colouring(tuple(int(c) for c in cols), built.k)


def completeness_value(
    inst: LabelCoverInstance, labelling: LabelCoverLabelling, k: int, built: PcpGraph
) -> Fraction:
    if built.k != k:
        raise ValueError(f"graph was built for k={built.k}")
    return colouring_value(built.graph, induced_colouring(inst, labelling, built))


def read_label_cover(path: str | Path) -> LabelCoverInstance:
    return parse_label_cover(Path(path).read_text())


def read_markov(path: str | Path, k: int | None = None) -> MarkovOperator:
    return parse_markov(Path(path).read_text(), k)
