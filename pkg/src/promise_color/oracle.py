"""Brute-force and Monte Carlo ground truth."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .graph import Colouring, EmptyGraphError, Graph, colouring_value


class BudgetError(RuntimeError):
    """Instance exceeds the enumeration budget."""


@dataclass(frozen=True)
class OracleBudget:
    max_vertices: int = 12
    max_palette: int = 5
    mc_samples: int = 1_000_000
    seed: int = 0

    def __post_init__(self) -> None:
        if min(self.max_vertices, self.max_palette, self.mc_samples) <= 0:
            raise ValueError("budget limits must be positive")


def exact_rho(g: Graph, k: int, budget: OracleBudget = OracleBudget()) -> tuple[Fraction, Colouring]:
    """Maximum colouring value over all k-colourings, with a witness.

    Branch and bound over canonical colourings (a vertex may only open colour
    c + 1 once colours 1..c are in use). Loops are counted as improper up front
    and vertices without proper edges are coloured 1 and skipped.
    """
    if k < 1:
        raise ValueError("palette must be positive")
    if g.m == 0:
        raise EmptyGraphError("rho undefined for a graph without edges")
    adj: dict[int, dict[int, int]] = {}
    for u, v, w in g.proper_edges():
        adj.setdefault(u, {})[v] = adj.setdefault(u, {}).get(v, 0) + w
        adj.setdefault(v, {})[u] = adj.setdefault(v, {}).get(u, 0) + w
    active = sorted(adj, key=lambda v: (-sum(adj[v].values()), v))
    n_eff = len(active)
    palette = min(k, max(n_eff, 1))
    if n_eff > budget.max_vertices or palette > budget.max_palette:
        raise BudgetError(
            f"{n_eff} active vertices with {palette} colours exceeds budget "
            f"({budget.max_vertices} vertices, {budget.max_palette} colours)"
        )
    pos = {v: i for i, v in enumerate(active)}
    # Earlier neighbours of each vertex in branching order, with weights.
    back = [[(pos[u], w) for u, w in adj[v].items() if pos[u] < i] for i, v in enumerate(active)]
    colours = [0] * n_eff
    best = [math.inf, None]

    def search(i: int, used: int, bad: int) -> None:
        if bad >= best[0]:
            return
        if i == n_eff:
            best[0] = bad
            best[1] = colours.copy()
            return
        top = min(used + 1, palette)
        for c in range(1, top + 1):
            extra = 0
            for j, w in back[i]:
                if colours[j] == c:
                    extra += w
            colours[i] = c
            search(i + 1, max(used, c), bad + extra)
            if best[0] == 0:
                return
        colours[i] = 0

    search(0, 0, 0)
    full = [1] * g.n
    for i, v in enumerate(active):
        full[v - 1] = best[1][i]
    witness = Colouring(tuple(full), k)
    value = colouring_value(g, witness)
    assert value == Fraction(g.m - g.loop_count - best[0], g.m)
    return value, witness


def naive_rho(g: Graph, k: int) -> Fraction:
    """Full enumeration of all k^n colourings; for tiny graphs only."""
    if g.n > 8:
        raise BudgetError("naive enumeration limited to 8 vertices")
    return max(colouring_value(g, c) for c in itertools.product(range(1, k + 1), repeat=g.n))


def is_colourable(g: Graph, k: int, budget: OracleBudget = OracleBudget()) -> bool:
    value, _ = exact_rho(g, k, budget)
    return value == Fraction(g.m - g.loop_count, g.m) and g.loop_count == 0


def mc_p_ell(a: float, ell: int, samples: int = 1_000_000, seed: int = 0, chunk: int = 500_000) -> tuple[float, float]:
    """Direct simulation of the event defining P_l(a); returns (estimate, stderr)."""
    if samples < 1000:
        raise ValueError("need at least 1000 samples")
    if not -1.0 <= a <= 1.0:
        raise ValueError("inner product must lie in [-1, 1]")
    b = math.sqrt(max(0.0, 1.0 - a * a))
    rng = np.random.default_rng(seed)
    hits = 0
    done = 0
    while done < samples:
        size = min(chunk, samples - done)
        x = rng.standard_normal((size, ell))
        y = rng.standard_normal((size, ell))
        w = a * x + b * y
        ok = np.all(x[:, :1] >= x[:, 1:], axis=1) & np.all(w[:, :1] >= w[:, 1:], axis=1)
        hits += int(ok.sum())
        done += size
    p = hits / samples
    return p, math.sqrt(max(p * (1.0 - p), 1.0 / samples) / samples)


def exact_expected_round(g: Graph, vectors: np.ndarray, ell: int, samples: int = 200_000, seed: int = 0) -> tuple[float, float]:
    """Expected value of argmax rounding via Monte Carlo estimates of P_l per edge.

    Returns (estimate, stderr). Distinct inner products are simulated once.
    """
    if g.m == 0:
        raise EmptyGraphError("value undefined for a graph without edges")
    vectors = np.asarray(vectors, dtype=float)
    if vectors.shape[0] != g.n:
        raise ValueError("vector count does not match the graph")
    weight: dict[float, int] = {}
    for u, v, w in g.proper_edges():
        a = float(np.clip(vectors[u - 1] @ vectors[v - 1], -1.0, 1.0))
        key = round(a, 12)
        weight[key] = weight.get(key, 0) + w
    total = 0.0
    var = 0.0
    for idx, (a, w) in enumerate(sorted(weight.items())):
        if a >= 1.0 - 1e-12:
            p, se = 1.0 / ell, 0.0
        else:
            p, se = mc_p_ell(a, ell, samples, seed + idx)
        total += w * (1.0 - ell * p)
        var += (w * ell * se) ** 2
    return total / g.m, math.sqrt(var) / g.m
