"""Randomized roundings of a vector solution into an l-colouring."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .alpha import kms_proper_probability, p_ell
from .graph import Colouring, EmptyGraphError, Graph, colouring_value
from .rng import derive_seed, generator
from .sdp import GramSolution

METHODS = ("fj", "kms", "derand")


@dataclass(frozen=True)
class RoundingOutcome:
    colouring: Colouring
    achieved_value: Fraction
    method: str
    trials_used: int
    seed: int | None

    @property
    def palette(self) -> int:
        return self.colouring.palette

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "seed": self.seed,
            "palette": self.palette,
            "trials_used": self.trials_used,
            "colours": list(self.colouring.colours),
            "achieved_value": str(self.achieved_value),
            "achieved_value_float": float(self.achieved_value),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _vectors(g: Graph, sol: GramSolution | np.ndarray) -> np.ndarray:
    vecs = sol.vectors if isinstance(sol, GramSolution) else np.asarray(sol, dtype=float)
    if vecs.ndim != 2 or vecs.shape[0] != g.n:
        raise ValueError(f"solution has {vecs.shape[0] if vecs.ndim else 0} vectors, graph has {g.n} vertices")
    return vecs


def _outcome(g: Graph, colours: np.ndarray, ell: int, method: str, trials: int, seed) -> RoundingOutcome:
    col = Colouring(tuple(int(c) for c in colours), ell)
    return RoundingOutcome(col, colouring_value(g, col), method, trials, seed)


def fj_colours(vecs: np.ndarray, ell: int, rng: np.random.Generator) -> np.ndarray:
    """Argmax of a_i . x_c over l Gaussian directions; ties go to the lowest colour."""
    x = rng.standard_normal((ell, vecs.shape[1]))
    return np.argmax(vecs @ x.T, axis=1) + 1


def kms_colours(vecs: np.ndarray, ell: int, rng: np.random.Generator) -> np.ndarray:
    """Side pattern against t = floor(log2 l) random hyperplanes.

    Hyperplane j bisects Gaussian vectors x_j and y_j; side 0 means
    a . x_j >= a . y_j. Bit j of the pattern is the side of hyperplane j.
    """
    t = ell.bit_length() - 1
    x = rng.standard_normal((t, vecs.shape[1]))
    y = rng.standard_normal((t, vecs.shape[1]))
    bits = (vecs @ x.T < vecs @ y.T).astype(np.int64)
    return bits @ (1 << np.arange(t)) + 1


def fj_round(g: Graph, sol: GramSolution | np.ndarray, ell: int, seed: int) -> RoundingOutcome:
    if ell < 2:
        raise ValueError("palette must be at least 2")
    colours = fj_colours(_vectors(g, sol), ell, generator(seed))
    return _outcome(g, colours, ell, "fj", 1, seed)


def kms_round(g: Graph, sol: GramSolution | np.ndarray, ell: int, seed: int) -> RoundingOutcome:
    if ell < 2:
        raise ValueError("palette must be at least 2")
    colours = kms_colours(_vectors(g, sol), ell, generator(seed))
    return _outcome(g, colours, ell, "kms", 1, seed)


def trial_seed(seed: int, trial: int) -> int:
    """Trial 0 uses the seed itself so a single trial matches a direct call."""
    return seed if trial == 0 else derive_seed(seed, trial)


def best_of(
    g: Graph, sol: GramSolution | np.ndarray, ell: int, method: str = "fj", trials: int = 1, seed: int = 0
) -> RoundingOutcome:
    """Best of ``trials`` independent roundings; ties keep the earliest."""
    if trials < 1:
        raise ValueError("need at least one trial")
    rounder = {"fj": fj_round, "kms": kms_round}.get(method)
    if rounder is None:
        raise ValueError(f"unknown randomized method {method!r}")
    best = None
    for i in range(trials):
        out = rounder(g, sol, ell, trial_seed(seed, i))
        if best is None or out.achieved_value > best.achieved_value:
            best = out
    return RoundingOutcome(best.colouring, best.achieved_value, method, trials, best.seed)


def trial_values(
    g: Graph, sol: GramSolution | np.ndarray, ell: int, method: str, trials: int, seed: int = 0
) -> np.ndarray:
    """Values of the roundings ``best_of`` would try, as floats (fast path)."""
    if g.m == 0:
        raise EmptyGraphError("value undefined for a graph without edges")
    vecs = _vectors(g, sol)
    colour_fn = {"fj": fj_colours, "kms": kms_colours}[method]
    u, v, w = g.edge_arrays()
    out = np.empty(trials)
    for i in range(trials):
        c = colour_fn(vecs, ell, generator(trial_seed(seed, i)))
        out[i] = np.sum(w * (c[u] != c[v])) / g.m
    return out


def edge_inner_products(g: Graph, sol: GramSolution | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    vecs = _vectors(g, sol)
    u, v, w = g.edge_arrays()
    dots = np.clip(np.einsum("ij,ij->i", vecs[u], vecs[v]), -1.0, 1.0)
    return dots, w


def expected_fj_value(g: Graph, sol: GramSolution | np.ndarray, ell: int, tol: float = 1e-9) -> float:
    """Exact expectation of the argmax rounding: mean over edges of 1 - l P_l(a_i . a_j)."""
    if g.m == 0:
        raise EmptyGraphError("value undefined for a graph without edges")
    dots, w = edge_inner_products(g, sol)
    cache: dict[float, float] = {}
    total = 0.0
    for a, wt in zip(dots, w):
        key = round(float(a), 13)
        if key not in cache:
            term = 0.0 if key >= 1.0 else 1.0 - ell * p_ell(key, ell, tol).value
            cache[key] = min(1.0, max(0.0, term))
        total += wt * cache[key]
    return total / g.m


def expected_kms_value(g: Graph, sol: GramSolution | np.ndarray, ell: int) -> float:
    if g.m == 0:
        raise EmptyGraphError("value undefined for a graph without edges")
    dots, w = edge_inner_products(g, sol)
    t = ell.bit_length() - 1
    return float(np.sum(w * kms_proper_probability(dots, t)) / g.m)


def kms_edge_probabilities(g: Graph, sol: GramSolution | np.ndarray, ell: int) -> np.ndarray:
    dots, _ = edge_inner_products(g, sol)
    return kms_proper_probability(dots, ell.bit_length() - 1)


def stderr(values: np.ndarray) -> float:
    return float(np.std(values, ddof=1) / math.sqrt(len(values)))
