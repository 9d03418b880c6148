"""Independent reference implementations used only by the tests."""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate, stats


def bvn_quad(h: float, v: float, rho: float) -> float:
    """Pr[X <= h, Y <= v] by adaptive quadrature of phi(x) Phi((v - rho x)/sqrt(1 - rho^2))."""
    s = math.sqrt(1.0 - rho * rho)

    def f(x):
        return stats.norm.pdf(x) * stats.norm.cdf((v - rho * x) / s)

    lo = -40.0
    val, _ = integrate.quad(f, lo, min(h, 40.0), epsabs=1e-15, epsrel=1e-13, limit=400)
    return val


def psd_min_common_inner_product(n: int) -> float:
    """Smallest a for which the n x n matrix with unit diagonal and constant off-diagonal a is PSD."""
    lo, hi = -1.0, 1.0
    for _ in range(200):
        mid = (lo + hi) / 2
        gram = np.full((n, n), mid)
        np.fill_diagonal(gram, 1.0)
        if np.linalg.eigvalsh(gram).min() >= -1e-14:
            hi = mid
        else:
            lo = mid
    return hi


def cvxpy_relaxation(g, k: int) -> float:
    """Interior-point value of the vector relaxation (dense PSD formulation)."""
    import cvxpy as cp

    n = g.n
    X = cp.Variable((n, n), PSD=True)
    cons = [cp.diag(X) == 1, X >= -1.0 / (k - 1)]
    obj = 0
    for u, v, w in g.proper_edges():
        obj = obj + w * (1 - X[u - 1, v - 1])
    prob = cp.Problem(cp.Maximize((k - 1) / k * obj / g.m), cons)
    prob.solve(solver=cp.CLARABEL)
    return float(prob.value)


def naive_pcp_edges(inst, k, T, r):
    """Literal transcription of the reduction: a Counter of unordered vertex pairs.

    Vertices are keyed (b, x) with x a tuple of colours in 1..k.
    """
    import itertools
    from collections import Counter
    from fractions import Fraction

    p = inst.p
    tuples = list(itertools.product(range(1, k + 1), repeat=p))
    index = {t: i for i, t in enumerate(tuples)}
    width = p * r
    out = Counter()
    for a in range(1, inst.n_left + 1):
        mine = [(b, perm) for a2, b, perm in inst.edges if a2 == a]
        for b1, pi1 in mine:
            for b2, pi2 in mine:
                for x in itertools.product(range(1, k + 1), repeat=width):
                    for y in itertools.product(range(1, k + 1), repeat=width):
                        prob = Fraction(1)
                        for j in range(r):
                            xb = x[j * p:(j + 1) * p]
                            yb = y[j * p:(j + 1) * p]
                            prob *= T.matrix[index[xb]][index[yb]]
                        if prob == 0:
                            continue
                        mult = prob / T.grain**r
                        assert mult.denominator == 1
                        u = (b1, tuple(x[i - 1] for i in pi1))
                        v = (b2, tuple(y[i - 1] for i in pi2))
                        out[tuple(sorted((u, v)))] += int(mult)
    return out
