"""Deterministic argmax rounding by the method of conditional expectations.

The l x r Gaussian matrix X behind the argmax rounding is fixed one
coordinate at a time, colour by colour. Each coordinate is set to a point of
the support of a normalised binomial NBin(s), i.e. the sum of s fixed
+-1/sqrt(s) bits. At every step the expected value of the rounding, with all
still-free coordinates Gaussian, is evaluated in closed form up to
two-dimensional quadrature:

* colours already fixed give deterministic scores u_ic = a_i . x_c;
* the colour being fixed is a Gaussian with shifted mean and reduced variance;
* untouched colours are standard bivariate normal with correlation a_i . a_j.

Since the expectation is the NBin-weighted mean over the candidate values
(up to the discretization error of NBin(s) against N(0, 1)), some candidate
never lowers it; the final colouring is therefore at least the starting
expectation minus the accumulated discretization error.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import ndtr
from scipy.stats import binom

from .bvn import bvn_cdf
from .graph import Colouring, EmptyGraphError, Graph, colouring_value
from .rounding import RoundingOutcome, _vectors
from .sdp import GramSolution

log = logging.getLogger(__name__)

TINY = 1e-12
SPAN = 8.0
MAX_S = 4096


class ParameterError(ValueError):
    """eps is too small for the requested NBin resolution."""

    def __init__(self, message: str, minimal_s: int | None):
        super().__init__(message)
        self.minimal_s = minimal_s


@dataclass(frozen=True)
class NBinSpec:
    s: int

    def __post_init__(self) -> None:
        if self.s < 1:
            raise ValueError("NBin needs at least one step")

    def support(self) -> tuple[np.ndarray, np.ndarray]:
        """Values (2j - s)/sqrt(s) and binomial weights, j = 0..s."""
        j = np.arange(self.s + 1)
        values = (2.0 * j - self.s) / math.sqrt(self.s)
        weights = binom.pmf(j, self.s, 0.5)
        return values, weights / weights.sum()


@dataclass
class DerandTrace:
    s: int
    start_expectation: float
    final_expectation: float
    discretization_budget: float
    evaluations: int = 0
    shortfall: float = 0.0


def _panels(lo, hi, bp, nodes, wts):
    """Gauss-Legendre nodes on [lo, bp] and [bp, hi] with standard normal weight."""
    bp = np.clip(bp, lo, hi)
    h1 = (bp - lo) / 2.0
    h2 = (hi - bp) / 2.0
    t = np.concatenate([lo[..., None] + h1[..., None] * (nodes + 1.0), bp[..., None] + h2[..., None] * (nodes + 1.0)], axis=-1)
    w = np.concatenate([h1[..., None] * wts, h2[..., None] * wts], axis=-1)
    w = w * np.exp(-t * t / 2.0) / math.sqrt(2.0 * math.pi)
    return t, w


def _orthant(u, v, mu1, mu2, s1, s2, r, strict: bool):
    """Pr[Y1 <= u, Y2 <= v] for (Y1, Y2) ~ N(mu, cov), allowing zero variances.

    Point masses use <= (or < when ``strict``) so lower colours win ties.
    """
    u, v, mu1, mu2, s1, s2, r = np.broadcast_arrays(u, v, mu1, mu2, s1, s2, r)
    d1 = s1 <= TINY
    d2 = s2 <= TINY
    out = np.empty(u.shape)

    def step(x, mu):
        return (mu < x) if strict else (mu <= x)

    m = ~d1 & ~d2
    if m.any():
        out[m] = bvn_cdf((u[m] - mu1[m]) / s1[m], (v[m] - mu2[m]) / s2[m], r[m])
    m = d1 & ~d2
    if m.any():
        out[m] = step(u[m], mu1[m]) * ndtr((v[m] - mu2[m]) / s2[m])
    m = ~d1 & d2
    if m.any():
        out[m] = ndtr((u[m] - mu1[m]) / s1[m]) * step(v[m], mu2[m])
    m = d1 & d2
    if m.any():
        out[m] = step(u[m], mu1[m]) & step(v[m], mu2[m])
    return out


class ConditionalExpectation:
    """Expected rounding value with colours < p fixed and colour p partly fixed."""

    def __init__(self, g: Graph, vecs: np.ndarray, ell: int, nodes: int = 10):
        if g.m == 0:
            raise EmptyGraphError("value undefined for a graph without edges")
        self.g = g
        self.A = np.asarray(vecs, dtype=float)
        self.ell = ell
        self.u, self.v, w = g.edge_arrays()
        self.w = w.astype(float)
        self.m = g.m
        self.rho = np.clip(np.einsum("ij,ij->i", self.A[self.u], self.A[self.v]), -1.0, 1.0)
        x, wt = leggauss(nodes)
        self._gl = (x, wt)
        self.evaluations = 0

    def _quadrant_mean(self, mu1, s1, mu2, s2, r, L1, L2, h, bp1, bp2):
        """E[[Y1 > L1][Y2 > L2] h(Y1, Y2, idx)] for bivariate normal (Y1, Y2); 1-D batch."""
        B = mu1.shape[0]
        out = np.zeros(B)
        d1 = s1 <= TINY
        d2 = s2 <= TINY
        both = d1 & d2
        if both.any():
            idx = np.flatnonzero(both)
            ok = (mu1[idx] > L1[idx]) & (mu2[idx] > L2[idx])
            if ok.any():
                j = idx[ok]
                out[j] = h(mu1[j][:, None], mu2[j][:, None], j)[:, 0]
        main = ~d1
        if main.any():
            idx = np.flatnonzero(main)
            out[idx] = self._cond_integral(mu1[idx], s1[idx], mu2[idx], s2[idx], r[idx], L1[idx], L2[idx], h, bp1[idx], bp2[idx], idx, False)
        swap = d1 & ~d2
        if swap.any():
            idx = np.flatnonzero(swap)
            out[idx] = self._cond_integral(mu2[idx], s2[idx], mu1[idx], s1[idx], r[idx], L2[idx], L1[idx], h, bp2[idx], bp1[idx], idx, True)
        return out

    def _cond_integral(self, mu1, s1, mu2, s2, r, L1, L2, h, bp1, bp2, idx, swapped):
        nodes, wts = self._gl
        lo = np.clip((L1 - mu1) / s1, -SPAN, SPAN)
        hi = np.full_like(lo, SPAN)
        t, wt = _panels(lo, hi, np.where(np.isfinite(bp1), (bp1 - mu1) / s1, (lo + hi) / 2.0), nodes, wts)
        y1 = mu1[:, None] + s1[:, None] * t
        cm = mu2[:, None] + (r * s2)[:, None] * t
        cs = (s2 * np.sqrt(np.maximum(0.0, 1.0 - r * r)))[:, None] * np.ones_like(t)
        point = cs <= TINY
        cs_safe = np.where(point, 1.0, cs)
        lo2 = np.clip((L2[:, None] - cm) / cs_safe, -SPAN, SPAN)
        hi2 = np.full_like(lo2, SPAN)
        bp2n = np.where(np.isfinite(bp2)[:, None], (bp2[:, None] - cm) / cs_safe, (lo2 + hi2) / 2.0)
        tau, wtau = _panels(lo2, hi2, bp2n, nodes, wts)
        y2 = cm[..., None] + cs_safe[..., None] * tau
        # Degenerate conditionals collapse onto the conditional mean.
        npts = tau.shape[-1]
        y2 = np.where(point[..., None], cm[..., None], y2)
        wpoint = (cm > L2[:, None]).astype(float)[..., None] / npts
        wtau = np.where(point[..., None], wpoint, wtau)
        y1b = np.broadcast_to(y1[..., None], y2.shape)
        B = y1.shape[0]
        if swapped:
            vals = h(y2.reshape(B, -1), y1b.reshape(B, -1), idx)
        else:
            vals = h(y1b.reshape(B, -1), y2.reshape(B, -1), idx)
        weights = (wt[..., None] * wtau).reshape(B, -1)
        return np.sum(vals * weights, axis=1)

    def evaluate(self, X: np.ndarray, p: int, nfixed: int, cand: np.ndarray | None = None) -> np.ndarray:
        """Expected value for each candidate value of coordinate ``(p, nfixed - 1)``.

        Colours < p use rows of ``X``; colour p uses its first ``nfixed``
        coordinates (the last replaced by each candidate); the rest are free.
        """
        A, ell = self.A, self.ell
        cand = np.zeros(1) if cand is None else np.asarray(cand, dtype=float)
        C = cand.size
        E = self.u.size
        if E == 0:
            return np.zeros(C)
        self.evaluations += C
        iu, iv = self.u, self.v
        q = ell - p - 1
        if p > 0:
            UD = A @ X[:p].T
            Mi, di = UD[iu].max(axis=1), UD[iu].argmax(axis=1)
            Mj, dj = UD[iv].max(axis=1), UD[iv].argmax(axis=1)
            same = di == dj
        else:
            Mi = np.full(E, -np.inf)
            Mj = np.full(E, -np.inf)
            same = np.zeros(E, dtype=bool)
        if nfixed > 0:
            base = A[:, : nfixed - 1] @ X[p, : nfixed - 1]
            mu = base[:, None] + A[:, nfixed - 1][:, None] * cand[None, :]
        else:
            mu = np.zeros((A.shape[0], C))
        rest = A[:, nfixed:]
        var = np.sum(rest * rest, axis=1)
        sd = np.sqrt(var)
        cov = np.einsum("ij,ij->i", rest[iu], rest[iv])
        with np.errstate(invalid="ignore", divide="ignore"):
            rP = np.where((sd[iu] > TINY) & (sd[iv] > TINY), cov / (sd[iu] * sd[iv]), 0.0)
        rP = np.clip(rP, -1.0, 1.0)

        # Flatten (edge, candidate) into one batch.
        def rep(a):
            return np.repeat(a, C)

        mu_i = mu[iu].ravel()
        mu_j = mu[iv].ravel()
        s_i, s_j, r_p = rep(sd[iu]), rep(sd[iv]), rep(rP)
        Mi_b, Mj_b, rho_b = rep(Mi), rep(Mj), rep(self.rho)
        total = np.zeros(E * C)

        if p > 0 and same.any():
            sameb = rep(same)
            k = np.flatnonzero(sameb)
            term = _orthant(Mi_b[k], Mj_b[k], mu_i[k], mu_j[k], s_i[k], s_j[k], r_p[k], strict=False)
            if q > 0:
                term = term * bvn_cdf(Mi_b[k], Mj_b[k], rho_b[k]) ** q
            total[k] += term

        if q == 0:
            lower = _orthant(Mi_b, np.full_like(Mj_b, np.inf), mu_i, mu_j, s_i, s_j, r_p, strict=False)
            lower2 = _orthant(np.full_like(Mi_b, np.inf), Mj_b, mu_i, mu_j, s_i, s_j, r_p, strict=False)
            both = _orthant(Mi_b, Mj_b, mu_i, mu_j, s_i, s_j, r_p, strict=False)
            total += 1.0 - lower - lower2 + both
        else:

            def h_p(y1, y2, idx):
                return bvn_cdf(y1, y2, rho_b[idx][:, None]) ** q

            total += self._quadrant_mean(mu_i, s_i, mu_j, s_j, r_p, Mi_b, Mj_b, h_p,
                                         np.full(E * C, np.nan), np.full(E * C, np.nan))

            def h_r(y1, y2, idx):
                val = _orthant(y1, y2, mu_i[idx][:, None], mu_j[idx][:, None], s_i[idx][:, None],
                               s_j[idx][:, None], r_p[idx][:, None], strict=True)
                if q > 1:
                    val = val * bvn_cdf(y1, y2, rho_b[idx][:, None]) ** (q - 1)
                return val

            ones = np.ones(E * C)
            zeros = np.zeros(E * C)
            total += q * self._quadrant_mean(zeros, ones, zeros, ones, rho_b, Mi_b, Mj_b, h_r,
                                             np.where(s_i <= 0.5, mu_i, np.nan), np.where(s_j <= 0.5, mu_j, np.nan))

        same_prob = np.clip(total.reshape(E, C), 0.0, 1.0)
        return (self.w[:, None] * (1.0 - same_prob)).sum(axis=0) / self.m


def discretization_budget(ce: ConditionalExpectation, s: int, weight_floor: float = 1e-12) -> float:
    """Estimated total loss from replacing every coordinate by NBin(s).

    Probes the coordinate with the largest column norm at the root and
    charges every one of the l * r coordinates that same gap.
    """
    A = ce.A
    r = A.shape[1]
    X = np.zeros((ce.ell, r))
    root = float(ce.evaluate(X, 0, 0)[0])
    d = int(np.argmax(np.sum(A * A, axis=0)))
    if d != 0:
        perm = list(range(r))
        perm[0], perm[d] = perm[d], perm[0]
        ce = ConditionalExpectation(ce.g, A[:, perm], ce.ell, len(ce._gl[0]))
    vals, wts = NBinSpec(s).support()
    keep = wts >= weight_floor
    f = ce.evaluate(X, 0, 1, vals[keep])
    dropped = float(wts[~keep].sum())
    gap = abs(float(f @ wts[keep]) - root) + dropped
    return ce.ell * r * gap


def minimal_s(ce: ConditionalExpectation, eps: float) -> int | None:
    s = 1
    while s <= MAX_S:
        if discretization_budget(ce, s) <= eps / 2.0:
            return s
        s *= 2
    return None


def derand_round(
    g: Graph,
    sol: GramSolution | np.ndarray,
    ell: int,
    eps: float,
    nbin: NBinSpec | None = None,
    nodes: int = 10,
    batch: int = 6,
    return_trace: bool = False,
):
    """Deterministic l-colouring with value >= expected argmax value - eps."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    if ell < 2:
        raise ValueError("palette must be at least 2")
    vecs = _vectors(g, sol)
    ce = ConditionalExpectation(g, vecs, ell, nodes)
    if nbin is None:
        s = minimal_s(ce, eps)
        if s is None:
            raise ParameterError(f"no NBin resolution up to {MAX_S} meets eps={eps}", None)
    else:
        s = nbin.s
        budget = discretization_budget(ce, s)
        if budget > eps / 2.0:
            need = minimal_s(ce, eps)
            raise ParameterError(
                f"NBin({s}) discretization budget {budget:.3g} exceeds eps/2={eps / 2:.3g}; "
                f"smallest feasible s is {need}",
                need,
            )
    budget = discretization_budget(ce, s)
    vals, wts = NBinSpec(s).support()
    order = np.argsort(-wts, kind="stable")
    r = vecs.shape[1]
    X = np.zeros((ell, r))
    start = current = float(ce.evaluate(X, 0, 0)[0])
    trace = DerandTrace(s, start, start, budget)
    for p in range(ell):
        for d in range(r):
            best_val, best_z = -math.inf, 0.0
            for b0 in range(0, len(order), batch):
                chunk = vals[order[b0 : b0 + batch]]
                f = ce.evaluate(X, p, d + 1, chunk)
                i = int(np.argmax(f))
                if f[i] > best_val:
                    best_val, best_z = float(f[i]), float(chunk[i])
                if best_val >= current - 1e-12:
                    break
            trace.shortfall += max(0.0, current - best_val)
            X[p, d] = best_z
            current = best_val
    trace.final_expectation = current
    trace.evaluations = ce.evaluations
    colours = np.argmax(vecs @ X.T, axis=1) + 1
    col = Colouring(tuple(int(c) for c in colours), ell)
    value = colouring_value(g, col)
    if abs(float(value) - current) > 1e-6:
        log.warning("final conditional expectation %.9f differs from value %.9f", current, float(value))
    out = RoundingOutcome(col, value, "derand", 1, None)
    return (out, trace) if return_trace else out
