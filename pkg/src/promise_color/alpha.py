"""Rounding probabilities and approximation constants.

``P_l(a)`` is the probability that index 1 wins the argmax in two families of
``l`` standard Gaussians whose paired coordinates have correlation ``a``.
Conditioning on the winning pair ``(x1, y1)`` the other ``l - 1`` pairs are
independent, and each pair ``(x_c, a x_c + b y_c)`` is standard bivariate
normal with correlation ``a``, so

    P_l(a) = E[ Phi2(x1, a x1 + b y1; a) ** (l - 1) ],   b = sqrt(1 - a^2),

a smooth two-dimensional integral over ``[-8, 8]^2``.
"""

from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import ndtr

from .bvn import bvn_cdf

log = logging.getLogger(__name__)

TRUNCATION = 8.0
# Gaussian mass outside [-8, 8]^2.
TAIL_BOUND = 4.0 * float(ndtr(-TRUNCATION))
GRID_POINTS = 400
A_MAX = 1.0 - 1e-6


class QuadratureError(RuntimeError):
    """Requested accuracy not reached; ``best`` holds the last estimate."""

    def __init__(self, message: str, best: "AlphaEstimate"):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class AlphaEstimate:
    value: float
    abs_error_bound: float
    method: str
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class KmsConstants:
    k: int
    ell: int
    t: int
    x_k: float
    u_k: float


@lru_cache(maxsize=None)
def _rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = leggauss(n)
    x = x * TRUNCATION
    w = w * TRUNCATION
    dens = np.exp(-x * x / 2.0) / math.sqrt(2.0 * math.pi)
    return x, w * dens


def _base_cdf(a: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Phi2(x, a x + b y; a) on the tensor grid and the matching weights."""
    x, w = _rule(n)
    a = min(max(a, -1.0), 1.0)
    b = math.sqrt(max(0.0, 1.0 - a * a))
    xx, yy = np.meshgrid(x, x, indexing="ij")
    ww = np.outer(w, w)
    vals = bvn_cdf(xx, a * xx + b * yy, a)
    return vals.ravel(), ww.ravel()


def p_ell_values(a: float, ells: Sequence[int], n: int = 64) -> np.ndarray:
    """P_l(a) for several palettes at one fixed grid size (no error control)."""
    base, ww = _base_cdf(float(a), n)
    logb = np.log(np.maximum(base, 1e-300))
    return np.array([float(ww @ np.exp((ell - 1) * logb)) for ell in ells])


def p_ell(a: float, ell: int, tol: float = 1e-7, max_nodes: int = 512) -> AlphaEstimate:
    """P_l(a) with grid doubling until successive estimates agree within ``tol``."""
    if ell < 2:
        raise ValueError("palette must be at least 2")
    if not -1.0 <= a <= 1.0:
        raise ValueError("inner product must lie in [-1, 1]")
    n = 48
    prev = float(p_ell_values(a, [ell], n)[0])
    while True:
        n2 = 2 * n
        cur = float(p_ell_values(a, [ell], n2)[0])
        err = abs(cur - prev) + TAIL_BOUND
        est = AlphaEstimate(cur, err, "quadrature", {"nodes_per_axis": n2})
        if err <= tol:
            return est
        if n2 >= max_nodes:
            raise QuadratureError(f"P_{ell}({a}) did not reach tolerance {tol}", est)
        n, prev = n2, cur


def n_ell(a: float, ell: int, tol: float = 1e-7) -> float:
    """Probability that both argmaxes agree, ``l * P_l(a)``."""
    return ell * p_ell(a, ell, tol).value


def _ratio(a: np.ndarray | float, k: int, ell: int, p: np.ndarray | float):
    return k * (1.0 - ell * p) / ((k - 1) * (1.0 - a))


def _golden(f, lo: float, hi: float, tol: float = 1e-7) -> tuple[float, float]:
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - inv * (hi - lo)
    d = lo + inv * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol:
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - inv * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + inv * (hi - lo)
            fd = f(d)
    if fc <= fd:
        return c, fc
    return d, fd


def _cache_path() -> Path:
    env = os.environ.get("PROMISE_COLOR_CACHE")
    if env:
        return Path(env)
    base = Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache"))
    return base / "promise_color" / "alpha.json"


def _cache_load() -> dict:
    path = _cache_path()
    try:
        return json.loads(path.read_text())
    except (OSError, ValueError):
        return {}


def _cache_store(key: str, est: AlphaEstimate) -> None:
    path = _cache_path()
    data = _cache_load()
    data[key] = est.to_dict()
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(data, indent=1, sort_keys=True))
        tmp.replace(path)
    except OSError as exc:
        log.warning("could not write alpha cache %s: %s", path, exc)


def _cached(key: str) -> AlphaEstimate | None:
    entry = _cache_load().get(key)
    if entry is None:
        return None
    return AlphaEstimate(**entry)


def _check_kl(k: int, ell: int) -> None:
    if k < 2 or ell < k:
        raise ValueError(f"need 2 <= k <= l, got k={k}, l={ell}")


def alpha_kl(
    k: int,
    ell: int,
    tol: float = 5e-4,
    grid_points: int = GRID_POINTS,
    nodes: int = 64,
    use_cache: bool = False,
) -> AlphaEstimate:
    """Worst ratio between rounded proper-edge probability and relaxation contribution.

    Minimizes ``k (1 - l P_l(a)) / ((k - 1)(1 - a))`` over ``[-1/(k-1), 1)``.
    """
    _check_kl(k, ell)
    key = f"alpha:{k}:{ell}:{tol:g}"
    if use_cache:
        hit = _cached(key)
        if hit is not None:
            return hit
    est = _alpha_many(k, [ell], grid_points, nodes)[ell]
    if est.abs_error_bound > tol:
        raise QuadratureError(f"alpha_{k}{ell} error bound {est.abs_error_bound:.2e} exceeds {tol}", est)
    if use_cache:
        _cache_store(key, est)
    return est


def _alpha_many(k: int, ells: Sequence[int], grid_points: int, nodes: int) -> dict[int, AlphaEstimate]:
    lo, hi = -1.0 / (k - 1), A_MAX
    grid = np.linspace(lo, hi, grid_points)
    pgrid = np.array([p_ell_values(a, ells, nodes) for a in grid])
    out = {}
    for j, ell in enumerate(ells):
        vals = _ratio(grid, k, ell, pgrid[:, j])
        i = int(np.argmin(vals))

        def point(a: float, ell=ell) -> float:
            return float(_ratio(a, k, ell, p_ell_values(a, [ell], nodes)[0]))

        blo = float(grid[max(i - 1, 0)])
        bhi = float(grid[min(i + 1, grid_points - 1)])
        a_star, v_star = _golden(point, blo, bhi)
        if vals[i] < v_star:
            a_star, v_star = float(grid[i]), float(vals[i])
        # Quadrature error at the minimizer, propagated through the ratio.
        p_fine = p_ell(a_star, ell, tol=1e-9)
        p_coarse = p_ell_values(a_star, [ell], nodes)[0]
        p_err = p_fine.abs_error_bound + abs(p_fine.value - p_coarse)
        v_fine = float(_ratio(a_star, k, ell, p_fine.value))
        ratio_err = k * ell * p_err / ((k - 1) * (1.0 - a_star))
        out[ell] = AlphaEstimate(
            v_fine,
            ratio_err + abs(v_fine - v_star) + 1e-7,
            "minimization",
            {
                "k": k,
                "ell": ell,
                "a_star": a_star,
                "grid_points": grid_points,
                "nodes_per_axis": nodes,
                "at_left_endpoint": bool(abs(a_star - lo) < 1e-6),
            },
        )
    return out


def alpha_table(
    k_range: Iterable[int] = range(3, 16),
    ell_range: Iterable[int] = range(3, 16),
    grid_points: int = GRID_POINTS,
    nodes: int = 64,
    use_cache: bool = False,
) -> dict[tuple[int, int], AlphaEstimate]:
    """Upper-triangular table of alpha_{k l}; cells with l < k are absent."""
    ells_all = sorted(set(ell_range))
    table: dict[tuple[int, int], AlphaEstimate] = {}
    for k in sorted(set(k_range)):
        ells = [ell for ell in ells_all if ell >= k]
        if not ells:
            continue
        todo = []
        for ell in ells:
            hit = _cached(f"alpha:{k}:{ell}:{5e-4:g}") if use_cache else None
            if hit is not None:
                table[(k, ell)] = hit
            else:
                todo.append(ell)
        if todo:
            for ell, est in _alpha_many(k, todo, grid_points, nodes).items():
                table[(k, ell)] = est
                if use_cache:
                    _cache_store(f"alpha:{k}:{ell}:{5e-4:g}", est)
    return table


def table_csv(table: dict[tuple[int, int], AlphaEstimate]) -> str:
    lines = ["k,l,alpha,error_bound,a_star"]
    for (k, ell), est in sorted(table.items()):
        lines.append(f"{k},{ell},{est.value:.6f},{est.abs_error_bound:.2e},{est.diagnostics.get('a_star', float('nan')):.6f}")
    return "\n".join(lines) + "\n"


def table_text(table: dict[tuple[int, int], AlphaEstimate]) -> str:
    """Rows k, columns l, three decimals without the leading zero."""
    ks = sorted({k for k, _ in table})
    ells = sorted({ell for _, ell in table})
    head = "k\\l " + " ".join(f"{ell:>5d}" for ell in ells)
    rows = [head]
    for k in ks:
        cells = []
        for ell in ells:
            est = table.get((k, ell))
            cells.append(f"{est.value:.3f}"[1:].rjust(5) if est is not None else " " * 5)
        rows.append(f"{k:>3d} " + " ".join(cells))
    return "\n".join(rows) + "\n"


def kms_constants(k: int, ell: int) -> KmsConstants:
    """t = floor(log2 l), X_k = 1 - arccos(-1/(k-1))/pi and u_k = -log2 X_k."""
    if k < 2 or ell < 2:
        raise ValueError("need k, l >= 2")
    t = ell.bit_length() - 1
    x_k = 1.0 - math.acos(-1.0 / (k - 1)) / math.pi
    u_k = -math.log2(x_k) if x_k > 0 else math.inf
    return KmsConstants(k, ell, t, x_k, u_k)


def kms_proper_probability(a, t: int):
    """Chance that ``t`` random hyperplanes separate unit vectors with inner product ``a``."""
    a = np.clip(a, -1.0, 1.0)
    return 1.0 - (1.0 - np.arccos(a) / np.pi) ** t


def alpha_prime_kl(k: int, ell: int, grid_points: int = 4000) -> AlphaEstimate:
    """Approximation ratio of the hyperplane rounding with t = floor(log2 l) cuts."""
    if k <= 2 or ell < k:
        raise ValueError(f"need 2 < k <= l, got k={k}, l={ell}")
    const = kms_constants(k, ell)
    lo = -1.0 / (k - 1)

    def ratio(a):
        return k * kms_proper_probability(a, const.t) / ((k - 1) * (1.0 - a))

    grid = np.linspace(lo, A_MAX, grid_points)
    vals = ratio(grid)
    i = int(np.argmin(vals))
    blo = float(grid[max(i - 1, 0)])
    bhi = float(grid[min(i + 1, grid_points - 1)])
    a_star, v_star = _golden(lambda a: float(ratio(a)), blo, bhi, tol=1e-12)
    if vals[i] < v_star:
        a_star, v_star = float(grid[i]), float(vals[i])
    closed = 1.0 - const.x_k ** const.t
    return AlphaEstimate(
        v_star,
        1e-9,
        "minimization",
        {
            "k": k,
            "ell": ell,
            "t": const.t,
            "a_star": a_star,
            "closed_form": closed,
            "at_left_endpoint": bool(abs(a_star - lo) < 1e-6),
            "x_k": const.x_k,
            "u_k": const.u_k,
        },
    )


def ft(x, T: float):
    """F_T(x) = x^2 (1 + T ln x) with F_T(0) = 0."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = x * x * (1.0 + T * np.log(x))
    return np.where(x > 0, out, 0.0)


@dataclass
class FtReport:
    T: float
    ell: int
    points_checked: int
    min_slack: float
    violations: int
    witness: list[float] | None = None

    @property
    def ok(self) -> bool:
        return self.violations == 0


def ft_lower_bound(T: float, ell: int) -> float:
    return 1.0 / ell - T * math.log(ell) / ell - 4.0 * ell * math.exp(-1.0 / T)


def ft_bound_check(T: float, ell: int, trials: int = 10_000, seed: int = 0) -> FtReport:
    """Audit sum F_T(x_i) >= 1/l - T ln l / l - 4 l e^(-1/T) on the simplex.

    Random Dirichlet points plus structured ones: uniform, one-hot, two-block
    splits and points pinned at the minimizer of F_T.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    if ell >= math.exp(1.0 / T):
        raise ValueError("need l < e^(1/T)")
    rng = np.random.default_rng(seed)
    pts = [rng.dirichlet(np.ones(ell), size=trials)]
    pts.append(rng.dirichlet(np.full(ell, 0.2), size=max(1, trials // 4)))
    structured = [np.full(ell, 1.0 / ell), np.eye(ell)[0]]
    for j in range(1, ell):
        for mass in (0.5, 0.9, 0.99, 1.0 - 1e-6):
            x = np.zeros(ell)
            x[:j] = mass / j
            x[j:] = (1.0 - mass) / (ell - j)
            structured.append(x)
    dip = math.exp(-1.0 / T - 1.5)
    for j in range(1, ell):
        x = np.full(ell, dip)
        x[:j] = (1.0 - (ell - j) * dip) / j
        if np.all(x >= 0):
            structured.append(x)
    pts.append(np.array(structured))
    allpts = np.vstack(pts)
    sums = ft(allpts, T).sum(axis=1)
    slack = sums - ft_lower_bound(T, ell)
    bad = np.flatnonzero(slack < 0)
    witness = allpts[bad[0]].tolist() if bad.size else None
    return FtReport(T, ell, len(allpts), float(slack.min()), int(bad.size), witness)
