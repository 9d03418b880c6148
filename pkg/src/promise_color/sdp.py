"""Vector relaxation of max k-colouring solved in low-rank factored form.

maximize   (1/m) sum_{(i,j) in E} ((k-1)/k) (1 - a_i . a_j)
subject to |a_i| = 1,  a_i . a_j >= -1/(k-1)  for all i != j.

Rows of ``Y`` are normalized inside the objective, so unit norms hold
exactly. The pairwise floor is handled by an augmented Lagrangian whose inner
problems are solved with L-BFGS.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

from .graph import EmptyGraphError, Graph
from .rng import generator

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    """No restart reached the feasibility tolerance."""

    def __init__(self, message: str, best: "GramSolution | None", report: dict):
        super().__init__(message)
        self.best = best
        self.report = report


@dataclass(frozen=True)
class SolverOptions:
    target_eps: float = 1e-4
    feas_tol: float = 1e-6
    max_iters: int = 60
    inner_iters: int = 500
    restarts: int = 3
    seed: int = 0
    penalty_init: float = 10.0
    penalty_growth: float = 4.0
    penalty_max: float = 1e8
    rank: int | None = None

    def __post_init__(self) -> None:
        if self.target_eps <= 0 or self.feas_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.restarts < 1 or self.max_iters < 1:
            raise ValueError("need at least one restart and one iteration")


@dataclass(frozen=True)
class GramSolution:
    vectors: np.ndarray
    objective: float
    k: int
    feas_tol: float
    report: dict = field(default_factory=dict, compare=False)

    @property
    def rank(self) -> int:
        return int(self.vectors.shape[1])

    @property
    def n(self) -> int:
        return int(self.vectors.shape[0])

    def gram(self) -> np.ndarray:
        return self.vectors @ self.vectors.T

    def to_json(self) -> str:
        return json.dumps(
            {
                "r": self.rank,
                "vectors": [[float(x) for x in row] for row in self.vectors],
                "objective": float(self.objective),
                "k": self.k,
                "feas_tol": float(self.feas_tol),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "GramSolution":
        data = json.loads(text)
        vecs = np.array(data["vectors"], dtype=float).reshape(-1, data["r"])
        return cls(vecs, float(data["objective"]), int(data["k"]), float(data["feas_tol"]))

    def to_text(self) -> str:
        lines = [str(self.rank), str(self.n)]
        lines += [" ".join(f"{x:.17g}" for x in row) for row in self.vectors]
        lines += [f"{self.objective:.17g}", str(self.k), f"{self.feas_tol:.17g}"]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "GramSolution":
        lines = text.split("\n")
        r, n = int(lines[0]), int(lines[1])
        rows = [[float(x) for x in lines[2 + i].split()] for i in range(n)]
        vecs = np.array(rows, dtype=float).reshape(n, r)
        return cls(vecs, float(lines[2 + n]), int(lines[3 + n]), float(lines[4 + n]))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path: str | Path) -> "GramSolution":
        return cls.from_json(Path(path).read_text())


def default_rank(n: int) -> int:
    return max(1, min(n, math.ceil(math.sqrt(2 * n)) + 2))


def simplex_vectors(k: int, n: int) -> np.ndarray:
    """k unit vectors in R^n with pairwise inner product -1/(k-1) (rows)."""
    if k < 2:
        raise ValueError("need k >= 2")
    if n < k:
        raise ValueError(f"need dimension n >= k, got n={n}, k={k}")
    out = np.zeros((k, n))
    out[:, :k] = 1.0
    out[np.arange(k), np.arange(k)] = 1.0 - k
    return out / math.sqrt(k * (k - 1))


def relaxation_objective(g: Graph, sol: GramSolution | np.ndarray, k: int | None = None) -> float:
    """Recompute the relaxation value from the vectors."""
    if isinstance(sol, GramSolution):
        vecs, k = sol.vectors, sol.k
    else:
        vecs = np.asarray(sol, dtype=float)
    if k is None:
        raise ValueError("palette size required")
    if vecs.shape[0] != g.n:
        raise ValueError(f"{vecs.shape[0]} vectors for a graph on {g.n} vertices")
    if g.m == 0:
        raise EmptyGraphError("relaxation undefined for a graph without edges")
    u, v, w = g.edge_arrays()
    dots = np.einsum("ij,ij->i", vecs[u], vecs[v])
    return float((k - 1) / k * np.sum(w * (1.0 - dots)) / g.m)


def feasibility_report(sol: GramSolution | np.ndarray, k: int) -> dict:
    vecs = sol.vectors if isinstance(sol, GramSolution) else np.asarray(sol)
    norms = np.linalg.norm(vecs, axis=1)
    gram = vecs @ vecs.T
    n = gram.shape[0]
    off = gram[~np.eye(n, dtype=bool)] if n > 1 else np.zeros(0)
    floor = -1.0 / (k - 1)
    viol = float(max(0.0, floor - off.min())) if off.size else 0.0
    return {"norm_error": float(np.max(np.abs(norms - 1.0))) if n else 0.0, "max_violation": viol}


def _edge_weights(g: Graph) -> np.ndarray:
    W = np.zeros((g.n, g.n))
    for u, v, w in g.proper_edges():
        W[u - 1, v - 1] += w
        W[v - 1, u - 1] += w
    return W


def _solve_once(W: np.ndarray, k: int, rank: int, opts: SolverOptions, rng: np.random.Generator):
    n = W.shape[0]
    floor = -1.0 / (k - 1)
    offdiag = ~np.eye(n, dtype=bool)
    lam = np.zeros((n, n))
    rho = opts.penalty_init
    y = rng.standard_normal((n, rank))
    last_viol = math.inf

    def unpack(flat):
        Y = flat.reshape(n, rank)
        norms = np.linalg.norm(Y, axis=1, keepdims=True)
        norms = np.maximum(norms, 1e-12)
        return Y, norms, Y / norms

    def fun(flat):
        _, norms, A = unpack(flat)
        G = A @ A.T
        slack = G - floor
        act = np.where(offdiag, np.maximum(0.0, lam - rho * slack), 0.0)
        # Edge term counts each pair twice in the symmetric W, hence the 1/2.
        val = 0.5 * np.sum(W * G) + np.sum(act * act - lam * lam) / (4.0 * rho)
        C = 0.5 * W - 0.5 * act
        grad_a = 2.0 * C @ A
        radial = np.sum(grad_a * A, axis=1, keepdims=True)
        grad_y = (grad_a - radial * A) / norms
        return val, grad_y.ravel()

    for outer in range(opts.max_iters):
        res = minimize(fun, y.ravel(), jac=True, method="L-BFGS-B",
                       options={"maxiter": opts.inner_iters, "gtol": 1e-10, "ftol": 1e-15})
        _, _, A = unpack(res.x)
        y = A.copy()
        G = A @ A.T
        slack = G - floor
        viol = float(np.max(np.where(offdiag, np.maximum(0.0, -slack), 0.0))) if n > 1 else 0.0
        # Complementarity: a multiplier left over from an infeasible phase can
        # hold the iterate strictly inside the floor; feasibility alone is not enough.
        comp = float(np.max(np.abs(np.where(offdiag, np.minimum(slack, lam / rho), 0.0)))) if n > 1 else 0.0
        lam = np.where(offdiag, np.maximum(0.0, lam - rho * slack), 0.0)
        if viol <= opts.feas_tol * 0.01 and comp <= opts.target_eps * 1e-2:
            break
        if viol > 0.25 * last_viol:
            rho = min(rho * opts.penalty_growth, opts.penalty_max)
            if viol > 0.1 and viol > 0.9 * last_viol:
                # Stalled, typically at a saddle with antipodal or coincident rows.
                y = y + 1e-3 * rng.standard_normal(y.shape)
        last_viol = viol
    return y, outer + 1


def solve_relaxation(g: Graph, k: int, opts: SolverOptions = SolverOptions()) -> GramSolution:
    """Best feasible factorized solution over seeded restarts."""
    if k < 2:
        raise ValueError("need k >= 2")
    if g.m == 0:
        raise EmptyGraphError("relaxation undefined for a graph without edges")
    n = g.n
    rank = opts.rank or default_rank(n)
    W = _edge_weights(g)
    if not W.any():
        vecs = np.zeros((n, rank))
        vecs[:, 0] = 1.0
        return GramSolution(vecs, 0.0, k, 0.0, {"restarts": 0})
    best = None
    best_any = None
    for restart in range(opts.restarts):
        rng = generator(opts.seed, 0x5D9, restart)
        vecs, iters = _solve_once(W, k, rank, opts, rng)
        obj = relaxation_objective(g, vecs, k)
        feas = feasibility_report(vecs, k)
        tol = max(feas["norm_error"], feas["max_violation"])
        log.debug("restart %d: objective %.8f violation %.2e after %d rounds", restart, obj, tol, iters)
        cand = GramSolution(vecs, obj, k, tol, {"restart": restart, "outer_iterations": iters, **feas})
        if best_any is None or tol < best_any.feas_tol:
            best_any = cand
        if tol <= opts.feas_tol and (best is None or obj > best.objective):
            best = cand
    if best is None:
        raise SolverError(
            f"no restart reached feasibility {opts.feas_tol:g} (best {best_any.feas_tol:.2e})",
            best_any,
            dict(best_any.report),
        )
    return best
