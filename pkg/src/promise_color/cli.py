"""Command-line front end.

Exit codes: 0 ok, 1 usage or parameter error, 2 input parse error,
3 solver failure, 4 budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .alpha import QuadratureError, alpha_kl, alpha_prime_kl, alpha_table, table_csv, table_text
from .derand import ParameterError, derand_round
from .gadgets import (
    LabelCoverLabelling,
    bonami_beckner,
    completeness_value,
    parse_label_cover,
    parse_markov,
    pcp_reduce,
    scale_gadget,
)
from .graph import GraphError, ParseError, parse_graph
from .oracle import BudgetError, OracleBudget, exact_rho
from .rounding import best_of, expected_fj_value, expected_kms_value
from .sdp import GramSolution, SolverError, SolverOptions, solve_relaxation

SCHEMA = 1
EXIT_USAGE, EXIT_PARSE, EXIT_SOLVER, EXIT_BUDGET = 1, 2, 3, 4

log = logging.getLogger("promise_color")


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class RunConfig:
    command: str
    k: int | None = None
    ell: int | None = None
    epsilon: float = 0.02
    seed: int = 0
    trials: int = 1
    method: str = "fj"
    fmt: str = "json"
    deterministic: bool = False

    def __post_init__(self) -> None:
        if self.k is not None and self.k < 2:
            raise UsageError("--k must be at least 2")
        if self.k is not None and self.ell is not None and self.ell < self.k:
            raise UsageError(f"need k <= l, got k={self.k}, l={self.ell}")
        if self.epsilon <= 0:
            raise UsageError("--epsilon must be positive")
        if self.trials < 1:
            raise UsageError("--trials must be at least 1")


def _config(args) -> RunConfig:
    return RunConfig(
        command=args.command,
        k=getattr(args, "k", None),
        ell=getattr(args, "l", None),
        epsilon=getattr(args, "epsilon", 0.02),
        seed=getattr(args, "seed", 0),
        trials=getattr(args, "trials", 1),
        method=getattr(args, "method", "fj"),
        fmt=getattr(args, "format", "json"),
        deterministic=getattr(args, "deterministic", False),
    )


def _read(path: str) -> str:
    try:
        return sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise InputError(str(exc)) from exc


def _load_graph(path: str):
    return parse_graph(_read(path))


def _emit(report: dict, cfg: RunConfig, text: str | None = None) -> str:
    if cfg.fmt == "text" and text is not None:
        return text
    if cfg.fmt == "csv":
        flat = {k: v for k, v in report.items() if not isinstance(v, (list, dict))}
        return ",".join(flat) + "\n" + ",".join(str(v) for v in flat.values()) + "\n"
    out = {"schema": SCHEMA, **report}
    if not cfg.deterministic:
        out["timestamp"] = datetime.now(timezone.utc).isoformat()
    return json.dumps(out, indent=2, sort_keys=True) + "\n"


def _round(g, sol, cfg: RunConfig) -> dict:
    if cfg.method == "derand":
        out = derand_round(g, sol, cfg.ell, cfg.epsilon)
        expected = expected_fj_value(g, sol, cfg.ell)
    else:
        out = best_of(g, sol, cfg.ell, cfg.method, cfg.trials, cfg.seed)
        expected = (expected_fj_value if cfg.method == "fj" else expected_kms_value)(g, sol, cfg.ell)
    return {
        "method": cfg.method,
        "seed": cfg.seed,
        "trials": cfg.trials if cfg.method != "derand" else 1,
        "palette": cfg.ell,
        "expected_value": expected,
        "achieved_value": str(out.achieved_value),
        "achieved_value_float": float(out.achieved_value),
        "colouring": list(out.colouring.colours),
    }


def _alpha_pair(k: int, ell: int) -> dict:
    fj = alpha_kl(k, ell, use_cache=True)
    rep = {"k": k, "l": ell, "alpha_kl": fj.to_dict()}
    best, path = fj.value, "fj"
    if k > 2:
        kms = alpha_prime_kl(k, ell)
        rep["alpha_prime_kl"] = kms.to_dict()
        if kms.value > best:
            best, path = kms.value, "kms"
    rep["best"] = best
    rep["best_method"] = path
    return rep


def cmd_solve(args, cfg: RunConfig) -> str:
    if cfg.k is None or cfg.ell is None:
        raise UsageError("solve needs --k and --l")
    g = _load_graph(args.graph)
    sol = solve_relaxation(g, cfg.k, SolverOptions(seed=cfg.seed))
    if args.save_solution:
        sol.save(args.save_solution)
    alpha = alpha_kl(cfg.k, cfg.ell, use_cache=True).value
    report = {
        "graph": {"n": g.n, "m": g.m},
        "k": cfg.k,
        "sdp_objective": sol.objective,
        "feas_tol": sol.feas_tol,
        "alpha_kl": alpha,
        "epsilon": cfg.epsilon,
        "predicted_floor": alpha * sol.objective - cfg.epsilon,
        **_round(g, sol, cfg),
    }
    return _emit(report, cfg)


def cmd_round(args, cfg: RunConfig) -> str:
    if cfg.ell is None:
        raise UsageError("round needs --l")
    g = _load_graph(args.graph)
    try:
        sol = GramSolution.from_json(_read(args.solution))
    except (ValueError, KeyError) as exc:
        raise InputError(f"bad solution file: {exc}") from exc
    if sol.n != g.n:
        raise UsageError(f"solution has {sol.n} vectors, graph has {g.n} vertices")
    cfg = RunConfig(**{**cfg.__dict__, "k": None})
    return _emit({"sdp_objective": sol.objective, **_round(g, sol, cfg)}, cfg)


def cmd_alpha(args, cfg: RunConfig) -> str:
    if cfg.k is None or cfg.ell is None:
        raise UsageError("alpha needs --k and --l")
    rep = _alpha_pair(cfg.k, cfg.ell)
    text = f"alpha_{cfg.k},{cfg.ell} = {rep['alpha_kl']['value']:.6f}"
    if "alpha_prime_kl" in rep:
        text += f"\nalpha'_{cfg.k},{cfg.ell} = {rep['alpha_prime_kl']['value']:.6f}"
    text += f"\nbest = {rep['best']:.6f} ({rep['best_method']})\n"
    return _emit(rep, cfg, text)


def _range(spec: str) -> range:
    try:
        lo, _, hi = spec.partition("..")
        return range(int(lo), int(hi or lo) + 1)
    except ValueError:
        raise UsageError(f"bad range {spec!r}, expected LO..HI") from None


def cmd_table(args, cfg: RunConfig) -> str:
    table = alpha_table(_range(args.k_range), _range(args.l_range), use_cache=True)
    if cfg.fmt == "csv":
        return table_csv(table)
    if cfg.fmt == "text":
        return table_text(table)
    cells = [{"k": k, "l": ell, **est.to_dict()} for (k, ell), est in sorted(table.items())]
    return _emit({"cells": cells}, cfg)


def _budget(args) -> OracleBudget:
    if args.budget is None:
        return OracleBudget()
    return OracleBudget(max_vertices=args.budget)


def cmd_oracle(args, cfg: RunConfig) -> str:
    if cfg.k is None:
        raise UsageError("oracle needs --k")
    g = _load_graph(args.graph)
    value, witness = exact_rho(g, cfg.k, _budget(args))
    rep = {"k": cfg.k, "rho": str(value), "rho_float": float(value), "colouring": list(witness.colours)}
    return _emit(rep, cfg, f"{value}\n")


def _write(path: str | None, text: str) -> None:
    if path:
        Path(path).write_text(text)


def cmd_gadget(args, cfg: RunConfig) -> str:
    g = _load_graph(args.graph)
    out = scale_gadget(g, args.p, args.q)
    text = out.to_text(f"scale gadget p={args.p} q={args.q}")
    if not args.output:
        return text
    _write(args.output, text)
    return _emit({"p": args.p, "q": args.q, "n": out.n, "m": out.m, "loops": out.loop_count, "output": args.output}, cfg, text)


def _labels(spec: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in spec.split(",") if x.strip())
    except ValueError:
        raise UsageError(f"bad label list {spec!r}") from None


def cmd_pcp(args, cfg: RunConfig) -> str:
    if cfg.k is None:
        raise UsageError("pcp needs --k")
    try:
        inst = parse_label_cover(_read(args.instance))
        T = parse_markov(_read(args.operator), cfg.k) if args.operator else bonami_beckner(cfg.k)
    except GraphError as exc:
        raise InputError(str(exc)) from exc
    budget = args.budget if args.budget is not None else 100_000
    built = pcp_reduce(inst, cfg.k, T, vertex_budget=budget)
    _write(args.output, built.graph.to_text("label cover reduction"))
    mults = [w for _, _, w in built.graph.edges]
    rep = {
        "k": cfg.k,
        "n": built.graph.n,
        "m": built.graph.m,
        "integral_multiplicities": all(isinstance(w, int) and w >= 1 for w in mults),
        "output": args.output,
    }
    if args.right_labels:
        left = _labels(args.left_labels) if args.left_labels else tuple(1 for _ in range(inst.n_left))
        lab = LabelCoverLabelling(left, _labels(args.right_labels))
        value = completeness_value(inst, lab, cfg.k, built)
        rep["labels_satisfy_all"] = all(inst.satisfied(lab.left, lab.right)) if args.left_labels else None
        rep["completeness_value"] = str(value)
    text = f"n={rep['n']} m={rep['m']}" + (f" value={rep['completeness_value']}" if "completeness_value" in rep else "") + "\n"
    return _emit(rep, cfg, text)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "text"), default="json")
    common.add_argument("--deterministic", action="store_true", help="omit the timestamp")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="promise-color", description="Max k- vs l-colouring via vector relaxations.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def rounding_flags(sp):
        sp.add_argument("--l", type=int, required=True)
        sp.add_argument("--epsilon", type=float, default=0.02)
        sp.add_argument("--trials", type=int, default=1)
        sp.add_argument("--method", choices=("fj", "kms", "derand"), default="fj")

    sp = sub.add_parser("solve", parents=[common], help="relax, round and report")
    sp.add_argument("graph")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--save-solution")
    rounding_flags(sp)

    sp = sub.add_parser("round", parents=[common], help="round a saved relaxation solution")
    sp.add_argument("graph")
    sp.add_argument("solution")
    rounding_flags(sp)

    sp = sub.add_parser("alpha", parents=[common], help="approximation constants for one (k, l)")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--l", type=int, required=True)

    sp = sub.add_parser("table", parents=[common], help="table of alpha_kl")
    sp.add_argument("--k-range", default="3..15")
    sp.add_argument("--l-range", default="3..15")

    sp = sub.add_parser("oracle", parents=[common], help="exact optimum by branch and bound")
    sp.add_argument("graph")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--budget", type=int, help="maximum vertices to enumerate")

    sp = sub.add_parser("gadget", parents=[common], help="pad a graph with loops to value p/q")
    sp.add_argument("graph")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--q", type=int, required=True)
    sp.add_argument("-o", "--output")

    sp = sub.add_parser("pcp", parents=[common], help="label-cover reduction")
    sp.add_argument("instance")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--operator", help="Markov operator file; default is the Bonami-Beckner operator")
    sp.add_argument("--right-labels", help="comma-separated labels of right vertices")
    sp.add_argument("--left-labels", help="comma-separated labels of left vertices")
    sp.add_argument("--budget", type=int, help="maximum vertices of the built graph")
    sp.add_argument("-o", "--output")
    return p


COMMANDS = {
    "solve": cmd_solve,
    "round": cmd_round,
    "alpha": cmd_alpha,
    "table": cmd_table,
    "oracle": cmd_oracle,
    "gadget": cmd_gadget,
    "pcp": cmd_pcp,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args)
        sys.stdout.write(COMMANDS[args.command](args, cfg))
        return 0
    except (ParseError, InputError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (SolverError, QuadratureError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except BudgetError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ParameterError as exc:
        print(f"parameter error: {exc} (minimal s: {exc.minimal_s})", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, GraphError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
