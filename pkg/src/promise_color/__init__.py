"""Approximation algorithms for maximum k- vs l-colouring from vector relaxations."""

from .alpha import AlphaEstimate, KmsConstants, alpha_kl, alpha_prime_kl, alpha_table, ft_bound_check, kms_constants, n_ell, p_ell
from .bvn import bvn_cdf
from .derand import NBinSpec, ParameterError, derand_round
from .gadgets import (
    LabelCoverInstance,
    LabelCoverLabelling,
    MarkovOperator,
    bonami_beckner,
    completeness_value,
    pcp_reduce,
    scale_gadget,
)
from .graph import Colouring, Graph, colouring_value, parse_graph, read_graph, write_graph
from .oracle import OracleBudget, exact_expected_round, exact_rho, mc_p_ell
from .rounding import RoundingOutcome, best_of, expected_fj_value, fj_round, kms_round
from .sdp import GramSolution, SolverOptions, relaxation_objective, simplex_vectors, solve_relaxation

__version__ = "0.1.0"

__all__ = [
    "AlphaEstimate",
    "Colouring",
    "GramSolution",
    "Graph",
    "KmsConstants",
    "LabelCoverInstance",
    "LabelCoverLabelling",
    "MarkovOperator",
    "NBinSpec",
    "OracleBudget",
    "ParameterError",
    "RoundingOutcome",
    "SolverOptions",
    "alpha_kl",
    "alpha_prime_kl",
    "alpha_table",
    "best_of",
    "bonami_beckner",
    "bvn_cdf",
    "colouring_value",
    "completeness_value",
    "derand_round",
    "exact_expected_round",
    "exact_rho",
    "expected_fj_value",
    "fj_round",
    "ft_bound_check",
    "kms_constants",
    "kms_round",
    "mc_p_ell",
    "n_ell",
    "p_ell",
    "parse_graph",
    "pcp_reduce",
    "read_graph",
    "relaxation_objective",
    "scale_gadget",
    "simplex_vectors",
    "solve_relaxation",
    "write_graph",
]
