"""Exact searches: factorizations, resolvable partite cycle decompositions, wheels, embeddings."""

from .search import (
    InfeasibleSpecError,
    SearchConfig,
    SearchOutcome,
    Verdict,
    canonical_factor,
    check_feasible,
    embed_with_prescription,
    extract_factors,
    resolvable_partite_cycle_decomposition,
    solve_factorization,
    wheel_decomposition,
    wheelify,
)

__all__ = [
    "InfeasibleSpecError",
    "SearchConfig",
    "SearchOutcome",
    "Verdict",
    "canonical_factor",
    "check_feasible",
    "embed_with_prescription",
    "extract_factors",
    "resolvable_partite_cycle_decomposition",
    "solve_factorization",
    "wheel_decomposition",
    "wheelify",
]
