"""Exact search and constructive absorption tools for 2-factorizations of complete graphs."""

from .graph_core import (
    CycleFactor,
    CycleType,
    FactorSpec,
    Graph,
    HostGraph,
    VerificationReport,
    cycle_type_of,
    verify_decomposition,
)

__all__ = [
    "CycleFactor",
    "CycleType",
    "FactorSpec",
    "Graph",
    "HostGraph",
    "VerificationReport",
    "cycle_type_of",
    "verify_decomposition",
]
__version__ = "0.1.0"
