"""Atoms, edge stacks, homomorphism surgery and cluster allocation."""

from .allocation import (
    AllocationError,
    CrossingAllocation,
    allocate_long_cycles,
    crossing_allocation,
    crossing_report,
    simple_alloc_report,
)
from .atoms import Atom, balance_violation, d_cycle, decompose_into_atoms, is_internally_balanced
from .edge_stack import group_atoms, matching_sequence, misra_gries_colouring, windows_are_matchings
from .matchings import GoodMatching, GoodMatchingError, decompose_into_good_matchings
from .surgery import (
    InsufficientTargetsError,
    SurgeryResult,
    Target,
    absorb_atoms_into_homomorphism,
    find_targets,
    surgery_report,
)

__all__ = [
    "AllocationError",
    "Atom",
    "CrossingAllocation",
    "GoodMatching",
    "GoodMatchingError",
    "InsufficientTargetsError",
    "SurgeryResult",
    "Target",
    "absorb_atoms_into_homomorphism",
    "allocate_long_cycles",
    "balance_violation",
    "crossing_allocation",
    "crossing_report",
    "d_cycle",
    "decompose_into_atoms",
    "decompose_into_good_matchings",
    "find_targets",
    "group_atoms",
    "is_internally_balanced",
    "matching_sequence",
    "misra_gries_colouring",
    "simple_alloc_report",
    "surgery_report",
    "windows_are_matchings",
]
