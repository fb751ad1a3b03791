"""Envy minimization for house allocation.

Bounded-reallocation refinement of a given allocation, exact minimum-envy
solvers for single-peaked and single-dipped preference domains, Pareto
compatibility decisions, welfare-maximizing baselines, seeded instance
generators, and a reproducible experiment harness.
"""

from envymin.core import (
    Allocation,
    AltPath,
    CardinalProfile,
    CapExceededError,
    DomainError,
    EnvyReport,
    InconsistencyError,
    Instance,
    OrdinalProfile,
    PreferenceGraph,
    ValidationError,
    allocation_from_json,
    allocation_to_json,
    apply_path,
    apply_paths,
    as_strict_complete_ordinal,
    envy_report,
    hamming,
    instance_from_json,
    instance_to_json,
    measure_value,
    preference_graph,
    symmetric_difference,
    welfare,
)

__all__ = [
    "Allocation",
    "AltPath",
    "CardinalProfile",
    "CapExceededError",
    "DomainError",
    "EnvyReport",
    "InconsistencyError",
    "Instance",
    "OrdinalProfile",
    "PreferenceGraph",
    "ValidationError",
    "allocation_from_json",
    "allocation_to_json",
    "apply_path",
    "apply_paths",
    "as_strict_complete_ordinal",
    "envy_report",
    "hamming",
    "instance_from_json",
    "instance_to_json",
    "measure_value",
    "preference_graph",
    "symmetric_difference",
    "welfare",
]
