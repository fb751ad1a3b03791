"""Exhaustive ground-truth solvers for desk-scale verification.

Everything here enumerates all m*(m-1)*...*(m-n+1) complete allocations in
lexicographic order over agent-indexed house choices and evaluates each one;
numpy only vectorizes that evaluation.  This module is the trust anchor for
the rest of the library, so it stays deliberately free of algorithmic
shortcuts.  Instances beyond the configured caps are refused, never
truncated.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from envymin.core import (
    Allocation,
    CapExceededError,
    DomainError,
    Instance,
    Measure,
    instance_key,
    preference_graph,
    score_matrix,
    value_matrix,
)

_BIG = np.iinfo(np.int64).max


@dataclass(frozen=True)
class OracleCaps:
    """Enumeration size limits; exceeding them raises, never truncates."""

    max_agents: int = 7
    max_houses: int = 10


DEFAULT_CAPS = OracleCaps()


def _check_caps(inst: Instance, caps: OracleCaps) -> None:
    if inst.n > caps.max_agents or inst.m > caps.max_houses:
        raise CapExceededError(
            f"instance has n={inst.n}, m={inst.m}; caps allow "
            f"n<={caps.max_agents}, m<={caps.max_houses}"
        )


@lru_cache(maxsize=32)
def _all_assignments(n: int, m: int) -> np.ndarray:
    """All injective assignments as an (N, n) array, lexicographic order."""
    flat = np.fromiter(
        itertools.chain.from_iterable(itertools.permutations(range(m), n)),
        dtype=np.int16,
    )
    arr = flat.reshape(-1, n)
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=64)
def _per_agent_amounts(key: tuple, n: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    """(envious flags, amounts) per assignment row and agent, cached per instance."""
    inst = Instance(n=key[0], m=key[1], prefs=key[2], axis=key[3])
    scores = score_matrix(inst)
    arr = _all_assignments(n, m)
    rows = arr.shape[0]
    envious = np.empty((rows, n), dtype=bool)
    amounts = np.empty((rows, n), dtype=np.int64)
    cardinal = inst.is_cardinal
    values = value_matrix(inst) if cardinal else None
    for i in range(n):
        theirs = scores[i][arr]
        own = theirs[:, i]
        envious[:, i] = theirs.min(axis=1) < own
        if cardinal:
            vals = values[i][arr]
            amounts[:, i] = np.maximum(vals - vals[:, i][:, None], 0).sum(axis=1)
        else:
            amounts[:, i] = (theirs < own[:, None]).sum(axis=1)
    envious.setflags(write=False)
    amounts.setflags(write=False)
    return envious, amounts


def measure_table(inst: Instance, measure: Measure) -> np.ndarray:
    """Measure value of every complete allocation, indexed like ``_all_assignments``."""
    envious, amounts = _per_agent_amounts(instance_key(inst), inst.n, inst.m)
    if measure == "envy":
        return envious.sum(axis=1)
    if measure == "total":
        return amounts.sum(axis=1)
    if measure == "max":
        return amounts.max(axis=1)
    raise DomainError(f"unknown measure {measure!r}")


def min_measure_exhaustive(
    inst: Instance, measure: Measure, caps: OracleCaps = DEFAULT_CAPS
) -> tuple[int, Allocation]:
    """Optimal measure value over all complete allocations plus the first witness."""
    _check_caps(inst, caps)
    values = measure_table(inst, measure)
    idx = int(values.argmin())
    witness = Allocation(tuple(int(h) for h in _all_assignments(inst.n, inst.m)[idx]))
    return int(values[idx]), witness


def min_measure_within_q(
    inst: Instance,
    a_hat: Allocation,
    q: int,
    measure: Measure,
    caps: OracleCaps = DEFAULT_CAPS,
    *,
    on_graph_only: bool = False,
) -> tuple[int, Allocation]:
    """Optimum over allocations that move at most q agents relative to ``a_hat``.

    ``on_graph_only`` restricts the search to allocations assigning every
    agent a ranked / positively valued house, the move space reachable by
    alternating paths in the preference graph.
    """
    _check_caps(inst, caps)
    if not 0 <= q <= inst.n:
        raise DomainError(f"q must be in [0, n], got {q}")
    arr = _all_assignments(inst.n, inst.m)
    values = measure_table(inst, measure)
    mask = (arr != np.asarray(a_hat.assignment, dtype=arr.dtype)).sum(axis=1) <= q
    if on_graph_only:
        g = preference_graph(inst)
        allowed = np.zeros((inst.n, inst.m), dtype=bool)
        for i in range(inst.n):
            for h in g.adjacency[i]:
                allowed[i, h] = True
        mask &= allowed[np.arange(inst.n)[None, :], arr].all(axis=1)
    if not mask.any():
        raise DomainError("no allocation within the move budget (off-graph start?)")
    masked = np.where(mask, values, _BIG)
    idx = int(masked.argmin())
    return int(values[idx]), Allocation(tuple(int(h) for h in arr[idx]))


def _strict_scores(inst: Instance) -> np.ndarray:
    scores = score_matrix(inst)
    for i in range(inst.n):
        if len(set(scores[i].tolist())) != inst.m:
            raise DomainError("Pareto checks need a strict complete profile")
    return scores


def is_pareto_optimal_exhaustive(
    inst: Instance, alloc: Allocation, caps: OracleCaps = DEFAULT_CAPS
) -> tuple[bool, Allocation | None]:
    """True iff no allocation Pareto-dominates ``alloc``; else the first dominator."""
    _check_caps(inst, caps)
    scores = _strict_scores(inst)
    arr = _all_assignments(inst.n, inst.m)
    own = scores[np.arange(inst.n), list(alloc.assignment)]
    all_own = scores[np.arange(inst.n)[None, :], arr]
    dominates = (all_own <= own[None, :]).all(axis=1) & (all_own < own[None, :]).any(axis=1)
    if not dominates.any():
        return True, None
    idx = int(dominates.argmax())
    return False, Allocation(tuple(int(h) for h in arr[idx]))


def min_envy_pareto_exhaustive(
    inst: Instance, caps: OracleCaps = DEFAULT_CAPS
) -> tuple[bool, Allocation | None]:
    """Whether some minimum-envy allocation is Pareto optimal (first witness)."""
    _check_caps(inst, caps)
    scores = _strict_scores(inst)
    arr = _all_assignments(inst.n, inst.m)
    values = measure_table(inst, "envy")
    all_own = scores[np.arange(inst.n)[None, :], arr]
    for idx in np.flatnonzero(values == values.min()):
        own = all_own[idx]
        dominates = (all_own <= own[None, :]).all(axis=1) & (all_own < own[None, :]).any(axis=1)
        if not dominates.any():
            return True, Allocation(tuple(int(h) for h in arr[idx]))
    return False, None
