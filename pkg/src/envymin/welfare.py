"""Welfare-maximizing baseline allocations for cardinal instances.

All three maximizers are exact and deterministic: ties between optimal
assignments are broken toward the lexicographically smallest
(agent index, house index) assignment vector, decided by comparisons on
exact integers (big-integer products for Nash), never on perturbed stored
values or floating logs.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment

from envymin.core import Allocation, DomainError, Instance, value_matrix

_NASH_DP_MAX_AGENTS = 18


def _values(inst: Instance) -> np.ndarray:
    if not inst.is_cardinal:
        raise DomainError("welfare maximization requires a cardinal profile")
    return value_matrix(inst)


def _max_weight_total(values: np.ndarray) -> int:
    rows, cols = linear_sum_assignment(values, maximize=True)
    return int(values[rows, cols].sum())


def _complete_lexicographically(inst, fix_is_optimal) -> Allocation:
    """Fix agents 0..n-1 in turn to the smallest house that stays optimal."""
    fixed: dict[int, int] = {}
    for agent in range(inst.n):
        for house in range(inst.m):
            if house in fixed.values():
                continue
            if fix_is_optimal(fixed, agent, house):
                fixed[agent] = house
                break
        else:
            raise AssertionError("no optimal completion found; maximizer bug")
    return Allocation(tuple(fixed[i] for i in range(inst.n)))


def max_utilitarian(inst: Instance) -> Allocation:
    """Allocation maximizing the sum of utilities (maximum-weight matching)."""
    values = _values(inst)
    optimum = _max_weight_total(values)

    def fix_is_optimal(fixed, agent, house):
        trial = {**fixed, agent: house}
        rest_agents = [i for i in range(inst.n) if i not in trial]
        rest_houses = [h for h in range(inst.m) if h not in trial.values()]
        total = sum(int(values[i, h]) for i, h in trial.items())
        if rest_agents:
            total += _max_weight_total(values[np.ix_(rest_agents, rest_houses)])
        return total == optimum

    return _complete_lexicographically(inst, fix_is_optimal)


def _saturating_matching_exists(allowed: np.ndarray) -> bool:
    """Can every agent (row) be matched to a distinct allowed house?"""
    if allowed.shape[0] == 0:
        return True
    if not allowed.any(axis=1).all():
        return False
    rows, cols = linear_sum_assignment(allowed.astype(np.int8), maximize=True)
    return bool(allowed[rows, cols].all())


def max_egalitarian(inst: Instance) -> Allocation:
    """Allocation maximizing the minimum utility.

    Binary search over the sorted distinct values with a saturating-matching
    feasibility test per threshold; threshold 0 is always feasible.
    """
    values = _values(inst)
    thresholds = sorted(set(values.flatten().tolist()))
    lo, hi = 0, len(thresholds) - 1
    best = 0
    while lo <= hi:
        mid = (lo + hi) // 2
        if _saturating_matching_exists(values >= thresholds[mid]):
            best = thresholds[mid]
            lo = mid + 1
        else:
            hi = mid - 1
    allowed = values >= best

    def fix_is_optimal(fixed, agent, house):
        if not allowed[agent, house]:
            return False
        trial = {**fixed, agent: house}
        rest_agents = [i for i in range(inst.n) if i not in trial]
        rest_houses = [h for h in range(inst.m) if h not in trial.values()]
        return _saturating_matching_exists(allowed[np.ix_(rest_agents, rest_houses)])

    return _complete_lexicographically(inst, fix_is_optimal)


def _nash_objective_dp(values: np.ndarray, agents: list[int], houses: list[int]):
    """Best (positive-utility count, exact product) assigning ``agents`` into ``houses``.

    Subset DP over house prefixes; products are Python big integers, so
    comparisons are exact.  Returns None when no injective assignment exists.
    """
    k = len(agents)
    if k == 0:
        return (0, 1)
    full = (1 << k) - 1
    state: list[tuple[int, int] | None] = [None] * (full + 1)
    state[0] = (0, 1)
    for house in houses:
        nxt = state[:]
        col = values[:, house]
        for subset in range(full + 1):
            base = state[subset]
            if base is None:
                continue
            for bit in range(k):
                if subset & (1 << bit):
                    continue
                v = int(col[agents[bit]])
                cand = (base[0] + 1, base[1] * v) if v > 0 else base
                tgt = subset | (1 << bit)
                if nxt[tgt] is None or cand > nxt[tgt]:
                    nxt[tgt] = cand
        state = nxt
    return state[full]


def max_nash(inst: Instance) -> Allocation:
    """Allocation maximizing Nash welfare.

    Lexicographic objective: first the number of agents with positive
    utility, then the product of the positive utilities, both compared
    exactly.  Falls back to floating log weights above the subset-DP size
    bound.
    """
    values = _values(inst)
    if inst.n > _NASH_DP_MAX_AGENTS:
        return _max_nash_float(inst, values)
    all_agents = list(range(inst.n))
    all_houses = list(range(inst.m))
    optimum = _nash_objective_dp(values, all_agents, all_houses)

    def fix_is_optimal(fixed, agent, house):
        trial = {**fixed, agent: house}
        rest_agents = [i for i in all_agents if i not in trial]
        rest_houses = [h for h in all_houses if h not in trial.values()]
        rest = _nash_objective_dp(values, rest_agents, rest_houses)
        if rest is None:
            return False
        count, product = rest
        for i, h in trial.items():
            v = int(values[i, h])
            if v > 0:
                count += 1
                product *= v
        return (count, product) == optimum

    return _complete_lexicographically(inst, fix_is_optimal)


def _max_nash_float(inst: Instance, values: np.ndarray) -> Allocation:
    # cardinality dominates, log-product breaks ties; adequate beyond DP range
    positive = values > 0
    bulk = inst.n * (np.log(values, where=positive, out=np.zeros_like(values, dtype=float)).max() + 1.0)
    weights = positive * bulk + np.log(values, where=positive, out=np.zeros_like(values, dtype=float))
    rows, cols = linear_sum_assignment(weights, maximize=True)
    assignment = [0] * inst.n
    for i, h in zip(rows, cols):
        assignment[int(i)] = int(h)
    return Allocation(tuple(assignment))
