"""Minimum-envy allocation under complete strict single-peaked rankings.

The solver allocates individual peaks non-wastefully, settles mutually
contained shared-peak pairs, then greedily resolves remaining shared peaks
in non-decreasing span order while enough houses remain, reserving each
resolved span so exactly two of its base agents end up envy-free.  The
module also hosts the envy-graph machinery (cycle resolution, the acyclic +
no-unallocated-better-house Pareto characterisation) shared with the
single-dipped solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from envymin.core import (
    Allocation,
    DomainError,
    Instance,
    as_strict_complete_ordinal,
    envy_report,
    score_matrix,
)


@dataclass
class OpCounter:
    """Counts ranking-comparison operations for complexity experiments."""

    comparisons: int = 0

    def add(self, k: int = 1) -> None:
        self.comparisons += k


_NULL_OPS = OpCounter()


@dataclass(frozen=True)
class PeakProfile:
    """Peak structure of a strict single-peaked profile.

    ``span[h]`` is the maximal top segment of houses ranked identically by
    every agent whose peak is h; individual peaks have an empty span by
    convention.
    """

    peaks: tuple[int, ...]
    base: dict[int, tuple[int, ...]]
    span: dict[int, tuple[int, ...]]
    individual: tuple[int, ...]
    shared: tuple[int, ...]

    @property
    def individual_count(self) -> int:
        return len(self.individual)

    @property
    def shared_count(self) -> int:
        return len(self.shared)


def _strict_orders(inst: Instance) -> list[list[int]]:
    strict = as_strict_complete_ordinal(inst)
    return [[g[0] for g in ranking] for ranking in strict.prefs.rankings]


def _resolve_axis(inst: Instance, axis) -> tuple[int, ...]:
    axis = tuple(axis) if axis is not None else inst.axis
    if axis is None:
        raise DomainError("an axis over all houses is required")
    if sorted(axis) != list(range(inst.m)):
        raise DomainError("axis must be a permutation of all houses")
    return axis


def validate_single_peaked(inst: Instance, axis=None) -> tuple[bool, tuple | None]:
    """Check the single-peaked property; returns (ok, violating triple).

    The witness is (agent, farther house, nearer house): the nearer house
    lies strictly between the farther one and the agent's peak on the axis
    yet is not preferred to it.
    """
    axis = _resolve_axis(inst, axis)
    orders = _strict_orders(inst)
    pos = _positions(orders, inst.m)
    for i in range(inst.n):
        along = [pos[i][h] for h in axis]
        peak_at = along.index(0)
        for t in range(peak_at - 1):
            if along[t] < along[t + 1]:
                return False, (i, axis[t], axis[t + 1])
        for t in range(peak_at + 1, inst.m - 1):
            if along[t + 1] < along[t]:
                return False, (i, axis[t + 1], axis[t])
    return True, None


def _positions(orders: list[list[int]], m: int) -> list[list[int]]:
    pos = [[0] * m for _ in orders]
    for i, order in enumerate(orders):
        for p, h in enumerate(order):
            pos[i][h] = p
    return pos


def peak_profile(inst: Instance, axis=None, ops: OpCounter | None = None) -> PeakProfile:
    """Peaks, bases, and spans of a strict complete profile."""
    ops = ops or _NULL_OPS
    _resolve_axis(inst, axis)
    orders = _strict_orders(inst)
    peaks = tuple(order[0] for order in orders)
    base: dict[int, tuple[int, ...]] = {}
    for i, p in enumerate(peaks):
        base.setdefault(p, ())
        base[p] += (i,)
    span: dict[int, tuple[int, ...]] = {}
    for h, agents in base.items():
        if len(agents) == 1:
            span[h] = ()
            continue
        first = orders[agents[0]]
        k = 0
        while k < inst.m:
            ops.add(len(agents) - 1)
            if all(orders[i][k] == first[k] for i in agents[1:]):
                k += 1
            else:
                break
        span[h] = tuple(first[:k])
    individual = tuple(h for h in sorted(base) if len(base[h]) == 1)
    shared = tuple(h for h in sorted(base) if len(base[h]) > 1)
    return PeakProfile(peaks=peaks, base=base, span=span, individual=individual, shared=shared)


def min_envy_single_peaked(
    inst: Instance,
    axis=None,
    *,
    validate: bool = True,
    ops: OpCounter | None = None,
) -> Allocation:
    """Allocation with the minimum number of envious agents.

    ``validate`` controls only the single-peaked axis check; strictness and
    completeness are always required.
    """
    ops = ops or _NULL_OPS
    axis = _resolve_axis(inst, axis)
    if validate:
        ok, witness = validate_single_peaked(inst, axis)
        if not ok:
            raise DomainError(f"profile is not single-peaked on the axis; witness {witness}")
    orders = _strict_orders(inst)
    pos = _positions(orders, inst.m)
    axis_pos = {h: t for t, h in enumerate(axis)}
    profile = peak_profile(inst, axis, ops=ops)

    assigned: dict[int, int] = {}
    taken: set[int] = set()
    reserved: set[int] = set()

    def allocate(agent: int, house: int) -> None:
        assert agent not in assigned and house not in taken and house not in reserved
        assigned[agent] = house
        taken.add(house)

    def first_free_base_agent(house: int) -> int:
        return next(i for i in profile.base[house] if i not in assigned)

    # individual peaks go to their unique base agent
    for h in sorted(profile.individual, key=axis_pos.get):
        allocate(profile.base[h][0], h)

    shared_by_axis = sorted(profile.shared, key=axis_pos.get)
    # mutually contained shared-peak pairs: allocate both non-wastefully
    for hj in shared_by_axis:
        for hl in shared_by_axis:
            if axis_pos[hj] >= axis_pos[hl]:
                continue
            if hj in profile.span[hl] and hl in profile.span[hj]:
                if hj not in taken:
                    allocate(first_free_base_agent(hj), hj)
                if hl not in taken:
                    allocate(first_free_base_agent(hl), hl)
    # one-way containment: the containing peak is allocated non-wastefully
    for hj in shared_by_axis:
        for hl in shared_by_axis:
            if hj == hl:
                continue
            if hj in profile.span[hl] and hl not in profile.span[hj] and hl not in taken:
                allocate(first_free_base_agent(hl), hl)

    # greedy resolve in non-decreasing span size (axis position breaks ties)
    queue = sorted(
        (h for h in shared_by_axis if h not in taken),
        key=lambda h: (len(profile.span[h]), axis_pos[h]),
    )
    for idx, h in enumerate(queue):
        if h in taken or h in reserved:
            continue
        span = profile.span[h]
        houses_left = inst.m - len(taken) - len(reserved)
        agents_left = inst.n - len(assigned)
        new_reservation = [x for x in span if x not in reserved]
        if houses_left - len(new_reservation) < agents_left:
            # not enough houses to resolve this (or any later, larger) span
            for h2 in queue[idx:]:
                if h2 not in taken and h2 not in reserved:
                    allocate(first_free_base_agent(h2), h2)
            break
        pair = _resolution_pair(profile, orders, h, taken, reserved, ops)
        if pair is None or any(x in taken for x in span):
            # unresolvable here: settle for one envy-free base agent
            allocate(first_free_base_agent(h), h)
            continue
        (a1, c1), (a2, c2) = pair
        allocate(a1, c1)
        allocate(a2, c2)
        reserved.update(span)

    # remaining agents pick their best available house outside the reservations
    for agent in range(inst.n):
        if agent in assigned:
            continue
        for house in orders[agent]:
            ops.add()
            if house not in taken and house not in reserved:
                allocate(agent, house)
                break
        else:
            raise AssertionError("ran out of houses; accounting bug")
    return Allocation(tuple(assigned[i] for i in range(inst.n)))


def _resolution_pair(profile, orders, house, taken, reserved, ops):
    """Two base agents whose next-ranked houses after the span are distinct
    and available; None when no such pair exists."""
    depth = len(profile.span[house])
    first = None
    for agent in profile.base[house]:
        candidate = orders[agent][depth]
        ops.add()
        if candidate in taken or candidate in reserved:
            continue
        if first is None:
            first = (agent, candidate)
        elif candidate != first[1]:
            return first, (agent, candidate)
    return None


# --- envy graph and Pareto machinery ----------------------------------------

def envy_graph(inst: Instance, alloc: Allocation) -> np.ndarray:
    """Directed envy relation as an (n, n) boolean matrix: [i, j] iff i envies j."""
    report = envy_report(inst, alloc)
    return np.array([[x > 0 for x in row] for row in report.pairwise], dtype=bool)


def _find_cycle(graph: np.ndarray) -> list[int] | None:
    n = graph.shape[0]
    color = [0] * n  # 0 unvisited, 1 on stack, 2 done
    parent = [-1] * n
    for root in range(n):
        if color[root]:
            continue
        stack = [(root, iter(np.flatnonzero(graph[root])))]
        color[root] = 1
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                nxt = int(nxt)
                if color[nxt] == 0:
                    color[nxt] = 1
                    parent[nxt] = node
                    stack.append((nxt, iter(np.flatnonzero(graph[nxt]))))
                    advanced = True
                    break
                if color[nxt] == 1:
                    cycle = [node]
                    while cycle[-1] != nxt:
                        cycle.append(parent[cycle[-1]])
                    cycle.reverse()
                    return cycle
            if not advanced:
                color[node] = 2
                stack.pop()
    return None


def resolve_envy_cycles(inst: Instance, alloc: Allocation) -> Allocation:
    """Rotate bundles along envy cycles until the envy graph is acyclic.

    Each rotation strictly improves every agent on the cycle and keeps the
    allocated house set unchanged, so the envy count never increases and the
    loop terminates.
    """
    for _ in range(inst.n * inst.m + 1):
        cycle = _find_cycle(envy_graph(inst, alloc))
        if cycle is None:
            return alloc
        assignment = list(alloc.assignment)
        rotated = [assignment[cycle[(z + 1) % len(cycle)]] for z in range(len(cycle))]
        for agent, house in zip(cycle, rotated):
            assignment[agent] = house
        alloc = Allocation(tuple(assignment))
    raise AssertionError("cycle resolution failed to terminate")


def has_unallocated_better_house(inst: Instance, alloc: Allocation) -> bool:
    """True iff some unallocated house is ranked above its own house by some agent."""
    scores = score_matrix(inst)
    own = scores[np.arange(inst.n), list(alloc.assignment)]
    for house in range(inst.m):
        if house in alloc.houses:
            continue
        if (scores[:, house] < own).any():
            return True
    return False


def is_pareto_optimal(inst: Instance, alloc: Allocation) -> bool:
    """Pareto optimality via the envy-graph characterisation.

    For strict complete profiles an allocation is Pareto optimal iff its envy
    graph is acyclic and every house someone prefers to its own is allocated.
    """
    as_strict_complete_ordinal(inst)
    if _find_cycle(envy_graph(inst, alloc)) is not None:
        return False
    return not has_unallocated_better_house(inst, alloc)


def peaks_first_dictatorship(inst: Instance, profile: PeakProfile) -> Allocation:
    """Every peak house to its lowest-index base agent, then serial
    dictatorship; always Pareto optimal with exactly one envy-free agent per
    peak house (a dictator's peak is always held by somebody else)."""
    orders = _strict_orders(inst)
    assigned: dict[int, int] = {}
    taken: set[int] = set()
    for h in sorted(profile.base):
        agent = profile.base[h][0]
        assigned[agent] = h
        taken.add(h)
    for agent in range(inst.n):
        if agent in assigned:
            continue
        choice = next(h for h in orders[agent] if h not in taken)
        assigned[agent] = choice
        taken.add(choice)
    return Allocation(tuple(assigned[i] for i in range(inst.n)))


def min_envy_pareto_single_peaked(
    inst: Instance, axis=None, *, validate: bool = True
) -> Allocation | None:
    """A minimum-envy allocation that is Pareto optimal, or None if none exists.

    Every Pareto-optimal allocation allocates all peak houses (an unallocated
    peak is a free improvement), so its envy-free agents are exactly the
    agents holding their own peak: at most one per peak house.  A minimum-envy
    PO allocation therefore exists iff the optimal envy-free count equals the
    number of peak houses, in which case allocating peaks non-wastefully and
    serially dictating the rest attains it.  The solver output (after cycle
    resolution) is preferred as the witness when it is already PO.
    """
    alloc = min_envy_single_peaked(inst, axis, validate=validate)
    alloc = resolve_envy_cycles(inst, alloc)
    if not has_unallocated_better_house(inst, alloc):
        return alloc
    profile = peak_profile(inst, axis)
    optimum_envy_free = inst.n - envy_report(inst, alloc).envy_count
    if optimum_envy_free != len(profile.base):
        return None
    return peaks_first_dictatorship(inst, profile)
