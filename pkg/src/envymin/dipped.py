"""Minimum-envy allocation under single-dipped rankings.

Under strict single-dipped preferences every agent's favourite house is an
axis endpoint and at most two agents can ever be envy-free, which the solver
attains whenever enough houses exist outside the commonly top-ranked
segment.  A variant handles profiles whose only ties form one bottom group
shared by all agents; with at least n tied bottom houses everyone can be
made envy-free at once.
"""

from __future__ import annotations

from dataclasses import dataclass

from envymin.core import (
    Allocation,
    DomainError,
    Instance,
    as_strict_complete_ordinal,
)
from envymin.peaked import (
    OpCounter,
    _NULL_OPS,
    _resolve_axis,
    has_unallocated_better_house,
    resolve_envy_cycles,
)


@dataclass(frozen=True)
class DipProfile:
    """Dip structure of a strict single-dipped profile.

    ``first_ranked`` is the set of houses some agent ranks first (axis
    order); ``shared_span`` is the maximal common top segment of all agents'
    rankings when they agree on the first house, else empty.
    """

    dips: tuple[int, ...]
    first_ranked: tuple[int, ...]
    shared_span: tuple[int, ...]


def _group_rankings(inst: Instance) -> list[list[tuple[int, ...]]]:
    if inst.is_cardinal:
        inst = as_strict_complete_ordinal(inst)
    if not inst.prefs.is_complete(inst.m):
        raise DomainError("profile must rank every house")
    return [[tuple(g) for g in ranking] for ranking in inst.prefs.rankings]


def _bottom_ties_only(groups: list[list[tuple[int, ...]]]) -> bool:
    return all(all(len(g) == 1 for g in ranking[:-1]) for ranking in groups)


def _group_positions(groups, m: int) -> list[list[int]]:
    pos = [[0] * m for _ in groups]
    for i, ranking in enumerate(groups):
        for p, group in enumerate(ranking):
            for h in group:
                pos[i][h] = p
    return pos


def validate_single_dipped(
    inst: Instance, axis=None, *, allow_bottom_ties: bool = False
) -> tuple[bool, tuple | None]:
    """Check the single-dipped property; returns (ok, violating triple).

    The witness is (agent, farther house, nearer house): the nearer house
    lies strictly between the farther one and the agent's dip on the axis
    yet is not ranked below it.  Ties other than one bottom group (and any
    ties at all unless ``allow_bottom_ties``) raise ``DomainError``.
    """
    axis = _resolve_axis(inst, axis)
    groups = _group_rankings(inst)
    if not _bottom_ties_only(groups):
        raise DomainError("ties are supported only in the bottom tie-group")
    if not allow_bottom_ties and any(len(r[-1]) > 1 for r in groups):
        raise DomainError("profile must be strict")
    pos = _group_positions(groups, inst.m)
    worst = [len(r) - 1 for r in groups]
    for i in range(inst.n):
        along = [pos[i][h] for h in axis]
        dip_block = [t for t, p in enumerate(along) if p == worst[i]]
        if dip_block[-1] - dip_block[0] + 1 != len(dip_block):
            return False, (i, axis[dip_block[0]], axis[dip_block[-1]])
        for t in range(dip_block[0] - 1):
            # farther from the dip must be strictly better (smaller position)
            if along[t] >= along[t + 1]:
                return False, (i, axis[t], axis[t + 1])
        for t in range(dip_block[-1] + 1, inst.m - 1):
            if along[t + 1] >= along[t]:
                return False, (i, axis[t + 1], axis[t])
    return True, None


def dip_profile(inst: Instance, axis=None) -> DipProfile:
    """Dips, first-ranked houses, and the shared top segment (strict profiles)."""
    axis = _resolve_axis(inst, axis)
    strict = as_strict_complete_ordinal(inst)
    orders = [[g[0] for g in ranking] for ranking in strict.prefs.rankings]
    axis_pos = {h: t for t, h in enumerate(axis)}
    dips = tuple(order[-1] for order in orders)
    first_ranked = tuple(sorted({order[0] for order in orders}, key=axis_pos.get))
    shared_span: tuple[int, ...] = ()
    if len(first_ranked) == 1:
        k = 0
        while k < inst.m and all(o[k] == orders[0][k] for o in orders):
            k += 1
        shared_span = tuple(orders[0][:k])
    return DipProfile(dips=dips, first_ranked=first_ranked, shared_span=shared_span)


class _AxisPicker:
    """Serial dictatorship helper: under single-dipped rankings the best
    available house is always one of the two axis-extreme available ones."""

    def __init__(self, axis, blocked, ops: OpCounter):
        self.axis = axis
        self.dead = set(blocked)
        self.left = 0
        self.right = len(axis) - 1
        self.ops = ops

    def take(self, house: int) -> None:
        self.dead.add(house)

    def pick_best(self, position_row) -> int:
        while self.axis[self.left] in self.dead:
            self.left += 1
        while self.axis[self.right] in self.dead:
            self.right -= 1
        left_house, right_house = self.axis[self.left], self.axis[self.right]
        self.ops.add()
        # ties (bottom group) break toward the axis-left house
        best = left_house if position_row[left_house] <= position_row[right_house] else right_house
        self.dead.add(best)
        return best


def _dipped_procedure(
    inst: Instance, axis, groups, ops: OpCounter
) -> Allocation:
    """Shared body of the strict and bottom-ties solvers (group positions)."""
    n, m = inst.n, inst.m
    pos = _group_positions(groups, m)
    axis_pos = {h: t for t, h in enumerate(axis)}
    assigned: dict[int, int] = {}
    blocked: set[int] = set()

    tops = {}
    for i in range(n):
        top = groups[i][0][0]
        tops.setdefault(top, i)
    first_ranked = sorted(tops, key=axis_pos.get)
    ops.add(len(first_ranked))

    if len(first_ranked) > 1:
        left_top, right_top = first_ranked[0], first_ranked[-1]
        assigned[tops[left_top]] = left_top
        assigned[tops[right_top]] = right_top
    else:
        shared = first_ranked[0]
        k = 0
        while k < max(len(g) for g in groups):
            ops.add(n - 1)
            if all(len(g) > k and g[k] == groups[0][k] for g in groups):
                k += 1
            else:
                break
        span_houses = [h for g in groups[0][:k] for h in g]
        if m - len(span_houses) >= n:
            next_choice: dict[int, int] = {}
            for i in range(n):
                for h in groups[i][k]:
                    next_choice.setdefault(h, i)
            candidates = sorted(next_choice, key=axis_pos.get)
            left_next, right_next = candidates[0], candidates[-1]
            assigned[next_choice[left_next]] = left_next
            if next_choice[right_next] not in assigned:
                assigned[next_choice[right_next]] = right_next
            blocked.update(span_houses)
        else:
            assigned[0] = shared  # every agent ranks it first; lowest index wins

    picker = _AxisPicker(axis, blocked | set(assigned.values()), ops)
    for agent in range(n):
        if agent not in assigned:
            assigned[agent] = picker.pick_best(pos[agent])
    return Allocation(tuple(assigned[i] for i in range(n)))


def min_envy_single_dipped(
    inst: Instance,
    axis=None,
    *,
    validate: bool = True,
    ops: OpCounter | None = None,
) -> Allocation:
    """Allocation minimizing the number of envious agents (strict rankings)."""
    ops = ops or _NULL_OPS
    axis = _resolve_axis(inst, axis)
    strict = as_strict_complete_ordinal(inst)
    if validate:
        ok, witness = validate_single_dipped(strict, axis)
        if not ok:
            raise DomainError(f"profile is not single-dipped on the axis; witness {witness}")
    groups = _group_rankings(strict)
    return _dipped_procedure(inst, axis, groups, ops)


def min_envy_single_dipped_ties(
    inst: Instance,
    axis=None,
    *,
    validate: bool = True,
    ops: OpCounter | None = None,
) -> Allocation:
    """Ties-at-the-dip variant.

    With a common bottom tie-group of at least n houses, handing them out in
    axis order makes every agent envy-free; otherwise the strict procedure's
    bound of two envy-free agents is the best possible.
    """
    ops = ops or _NULL_OPS
    axis = _resolve_axis(inst, axis)
    groups = _group_rankings(inst)
    if not _bottom_ties_only(groups):
        raise DomainError("ties are supported only in the bottom tie-group")
    bottoms = [frozenset(r[-1]) for r in groups]
    has_ties = any(len(b) > 1 for b in bottoms)
    if has_ties and len(set(bottoms)) != 1:
        raise DomainError("bottom tie-group must be the same house set for every agent")
    if validate:
        ok, witness = validate_single_dipped(inst, axis, allow_bottom_ties=True)
        if not ok:
            raise DomainError(f"profile is not single-dipped on the axis; witness {witness}")
    axis_pos = {h: t for t, h in enumerate(axis)}
    ties = sorted(bottoms[0], key=axis_pos.get) if has_ties else []
    if len(ties) >= inst.n:
        return Allocation(tuple(ties[: inst.n]))
    return _dipped_procedure(inst, axis, groups, ops)


def min_envy_pareto_single_dipped(
    inst: Instance, axis=None, *, validate: bool = True
) -> Allocation | None:
    """A minimum-envy Pareto-optimal allocation, or None if none exists."""
    alloc = min_envy_single_dipped(inst, axis, validate=validate)
    alloc = resolve_envy_cycles(inst, alloc)
    if has_unallocated_better_house(inst, alloc):
        return None
    return alloc
