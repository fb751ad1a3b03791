"""Domain types, envy measures, and allocation algebra for house allocation.

An instance has n agents and m >= n houses.  Preferences are either weak
ordinal rankings (tie-groups, possibly over a subset of the houses) or
non-negative integer values.  An allocation gives every agent exactly one
house, no house twice.  Everything here is an immutable value object and
every operation is a pure function, so concurrent use is safe.

Agents and houses are 0-indexed internally; the JSON interchange format
names them "i1".."in" and "h1".."hm".
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Literal

import numpy as np

Measure = Literal["envy", "total", "max"]
WelfareKind = Literal["utilitarian", "nash", "egalitarian"]

MEASURES: tuple[Measure, ...] = ("envy", "total", "max")


class ValidationError(ValueError):
    """Malformed instance, profile, or allocation."""


class DomainError(ValueError):
    """Operation applied outside its supported preference domain."""


class InconsistencyError(ValueError):
    """Allocation uses an edge absent from the preference graph."""


class CapExceededError(RuntimeError):
    """Enumeration refused because the instance exceeds the configured caps."""


@dataclass(frozen=True)
class OrdinalProfile:
    """Per-agent weak rankings: a tuple of non-empty tie-groups per agent.

    Houses missing from an agent's ranking are unranked for that agent and
    carry no envy in either direction (see ``envy_report``).
    """

    rankings: tuple[tuple[tuple[int, ...], ...], ...]

    @property
    def kind(self) -> str:
        return "ordinal"

    def ranked(self, agent: int) -> frozenset[int]:
        return frozenset(h for group in self.rankings[agent] for h in group)

    def is_strict(self) -> bool:
        return all(len(g) == 1 for r in self.rankings for g in r)

    def is_complete(self, m: int) -> bool:
        return all(len(self.ranked(i)) == m for i in range(len(self.rankings)))


@dataclass(frozen=True)
class CardinalProfile:
    """Per-agent non-negative integer values, one row per agent."""

    values: tuple[tuple[int, ...], ...]

    @property
    def kind(self) -> str:
        return "cardinal"

    def is_strict(self) -> bool:
        return all(len(set(row)) == len(row) for row in self.values)

    def is_complete(self, m: int) -> bool:
        return all(all(v > 0 for v in row) for row in self.values)


Profile = OrdinalProfile | CardinalProfile


@dataclass(frozen=True)
class Instance:
    """A house allocation instance; ``axis`` orders all houses when present."""

    n: int
    m: int
    prefs: Profile
    axis: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if not (1 <= self.n <= self.m):
            raise ValidationError(f"need m >= n >= 1, got n={self.n}, m={self.m}")
        if isinstance(self.prefs, OrdinalProfile):
            if len(self.prefs.rankings) != self.n:
                raise ValidationError("one ranking per agent required")
            for i, ranking in enumerate(self.prefs.rankings):
                seen: set[int] = set()
                for group in ranking:
                    if not group:
                        raise ValidationError(f"agent {i} has an empty tie-group")
                    for h in group:
                        if not 0 <= h < self.m:
                            raise ValidationError(f"agent {i} ranks unknown house {h}")
                        if h in seen:
                            raise ValidationError(f"agent {i} ranks house {h} twice")
                        seen.add(h)
        else:
            if len(self.prefs.values) != self.n:
                raise ValidationError("one value row per agent required")
            for i, row in enumerate(self.prefs.values):
                if len(row) != self.m:
                    raise ValidationError(f"agent {i} has {len(row)} values, expected {self.m}")
                if any(v < 0 for v in row):
                    raise ValidationError(f"agent {i} has a negative value")
        if self.axis is not None and sorted(self.axis) != list(range(self.m)):
            raise ValidationError("axis must be a permutation of all houses")

    @property
    def is_cardinal(self) -> bool:
        return isinstance(self.prefs, CardinalProfile)


@dataclass(frozen=True)
class Allocation:
    """Complete injective mapping agent -> house (``assignment[i]`` is i's house)."""

    assignment: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(set(self.assignment)) != len(self.assignment):
            raise ValidationError("allocation assigns a house twice")

    def __getitem__(self, agent: int) -> int:
        return self.assignment[agent]

    @property
    def houses(self) -> frozenset[int]:
        return frozenset(self.assignment)

    def holder(self, house: int) -> int | None:
        try:
            return self.assignment.index(house)
        except ValueError:
            return None


@dataclass(frozen=True)
class EnvyReport:
    """Pairwise envy amounts and the aggregate measures derived from them."""

    pairwise: tuple[tuple[int, ...], ...]
    per_agent: tuple[int, ...]
    envious: tuple[int, ...]
    envy_count: int
    total_envy: int
    max_envy: int


@dataclass(frozen=True)
class PreferenceGraph:
    """Bipartite agents-houses graph; an edge means ranked / positively valued.

    ``max_degree`` is the maximum over all vertices, houses included.
    """

    n: int
    m: int
    adjacency: tuple[frozenset[int], ...]
    edges: tuple[tuple[int, int], ...]
    max_degree: int

    def has_edge(self, agent: int, house: int) -> bool:
        return house in self.adjacency[agent]


@dataclass(frozen=True)
class AltPath:
    """An alternating path or cycle relative to some base allocation.

    A path visits houses[0], agents[0], houses[1], agents[1], ..., houses[k]:
    agents[z] currently holds houses[z+1] and moves to houses[z], so houses[0]
    must be free and houses[k] is vacated.  A cycle has equally many houses
    and agents; agents[z] holds houses[(z+1) % k] and moves to houses[z].
    """

    houses: tuple[int, ...]
    agents: tuple[int, ...]
    is_cycle: bool = False

    def __post_init__(self) -> None:
        if self.is_cycle:
            if len(self.houses) != len(self.agents) or len(self.agents) < 2:
                raise ValidationError("cycle needs equally many houses and agents (>= 2)")
        elif self.agents:
            if len(self.houses) != len(self.agents) + 1:
                raise ValidationError("path needs one more house than agents")
        elif self.houses:
            raise ValidationError("empty path cannot contain houses")
        if len(set(self.houses)) != len(self.houses) or len(set(self.agents)) != len(self.agents):
            raise ValidationError("path repeats a vertex")

    @property
    def is_empty(self) -> bool:
        return not self.agents

    def vertex_sets(self) -> tuple[frozenset[int], frozenset[int]]:
        return frozenset(self.agents), frozenset(self.houses)


def instance_key(inst: Instance) -> tuple:
    """Hashable identity used for caching derived matrices."""
    return (inst.n, inst.m, inst.prefs, inst.axis)


@lru_cache(maxsize=256)
def _score_matrix_cached(key: tuple) -> np.ndarray:
    n, m, prefs, _axis = key
    scores = np.full((n, m), m, dtype=np.int64)
    if isinstance(prefs, OrdinalProfile):
        for i, ranking in enumerate(prefs.rankings):
            for pos, group in enumerate(ranking):
                for h in group:
                    scores[i, h] = pos
    else:
        scores = -np.asarray(prefs.values, dtype=np.int64)
    scores.setflags(write=False)
    return scores


def score_matrix(inst: Instance) -> np.ndarray:
    """(n, m) matrix where lower means better; unranked houses score ``m``.

    Cardinal profiles use negated values, so the same strict comparison
    implements both envy semantics.
    """
    return _score_matrix_cached(instance_key(inst))


def value_matrix(inst: Instance) -> np.ndarray:
    if not inst.is_cardinal:
        raise DomainError("value matrix requires a cardinal profile")
    values = np.asarray(inst.prefs.values, dtype=np.int64)
    values.setflags(write=False)
    return values


def _check_allocation(inst: Instance, alloc: Allocation) -> None:
    if len(alloc.assignment) != inst.n:
        raise ValidationError(f"allocation covers {len(alloc.assignment)} agents, expected {inst.n}")
    for h in alloc.assignment:
        if not 0 <= h < inst.m:
            raise ValidationError(f"allocation uses unknown house {h}")


def envy_report(inst: Instance, alloc: Allocation) -> EnvyReport:
    """Pairwise and aggregate envy of a complete allocation.

    Ordinal semantics: i envies j iff i ranks A(j) and either does not rank
    its own house or ranks A(j) strictly higher; pairwise amounts are 0/1.
    Cardinal semantics: pairwise amount is max(v_i(A(j)) - v_i(A(i)), 0).
    """
    _check_allocation(inst, alloc)
    n = inst.n
    scores = score_matrix(inst)
    own = scores[np.arange(n), list(alloc.assignment)]
    if inst.is_cardinal:
        values = value_matrix(inst)
        theirs = values[:, list(alloc.assignment)]
        amounts = np.maximum(theirs - values[np.arange(n), list(alloc.assignment)][:, None], 0)
    else:
        theirs = scores[:, list(alloc.assignment)]
        amounts = (theirs < own[:, None]).astype(np.int64)
    np.fill_diagonal(amounts, 0)
    per_agent = amounts.sum(axis=1)
    envious = tuple(int(i) for i in np.flatnonzero(per_agent > 0))
    return EnvyReport(
        pairwise=tuple(tuple(int(x) for x in row) for row in amounts),
        per_agent=tuple(int(x) for x in per_agent),
        envious=envious,
        envy_count=len(envious),
        total_envy=int(per_agent.sum()),
        max_envy=int(per_agent.max()) if n else 0,
    )


def measure_value(inst: Instance, alloc: Allocation, measure: Measure) -> int:
    report = envy_report(inst, alloc)
    if measure == "envy":
        return report.envy_count
    if measure == "total":
        return report.total_envy
    if measure == "max":
        return report.max_envy
    raise ValidationError(f"unknown measure {measure!r}")


def preference_graph(inst: Instance) -> PreferenceGraph:
    if inst.is_cardinal:
        adjacency = tuple(
            frozenset(h for h, v in enumerate(row) if v > 0) for row in inst.prefs.values
        )
    else:
        adjacency = tuple(inst.prefs.ranked(i) for i in range(inst.n))
    edges = tuple(sorted((i, h) for i in range(inst.n) for h in adjacency[i]))
    house_degree = [0] * inst.m
    for _, h in edges:
        house_degree[h] += 1
    degrees = [len(a) for a in adjacency] + house_degree
    return PreferenceGraph(
        n=inst.n,
        m=inst.m,
        adjacency=adjacency,
        edges=edges,
        max_degree=max(degrees) if degrees else 0,
    )


def apply_path(alloc: Allocation, path: AltPath) -> Allocation:
    """Apply one alternating path/cycle; exactly the agents on it move."""
    if path.is_empty:
        return alloc
    assignment = list(alloc.assignment)
    k = len(path.agents)
    if path.is_cycle:
        current = [path.houses[(z + 1) % k] for z in range(k)]
    else:
        if path.houses[0] in alloc.houses:
            raise ValidationError(f"path start house {path.houses[0]} is already allocated")
        current = list(path.houses[1:])
    for agent, held in zip(path.agents, current):
        if assignment[agent] != held:
            raise ValidationError(
                f"path is not alternating: agent {agent} holds {assignment[agent]}, expected {held}"
            )
    for z, agent in enumerate(path.agents):
        assignment[agent] = path.houses[z]
    return Allocation(tuple(assignment))


def apply_paths(alloc: Allocation, paths: Iterator[AltPath] | tuple[AltPath, ...] | list[AltPath]) -> Allocation:
    for path in paths:
        alloc = apply_path(alloc, path)
    return alloc


def symmetric_difference(
    a: Allocation,
    b: Allocation,
    graph: PreferenceGraph,
    *,
    allow_off_graph: bool = False,
) -> tuple[AltPath, ...]:
    """Decompose A Δ B into vertex-disjoint b-alternating paths and cycles.

    Paths start at a house free under ``b``; applying all returned elements to
    ``b`` reconstructs ``a``.  Edges of the difference must exist in the
    preference graph unless ``allow_off_graph`` is set.
    """
    if len(a.assignment) != len(b.assignment):
        raise ValidationError("allocations cover different agent sets")
    changed = [i for i in range(len(a.assignment)) if a[i] != b[i]]
    if not allow_off_graph:
        for i in changed:
            for h in (a[i], b[i]):
                if not graph.has_edge(i, h):
                    raise InconsistencyError(
                        f"edge (agent {i}, house {h}) of the difference is not in the preference graph"
                    )
    taker = {a[i]: i for i in changed}   # house -> agent that takes it under a
    holder = {b[i]: i for i in changed}  # house -> agent that holds it under b
    paths: list[AltPath] = []
    # Paths start at houses that are taken under a but free under b.
    starts = sorted(h for h in taker if h not in holder)
    visited: set[int] = set()
    for start in starts:
        houses = [start]
        agents = []
        h = start
        while h in taker:
            i = taker[h]
            agents.append(i)
            visited.add(i)
            h = b[i]
            houses.append(h)
        paths.append(AltPath(houses=tuple(houses), agents=tuple(agents)))
    remaining = [i for i in changed if i not in visited]
    while remaining:
        start = min(a[i] for i in remaining)
        houses = []
        agents = []
        h = start
        while True:
            i = taker[h]
            houses.append(h)
            agents.append(i)
            visited.add(i)
            h = b[i]
            if h == start:
                break
        paths.append(AltPath(houses=tuple(houses), agents=tuple(agents), is_cycle=True))
        remaining = [i for i in changed if i not in visited]
    return tuple(paths)


def hamming(a: Allocation, b: Allocation) -> int:
    """Number of agents holding different houses, the reallocation distance."""
    return sum(1 for x, y in zip(a.assignment, b.assignment) if x != y)


def welfare(inst: Instance, alloc: Allocation, kind: WelfareKind) -> int | float:
    """Utilitarian (sum), Nash (geometric mean, float), or egalitarian (min) welfare."""
    if not inst.is_cardinal:
        raise DomainError(f"{kind} welfare requires a cardinal profile")
    _check_allocation(inst, alloc)
    values = [inst.prefs.values[i][alloc[i]] for i in range(inst.n)]
    if kind == "utilitarian":
        return sum(values)
    if kind == "egalitarian":
        return min(values)
    if kind == "nash":
        if any(v == 0 for v in values):
            return 0.0
        return math.exp(sum(math.log(v) for v in values) / inst.n)
    raise ValidationError(f"unknown welfare kind {kind!r}")


def as_strict_complete_ordinal(inst: Instance) -> Instance:
    """Instance with a strict complete ordinal profile, converting cardinal input.

    Cardinal values must be pairwise distinct per agent; equal values have no
    strict order and raise ``DomainError``.
    """
    if not inst.is_cardinal:
        if not inst.prefs.is_complete(inst.m):
            raise DomainError("profile must rank every house")
        if not inst.prefs.is_strict():
            raise DomainError("profile must be strict")
        return inst
    rankings = []
    for i, row in enumerate(inst.prefs.values):
        if len(set(row)) != len(row):
            raise DomainError(f"agent {i} has equal values; no strict ranking exists")
        order = sorted(range(inst.m), key=lambda h: -row[h])
        rankings.append(tuple((h,) for h in order))
    return Instance(n=inst.n, m=inst.m, prefs=OrdinalProfile(tuple(rankings)), axis=inst.axis)


# --- JSON interchange -------------------------------------------------------

def _house_name(h: int) -> str:
    return f"h{h + 1}"


def _agent_name(i: int) -> str:
    return f"i{i + 1}"


def _parse_name(name: str, prefix: str, count: int, what: str) -> int:
    if not name.startswith(prefix):
        raise ValidationError(f"bad {what} name {name!r}")
    try:
        idx = int(name[len(prefix):]) - 1
    except ValueError:
        raise ValidationError(f"bad {what} name {name!r}") from None
    if not 0 <= idx < count:
        raise ValidationError(f"{what} {name!r} out of range")
    return idx


def instance_to_json(inst: Instance) -> str:
    if inst.is_cardinal:
        prefs = {"kind": "cardinal", "values": [list(row) for row in inst.prefs.values]}
    else:
        prefs = {
            "kind": "ordinal",
            "rankings": [
                [[_house_name(h) for h in group] for group in ranking]
                for ranking in inst.prefs.rankings
            ],
        }
    doc: dict = {"n": inst.n, "m": inst.m, "prefs": prefs}
    if inst.axis is not None:
        doc["axis"] = [_house_name(h) for h in inst.axis]
    return json.dumps(doc, separators=(",", ":"))


def instance_from_json(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON: {exc}") from None
    try:
        n, m = int(doc["n"]), int(doc["m"])
        prefs_doc = doc["prefs"]
        kind = prefs_doc["kind"]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"missing field in instance JSON: {exc}") from None
    if kind == "cardinal":
        prefs: Profile = CardinalProfile(
            tuple(tuple(int(v) for v in row) for row in prefs_doc["values"])
        )
    elif kind == "ordinal":
        prefs = OrdinalProfile(
            tuple(
                tuple(
                    tuple(_parse_name(h, "h", m, "house") for h in group)
                    for group in ranking
                )
                for ranking in prefs_doc["rankings"]
            )
        )
    else:
        raise ValidationError(f"unknown preference kind {kind!r}")
    axis = None
    if doc.get("axis") is not None:
        axis = tuple(_parse_name(h, "h", m, "house") for h in doc["axis"])
    return Instance(n=n, m=m, prefs=prefs, axis=axis)


def allocation_to_json(alloc: Allocation) -> str:
    return json.dumps(
        {_agent_name(i): _house_name(h) for i, h in enumerate(alloc.assignment)},
        separators=(",", ":"),
    )


def allocation_from_json(text: str, inst: Instance) -> Allocation:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict) or len(doc) != inst.n:
        raise ValidationError(f"allocation must map all {inst.n} agents")
    assignment = [-1] * inst.n
    for agent_name, house_name in doc.items():
        i = _parse_name(agent_name, "i", inst.n, "agent")
        assignment[i] = _parse_name(house_name, "h", inst.m, "house")
    if -1 in assignment:
        raise ValidationError("allocation misses an agent")
    alloc = Allocation(tuple(assignment))
    _check_allocation(inst, alloc)
    return alloc
