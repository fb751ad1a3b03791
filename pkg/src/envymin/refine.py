"""Reduce an envy measure by k with at most q reallocations.

One pass (``refine_once``) colors the preference graph's vertices and edges
red/green/blue, keeps the connected components that survive after deleting
blue edges and the four feasibility conditions, prices each survivor by the
exact measure drop of applying its red alternating paths/cycles, and solves
a 0/1 knapsack (drop = profit, agents moved = weight).  Every candidate
output is re-verified against the requested drop and distance before it is
returned, so success is sound for any measure and any coloring.

Driver modes:

* ``randomized``: uniform colorings from a seeded Philox stream, one
  independent substream per repetition, first success wins.
* ``exhaustive``: deterministic substitute for the randomized search.  A
  literal sweep over all 3^(|V|+|E|) colorings is unusable beyond toy sizes,
  but every successful coloring is dominated by the canonical coloring of
  its own verified output (paths red, their whole graph components red with
  green filler, everything else dead), so enumerating candidate targets
  within distance q and pipelining only their canonical colorings decides
  exactly the same question for the envy and total measures, and soundly
  for max.  Gated by oracle-style caps.
* ``oracle``: delegates to the exhaustive within-q oracle.
* sampled (``refine_sampled``): pre-commits t random houses and their
  holders to red before coloring the rest, trading repetitions for a
  smaller colored region.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass

import numpy as np

from envymin.core import (
    Allocation,
    AltPath,
    DomainError,
    InconsistencyError,
    Instance,
    Measure,
    PreferenceGraph,
    apply_paths,
    hamming,
    measure_value,
    preference_graph,
    symmetric_difference,
)
from envymin.oracle import DEFAULT_CAPS, OracleCaps, _all_assignments, measure_table

logger = logging.getLogger(__name__)

RED, GREEN, BLUE = 0, 1, 2

DEFAULT_REPETITION_CAP = 10**6


@dataclass(frozen=True)
class Coloring:
    """Total 3-coloring: ``vertices[v]`` for node ids (agents then houses),
    ``edges[e]`` parallel to ``PreferenceGraph.edges``."""

    vertices: tuple[int, ...]
    edges: tuple[int, ...]


@dataclass(frozen=True)
class Component:
    """A surviving component: its red alternating paths/cycles, the exact
    measure drop of applying them, and the number of agents they move."""

    nodes: tuple[int, ...]
    paths: tuple[AltPath, ...]
    drop: int
    agents_moved: int


@dataclass
class RefineStats:
    """Counters for experiments and the measure-obliviousness report."""

    colorings: int = 0
    verification_failures: int = 0


def theoretical_repetitions(q: int, d: int) -> int:
    """Coloring count after which a success is likely per the analysis: 3^(3q(d+1))."""
    return 3 ** (3 * q * (d + 1))


def sample_coloring(graph: PreferenceGraph, rng: np.random.Generator) -> Coloring:
    """Color every vertex and edge i.i.d. uniformly from the seeded stream."""
    nv = graph.n + graph.m
    draw = rng.integers(0, 3, size=nv + len(graph.edges))
    return Coloring(
        vertices=tuple(int(c) for c in draw[:nv]),
        edges=tuple(int(c) for c in draw[nv:]),
    )


def _house_node(graph: PreferenceGraph, house: int) -> int:
    return graph.n + house


def components_after_blue_removal(
    graph: PreferenceGraph, coloring: Coloring
) -> tuple[tuple[int, ...], ...]:
    """Connected components of the graph minus blue edges, as sorted node tuples."""
    nv = graph.n + graph.m
    parent = list(range(nv))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for (i, h), color in zip(graph.edges, coloring.edges):
        if color != BLUE:
            a, b = find(i), find(_house_node(graph, h))
            if a != b:
                parent[a] = b
    groups: dict[int, list[int]] = {}
    for v in range(nv):
        groups.setdefault(find(v), []).append(v)
    return tuple(tuple(sorted(g)) for g in sorted(groups.values(), key=min))


def _red_path_decomposition(
    graph: PreferenceGraph, a_hat: Allocation, nodes: tuple[int, ...], red_edges: list[tuple[int, int]]
) -> tuple[AltPath, ...] | None:
    """Decompose the red subgraph into alternating paths/cycles, or None.

    Valid pieces: paths with house endpoints, edges alternating between
    allocated and non-allocated, starting house free; cycles alternating all
    the way around.  Isolated red vertices are allowed and contribute
    nothing.
    """
    n = graph.n
    adj: dict[int, list[int]] = {}
    for i, h in red_edges:
        hn = _house_node(graph, h)
        adj.setdefault(i, []).append(hn)
        adj.setdefault(hn, []).append(i)
    if any(len(e) > 2 for e in adj.values()):
        return None

    def matched(agent: int, house_node: int) -> bool:
        return a_hat[agent] == house_node - n

    paths: list[AltPath] = []
    seen: set[int] = set()
    # path pieces first: walk from degree-1 house endpoints
    endpoints = sorted(v for v, e in adj.items() if len(e) == 1)
    for start in endpoints:
        if start in seen:
            continue
        if start < n:
            return None  # a path piece may not end at an agent
        walk = [start]
        seen.add(start)
        prev, node = None, start
        while True:
            nxt = [w for w in adj[node] if w != prev]
            if not nxt:
                break
            prev, node = node, nxt[0]
            if node in seen:
                return None
            seen.add(node)
            walk.append(node)
        flags = [
            matched(walk[z], walk[z + 1]) if walk[z] < n else matched(walk[z + 1], walk[z])
            for z in range(len(walk) - 1)
        ]
        if any(flags[z] == flags[z + 1] for z in range(len(flags) - 1)):
            return None
        if walk[-1] < n:
            return None
        if flags[0]:  # orient so the walk starts at the non-allocated end
            walk.reverse()
            flags.reverse()
        if flags[-1] is not True:
            return None
        start_house = walk[0] - n
        if start_house in a_hat.houses:
            return None
        paths.append(
            AltPath(
                houses=tuple(v - n for v in walk[0::2]),
                agents=tuple(walk[1::2]),
            )
        )
    # remaining red structure must be cycles
    cycle_nodes = sorted(v for v, e in adj.items() if v not in seen)
    for start in cycle_nodes:
        if start in seen or start < n:
            continue
        start_house = start - n
        holder = a_hat.holder(start_house)
        takers = [w for w in adj[start] if not matched(w, start)]
        if holder is None or len(takers) != 1 or holder not in adj[start]:
            return None
        houses = [start_house]
        agents = []
        agent = takers[0]
        seen.add(start)
        while True:
            if agent in seen:
                return None
            seen.add(agent)
            agents.append(agent)
            held = a_hat[agent]
            held_node = _house_node(graph, held)
            if held_node not in adj or held_node not in adj.get(agent, []):
                return None
            if held == houses[0]:
                break
            if held_node in seen:
                return None
            seen.add(held_node)
            houses.append(held)
            nxt = [w for w in adj[held_node] if not matched(w, held_node)]
            if len(nxt) != 1:
                return None
            agent = nxt[0]
        paths.append(AltPath(houses=tuple(houses), agents=tuple(agents), is_cycle=True))
    if any(v not in seen and v in adj for v in nodes):
        return None
    return tuple(paths)


def _paths_key(paths: tuple[AltPath, ...]) -> tuple:
    return tuple(sorted((p.is_cycle, p.houses, p.agents) for p in paths))


def _drop_of(
    inst: Instance,
    a_hat: Allocation,
    base: int,
    measure: Measure,
    paths: tuple[AltPath, ...],
    memo: dict,
) -> int:
    key = _paths_key(paths)
    if key not in memo:
        memo[key] = base - measure_value(inst, apply_paths(a_hat, paths), measure)
    return memo[key]


def feasibility_filter(
    node_components: tuple[tuple[int, ...], ...],
    graph: PreferenceGraph,
    inst: Instance,
    a_hat: Allocation,
    measure: Measure,
    coloring: Coloring,
    memo: dict | None = None,
) -> tuple[Component, ...]:
    """Apply the four feasibility conditions and price the survivors.

    (1) only red vertices; (2) the red subgraph splits into alternating
    paths/cycles; (3) no blue edge joins two vertices of the component;
    (4) no surviving partner makes the combined drop fall short of the sum
    (marked pairs are deleted simultaneously after the full scan).
    """
    memo = {} if memo is None else memo
    base = measure_value(inst, a_hat, measure)
    comp_of: dict[int, int] = {}
    for idx, nodes in enumerate(node_components):
        for v in nodes:
            comp_of[v] = idx
    red_edges_by_comp: dict[int, list[tuple[int, int]]] = {}
    blue_inside: set[int] = set()
    for (i, h), color in zip(graph.edges, coloring.edges):
        same = comp_of[i] == comp_of[_house_node(graph, h)]
        if color == RED and same:
            red_edges_by_comp.setdefault(comp_of[i], []).append((i, h))
        elif color == BLUE and same:
            blue_inside.add(comp_of[i])

    survivors: list[Component] = []
    for idx, nodes in enumerate(node_components):
        if any(coloring.vertices[v] != RED for v in nodes):
            continue
        if idx in blue_inside:
            continue
        paths = _red_path_decomposition(graph, a_hat, nodes, red_edges_by_comp.get(idx, []))
        if paths is None:
            continue
        drop = _drop_of(inst, a_hat, base, measure, paths, memo)
        survivors.append(
            Component(
                nodes=nodes,
                paths=paths,
                drop=drop,
                agents_moved=sum(len(p.agents) for p in paths),
            )
        )
    marked: set[int] = set()
    for a in range(len(survivors)):
        for b in range(a + 1, len(survivors)):
            joint = _drop_of(
                inst, a_hat, base, measure, survivors[a].paths + survivors[b].paths, memo
            )
            if joint < survivors[a].drop + survivors[b].drop:
                marked.add(a)
                marked.add(b)
    return tuple(c for idx, c in enumerate(survivors) if idx not in marked)


def knapsack_select(
    components: tuple[Component, ...] | list[Component], q: int, k: int
) -> tuple[list[int] | None, tuple[int, ...]]:
    """0/1 knapsack: drops are profits, agents moved are weights.

    Returns (indices of a subset with total weight <= q and total profit
    >= k, or None) plus the best achievable profit for every budget 0..q.
    Non-positive profits can never help and are skipped.
    """
    q = max(q, 0)
    items = [
        (idx, c.drop, c.agents_moved)
        for idx, c in enumerate(components)
        if c.drop > 0 and c.agents_moved <= q
    ]
    table = [[0] * (q + 1)]
    for _, drop, weight in items:
        prev = table[-1]
        row = prev[:]
        for w in range(weight, q + 1):
            cand = prev[w - weight] + drop
            if cand > row[w]:
                row[w] = cand
        table.append(row)
    best_by_budget = tuple(table[-1])
    if best_by_budget[q] < k:
        return None, best_by_budget
    chosen: list[int] = []
    w = q
    for row_idx in range(len(items), 0, -1):
        if table[row_idx][w] != table[row_idx - 1][w]:
            idx, _, weight = items[row_idx - 1]
            chosen.append(idx)
            w -= weight
    chosen.reverse()
    return chosen, best_by_budget


def refine_once(
    inst: Instance,
    a_hat: Allocation,
    q: int,
    k: int,
    measure: Measure,
    coloring: Coloring,
    *,
    graph: PreferenceGraph | None = None,
    memo: dict | None = None,
    stats: RefineStats | None = None,
) -> Allocation | None:
    """One full pass under a fixed coloring; None is a normal outcome.

    Any returned allocation is re-verified to drop the measure by at least k
    while moving at most q agents, so soundness does not depend on the
    coloring (or, for the max measure, on drops adding up).
    """
    if k <= 0:
        return a_hat
    if stats is not None:
        stats.colorings += 1
    if q <= 0:
        return None
    graph = graph or preference_graph(inst)
    memo = {} if memo is None else memo
    comps = components_after_blue_removal(graph, coloring)
    survivors = feasibility_filter(comps, graph, inst, a_hat, measure, coloring, memo)
    chosen, _ = knapsack_select(survivors, q, k)
    if chosen is None:
        return None
    paths = tuple(p for idx in chosen for p in survivors[idx].paths)
    result = apply_paths(a_hat, paths)
    base = measure_value(inst, a_hat, measure)
    if measure_value(inst, result, measure) > base - k or hamming(result, a_hat) > q:
        if stats is not None:
            stats.verification_failures += 1
        logger.debug(
            "selected components did not achieve the claimed %s drop; coloring rejected", measure
        )
        return None
    return result


def _require_on_graph(inst: Instance, graph: PreferenceGraph, a_hat: Allocation) -> None:
    for i in range(inst.n):
        if not graph.has_edge(i, a_hat[i]):
            raise InconsistencyError(
                f"initial allocation assigns agent {i} the unranked house {a_hat[i]}"
            )


def _canonical_coloring(
    graph: PreferenceGraph, target_paths: tuple[AltPath, ...]
) -> Coloring:
    """Coloring whose surviving components are exactly the graph components
    hosting the target's paths: those all red (path edges red, filler green),
    everything else dead green."""
    nv = graph.n + graph.m
    parent = list(range(nv))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, h in graph.edges:
        a, b = find(i), find(_house_node(graph, h))
        if a != b:
            parent[a] = b
    live_roots = set()
    path_edges = set()
    for p in target_paths:
        for agent in p.agents:
            live_roots.add(find(agent))
        if p.is_cycle:
            k = len(p.agents)
            for z, agent in enumerate(p.agents):
                path_edges.add((agent, p.houses[z]))
                path_edges.add((agent, p.houses[(z + 1) % k]))
        else:
            for z, agent in enumerate(p.agents):
                path_edges.add((agent, p.houses[z]))
                path_edges.add((agent, p.houses[z + 1]))
    vertices = tuple(RED if find(v) in live_roots else GREEN for v in range(nv))
    edges = tuple(RED if e in path_edges else GREEN for e in graph.edges)
    return Coloring(vertices=vertices, edges=edges)


def refine(
    inst: Instance,
    a_hat: Allocation,
    q: int,
    k: int,
    measure: Measure = "envy",
    mode: str = "randomized",
    seed: int | None = None,
    reps: int | None = None,
    rep_cap: int = DEFAULT_REPETITION_CAP,
    time_budget: float | None = None,
    caps: OracleCaps = DEFAULT_CAPS,
    stats: RefineStats | None = None,
) -> Allocation | None:
    """Find an allocation cutting the measure by k within q reallocations.

    Returns the first success (deterministic given the seed) or None.
    Randomized mode stops after ``reps`` colorings (default: the theoretical
    count capped by ``rep_cap``) or after ``time_budget`` seconds, whichever
    comes first; a time-budget stop trades determinism for latency.
    """
    if q < 0 or k < 0:
        raise DomainError("q and k must be non-negative")
    if k == 0:
        return a_hat
    base = measure_value(inst, a_hat, measure)
    if k > base or q == 0:
        return None
    graph = preference_graph(inst)

    if mode == "randomized":
        if seed is None:
            raise DomainError("randomized mode needs a seed")
        _require_on_graph(inst, graph, a_hat)
        d = graph.max_degree
        budget = reps if reps is not None else min(theoretical_repetitions(q, d), rep_cap)
        logger.debug(
            "randomized refine: %d repetitions (theoretical 3^(3q(d+1)) = %d)",
            budget,
            theoretical_repetitions(q, d),
        )
        memo: dict = {}
        root = np.random.Philox(key=seed)
        deadline = None if time_budget is None else time.monotonic() + time_budget
        for rep in range(budget):
            if deadline is not None and time.monotonic() > deadline:
                logger.debug("randomized refine stopped by the time budget after %d colorings", rep)
                return None
            rng = np.random.Generator(root.jumped(rep))
            coloring = sample_coloring(graph, rng)
            result = refine_once(
                inst, a_hat, q, k, measure, coloring, graph=graph, memo=memo, stats=stats
            )
            if result is not None:
                return result
        return None

    if mode in ("exhaustive", "exhaustive_colorings"):
        if inst.n > caps.max_agents or inst.m > caps.max_houses:
            raise DomainError(
                f"exhaustive mode refused: n={inst.n}, m={inst.m} exceed caps "
                f"({caps.max_agents}, {caps.max_houses})"
            )
        _require_on_graph(inst, graph, a_hat)
        arr = _all_assignments(inst.n, inst.m)
        values = measure_table(inst, measure)
        source = np.asarray(a_hat.assignment, dtype=arr.dtype)
        mask = (arr != source).sum(axis=1) <= q
        mask &= values <= base - k
        allowed = np.zeros((inst.n, inst.m), dtype=bool)
        for i in range(inst.n):
            for h in graph.adjacency[i]:
                allowed[i, h] = True
        mask &= allowed[np.arange(inst.n)[None, :], arr].all(axis=1)
        memo = {}
        for idx in np.flatnonzero(mask):
            target = Allocation(tuple(int(h) for h in arr[idx]))
            paths = symmetric_difference(target, a_hat, graph)
            coloring = _canonical_coloring(graph, paths)
            result = refine_once(
                inst, a_hat, q, k, measure, coloring, graph=graph, memo=memo, stats=stats
            )
            if result is not None:
                return result
        return None

    if mode in ("oracle", "oracle_fallback"):
        from envymin.oracle import min_measure_within_q

        optimum, witness = min_measure_within_q(inst, a_hat, q, measure, caps)
        return witness if optimum <= base - k else None

    raise DomainError(f"unknown refine mode {mode!r}")


def _sampling_depth(q: int, d: int, m: int) -> int:
    t = 0
    limit = 3 * q * (d + 1)
    while t + 1 < m and t + 1 <= limit and (q * (d + 1) - (t + 1)) * 9 > (m - (t + 1)):
        t += 1
    if not (q * (d + 1) - t) * 9 > (m - t):
        return 0
    return t


def refine_sampled(
    inst: Instance,
    a_hat: Allocation,
    q: int,
    k: int,
    measure: Measure = "envy",
    seed: int | None = None,
    rep_cap: int = DEFAULT_REPETITION_CAP,
    stats: RefineStats | None = None,
) -> Allocation | None:
    """House-sampling acceleration of the randomized mode.

    Samples t houses (t maximal with (q(d+1)-t)/(m-t) > 1/9), forces them and
    their holders red, and colors the rest randomly; repeated over fresh
    samples with 9^(q(d+1)-t) colorings each (all bounded by ``rep_cap``).
    """
    if seed is None:
        raise DomainError("sampled mode needs a seed")
    if q < 0 or k < 0:
        raise DomainError("q and k must be non-negative")
    if k == 0:
        return a_hat
    base = measure_value(inst, a_hat, measure)
    if k > base or q == 0:
        return None
    graph = preference_graph(inst)
    _require_on_graph(inst, graph, a_hat)
    d = graph.max_degree
    t = _sampling_depth(q, d, inst.m)
    if t == 0:
        return refine(
            inst, a_hat, q, k, measure, mode="randomized", seed=seed, rep_cap=rep_cap, stats=stats
        )
    hits = math.comb(min(q * (d + 1), inst.m), t)
    outer = min(max(1, math.ceil(math.comb(inst.m, t) / max(hits, 1))), rep_cap)
    inner = max(1, min(9 ** (q * (d + 1) - t), max(rep_cap // outer, 1)))
    memo: dict = {}
    for sample_idx in range(outer):
        rng = np.random.Generator(
            np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(sample_idx,)))
        )
        sampled = [int(h) for h in rng.choice(inst.m, size=t, replace=False)]
        forced = {_house_node(graph, h) for h in sampled}
        forced.update(i for i in range(inst.n) if a_hat[i] in sampled)
        for _ in range(inner):
            coloring = sample_coloring(graph, rng)
            vertices = tuple(
                RED if v in forced else c for v, c in enumerate(coloring.vertices)
            )
            result = refine_once(
                inst,
                a_hat,
                q,
                k,
                measure,
                Coloring(vertices=vertices, edges=coloring.edges),
                graph=graph,
                memo=memo,
                stats=stats,
            )
            if result is not None:
                return result
    return None
