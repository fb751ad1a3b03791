"""Shared test helpers: independent envy recomputation and instance builders.

The envy functions here are deliberately written dict-at-a-time, without
numpy and without touching envymin internals, so they can serve as an
independent oracle for the library's vectorized implementations.
"""

from itertools import permutations

import numpy as np

from envymin.core import Allocation, CardinalProfile, Instance, OrdinalProfile


def naive_envy_sets(inst, alloc):
    """(envious set, per-agent amounts) computed straight from the definitions."""
    n, m = inst.n, inst.m
    amounts = []
    for i in range(n):
        if inst.is_cardinal:
            better = lambda h, own: inst.prefs.values[i][h] > inst.prefs.values[i][own]
            amount = lambda h, own: max(inst.prefs.values[i][h] - inst.prefs.values[i][own], 0)
        else:
            pos = {}
            for p, group in enumerate(inst.prefs.rankings[i]):
                for h in group:
                    pos[h] = p
            unranked = m
            better = lambda h, own: pos.get(h, unranked) < pos.get(own, unranked)
            amount = lambda h, own: 1 if better(h, own) else 0
        own = alloc[i]
        amounts.append(sum(amount(alloc[j], own) for j in range(n) if j != i))
    envious = {i for i in range(n) if amounts[i] > 0}
    return envious, amounts


def naive_measure(inst, alloc, measure):
    envious, amounts = naive_envy_sets(inst, alloc)
    if measure == "envy":
        return len(envious)
    if measure == "total":
        return sum(amounts)
    return max(amounts) if amounts else 0


def naive_min_measure(inst, measure):
    """Second, independently coded enumerator over all complete allocations."""
    best = None
    for assignment in permutations(range(inst.m), inst.n):
        value = naive_measure(inst, Allocation(assignment), measure)
        if best is None or value < best:
            best = value
    return best


def rng(seed, *stream):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=stream)))


def random_cardinal(n, m, seed, low=0, high=10):
    gen = rng(seed, 101)
    values = tuple(tuple(int(v) for v in row) for row in gen.integers(low, high + 1, size=(n, m)))
    return Instance(n=n, m=m, prefs=CardinalProfile(values))


def random_sparse_ordinal(n, m, d, seed):
    """Strict partial rankings with every vertex degree (agents and houses) <= d."""
    gen = rng(seed, 202)
    house_load = [0] * m
    rankings = []
    for _ in range(n):
        want = int(gen.integers(1, d + 1))
        order = [int(h) for h in gen.permutation(m)]
        chosen = [h for h in order if house_load[h] < d][:want]
        if not chosen:
            chosen = [min(range(m), key=lambda h: house_load[h])]
        for h in chosen:
            house_load[h] += 1
        rankings.append(tuple((h,) for h in chosen))
    return Instance(n=n, m=m, prefs=OrdinalProfile(tuple(rankings)))


def random_on_graph_allocation(inst, seed):
    """Complete allocation whose edges all lie in the preference graph, or None.

    Greedy randomized matching with restarts; fine for the tiny sparse
    instances used in tests.
    """
    gen = rng(seed, 303)
    if inst.is_cardinal:
        adjacency = [
            [h for h, v in enumerate(inst.prefs.values[i]) if v > 0] for i in range(inst.n)
        ]
    else:
        adjacency = [sorted(inst.prefs.ranked(i)) for i in range(inst.n)]
    for _ in range(200):
        taken = set()
        assignment = []
        for i in gen.permutation(inst.n):
            options = [h for h in adjacency[int(i)] if h not in taken]
            if not options:
                break
            pick = int(options[int(gen.integers(len(options)))])
            taken.add(pick)
            assignment.append((int(i), pick))
        if len(assignment) == inst.n:
            out = [0] * inst.n
            for i, h in assignment:
                out[i] = h
            return Allocation(tuple(out))
    return None


def random_single_dipped_ties(n, m, tie_size, seed):
    """Single-dipped ordinal profile with a common bottom tie-group of the
    given size, contiguous on the axis h1..hm."""
    gen = rng(seed, 404)
    start = int(gen.integers(0, m - tie_size + 1))
    ties = list(range(start, start + tie_size))
    left = list(range(start - 1, -1, -1))          # nearest-to-dip first
    right = list(range(start + tie_size, m))
    rankings = []
    for _ in range(n):
        merged = []
        li, ri = len(left) - 1, len(right) - 1
        while li >= 0 or ri >= 0:
            take_left = ri < 0 or (li >= 0 and gen.integers(2) == 0)
            if take_left:
                merged.append(left[li])
                li -= 1
            else:
                merged.append(right[ri])
                ri -= 1
        ranking = tuple((h,) for h in merged) + ((tuple(ties),) if ties else ())
        rankings.append(ranking)
    return Instance(
        n=n, m=m, prefs=OrdinalProfile(tuple(rankings)), axis=tuple(range(m))
    )
