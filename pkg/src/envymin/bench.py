"""Experiment harness: welfare loss and envy drop against the reallocation
budget, plus welfare-loss sweeps on the single-peaked/dipped domains.

Every cell is recomputable bit-identically from (seed, parameters): the
instance for cell (m, index) is generated from a seed derived via
``SeedSequence(entropy=seed, spawn_key=(m, index))``.  Results are written
in the fixed CSV schema ``m,q,metric,mean,stddev,instances,seed`` (the q
column is empty for domain sweeps); stddev is the population deviation.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from envymin.core import (
    Allocation,
    Instance,
    Measure,
    WelfareKind,
    apply_paths,
    measure_value,
    preference_graph,
    symmetric_difference,
    welfare,
)
from envymin.gen import gen_single_dipped, gen_single_peaked, gen_uniform_cardinal
from envymin.oracle import OracleCaps, min_measure_exhaustive

# sized for the reference protocol (n = 6, houses up to 11)
SWEEP_CAPS = OracleCaps(max_agents=7, max_houses=12)
from envymin.refine import Component, knapsack_select
from envymin.welfare import max_egalitarian, max_nash, max_utilitarian

INITIAL_ALLOCATORS = {
    "utilitarian": max_utilitarian,
    "nash": max_nash,
    "egalitarian": max_egalitarian,
}


@dataclass(frozen=True)
class BenchRow:
    m: int
    q: int | None
    metric: str
    mean: float
    stddev: float
    instances: int
    seed: int


def _instance_seed(seed: int, m: int, index: int) -> int:
    return int(np.random.SeedSequence(entropy=seed, spawn_key=(m, index)).generate_state(1)[0])


def _subset_drop(inst, a_hat, base, measure, paths, memo, subset):
    key = frozenset(subset)
    if key not in memo:
        chosen = [paths[i] for i in sorted(key)]
        memo[key] = base - measure_value(inst, apply_paths(a_hat, chosen), measure)
    return memo[key]


def additive_blocks(
    inst: Instance, a_hat: Allocation, measure: Measure, paths
) -> list[tuple[tuple[int, ...], int]]:
    """Partition the paths into blocks whose drops add exactly across blocks.

    Starts from singletons and merges any family of blocks whose combined
    drop differs from the sum, until drops are additive over every block
    subset.  Needed because single-path drops do not add in general, yet the
    knapsack prices subsets by sums.
    """
    base = measure_value(inst, a_hat, measure)
    memo: dict = {}
    blocks = [tuple([i]) for i in range(len(paths))]
    while True:
        block_drops = [
            _subset_drop(inst, a_hat, base, measure, paths, memo, b) for b in blocks
        ]
        violation = None
        for size in range(2, len(blocks) + 1):
            for combo in itertools.combinations(range(len(blocks)), size):
                union = tuple(sorted(i for b in combo for i in blocks[b]))
                joint = _subset_drop(inst, a_hat, base, measure, paths, memo, union)
                if joint != sum(block_drops[b] for b in combo):
                    violation = combo
                    break
            if violation:
                break
        if violation is None:
            return [
                (b, drop) for b, drop in zip(blocks, block_drops)
            ]
        merged = tuple(sorted(i for b in violation for i in blocks[b]))
        blocks = [b for idx, b in enumerate(blocks) if idx not in violation] + [merged]


def _aggregate(rows_per_metric: dict, m: int, q: int | None, count: int, seed: int):
    out = []
    for metric, values in rows_per_metric.items():
        arr = np.asarray(values, dtype=float)
        out.append(
            BenchRow(
                m=m,
                q=q,
                metric=metric,
                mean=float(arr.mean()),
                stddev=float(arr.std()),
                instances=count,
                seed=seed,
            )
        )
    return out


def run_q_sweep(
    n: int,
    m_range,
    instances_per_cell: int,
    initial: WelfareKind,
    measure: Measure,
    seed: int,
    q_values=None,
    caps: OracleCaps = SWEEP_CAPS,
) -> list[BenchRow]:
    """Per (m, q): average measure drop and welfare loss of refining the
    welfare-maximizing allocation toward the global optimum with at most q
    reallocations, selected by the knapsack DP over additive path blocks."""
    allocator = INITIAL_ALLOCATORS[initial]
    q_values = list(q_values) if q_values is not None else list(range(1, n + 1))
    rows: list[BenchRow] = []
    for m in m_range:
        cells: dict[int, dict[str, list[float]]] = {
            q: {"drop": [], "welfare_loss_abs": [], "welfare_loss_rel": []} for q in q_values
        }
        for index in range(instances_per_cell):
            inst = gen_uniform_cardinal(n, m, _instance_seed(seed, m, index))
            a_hat = allocator(inst)
            base = measure_value(inst, a_hat, measure)
            base_welfare = welfare(inst, a_hat, initial)
            optimum, target = min_measure_exhaustive(inst, measure, caps)
            paths = symmetric_difference(target, a_hat, preference_graph(inst), allow_off_graph=True)
            blocks = additive_blocks(inst, a_hat, measure, paths)
            items = [
                Component(
                    nodes=(),
                    paths=tuple(paths[i] for i in block),
                    drop=drop,
                    agents_moved=sum(len(paths[i].agents) for i in block),
                )
                for block, drop in blocks
            ]
            previous_drop = None
            for q in sorted(q_values):
                chosen, profits = knapsack_select(items, q, 0)
                selected = tuple(p for idx in chosen for p in items[idx].paths)
                refined = apply_paths(a_hat, selected)
                drop = base - measure_value(inst, refined, measure)
                assert drop == profits[q], "additive blocks must price exactly"
                if previous_drop is not None and drop < previous_drop:
                    raise AssertionError("measure drop must be non-decreasing in q")
                previous_drop = drop
                if q == n and drop != base - optimum:
                    raise AssertionError("full budget must reach the global optimum")
                loss = base_welfare - welfare(inst, refined, initial)
                cells[q]["drop"].append(drop)
                cells[q]["welfare_loss_abs"].append(loss)
                cells[q]["welfare_loss_rel"].append(
                    loss / base_welfare if base_welfare > 0 else 0.0
                )
        for q in q_values:
            rows.extend(_aggregate(cells[q], m, q, instances_per_cell, seed))
    return rows


def run_domain_sweep(
    n: int,
    m_range,
    instances: int,
    domain: str,
    seed: int,
) -> list[BenchRow]:
    """Per m: average utilitarian-welfare loss of the minimum-envy allocation
    relative to the utilitarian maximizer, on generated domain instances."""
    from envymin.dipped import min_envy_single_dipped
    from envymin.peaked import min_envy_single_peaked

    if domain == "peaked":
        generate, solve = gen_single_peaked, min_envy_single_peaked
    elif domain == "dipped":
        generate, solve = gen_single_dipped, min_envy_single_dipped
    else:
        raise ValueError(f"unknown domain {domain!r}")
    rows: list[BenchRow] = []
    for m in m_range:
        metrics: dict[str, list[float]] = {"welfare_loss_abs": [], "welfare_loss_rel": []}
        for index in range(instances):
            inst = generate(n, m, _instance_seed(seed, m, index))
            fair = solve(inst)
            best = welfare(inst, max_utilitarian(inst), "utilitarian")
            loss = best - welfare(inst, fair, "utilitarian")
            if loss < 0:
                raise AssertionError("welfare loss cannot be negative")
            metrics["welfare_loss_abs"].append(loss)
            metrics["welfare_loss_rel"].append(loss / best if best > 0 else 0.0)
        rows.extend(_aggregate(metrics, m, None, instances, seed))
    return rows


CSV_HEADER = ("m", "q", "metric", "mean", "stddev", "instances", "seed")


def write_csv(rows: list[BenchRow], path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow(
                [
                    row.m,
                    "" if row.q is None else row.q,
                    row.metric,
                    f"{row.mean:.12g}",
                    f"{row.stddev:.12g}",
                    row.instances,
                    row.seed,
                ]
            )
