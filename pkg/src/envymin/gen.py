"""Seeded synthetic instance generators.

All randomness flows through NumPy's Philox 4x64-10 counter-based generator,
keyed via ``SeedSequence(entropy=seed, spawn_key=(tag, n, m))``.  Philox is
named, versioned, and splittable, so seeds stay portable and every generator
is a pure function of (parameters, seed): identical calls produce
byte-identical instances.
"""

from __future__ import annotations

import numpy as np

from envymin.core import CardinalProfile, Instance, ValidationError

_UNIFORM, _PEAKED, _DIPPED = 0, 1, 2


def rng_stream(seed: int, *spawn_key: int) -> np.random.Generator:
    """Philox generator on an independent, reproducible substream."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=spawn_key))
    )


def _check_dims(n: int, m: int) -> None:
    if n > m:
        raise ValidationError(f"need n <= m, got n={n}, m={m}")


def gen_uniform_cardinal(n: int, m: int, seed: int) -> Instance:
    """Each value i.i.d. uniform on the integers 0..10."""
    _check_dims(n, m)
    gen = rng_stream(seed, _UNIFORM, n, m)
    values = gen.integers(0, 11, size=(n, m))
    return Instance(n=n, m=m, prefs=CardinalProfile(tuple(tuple(int(v) for v in row) for row in values)))


def _unimodal_row(gen: np.random.Generator, m: int, top: int, top_value: int, sign: int) -> list[int]:
    """Strictly unimodal (sign=+1) or anti-unimodal (sign=-1) distinct values.

    Cumulative steps of 1..3 on each side of ``top``; redraws until the two
    sides collide on no value, so every agent's values are pairwise distinct.
    """
    while True:
        row = [0] * m
        row[top] = top_value
        for h in range(top - 1, -1, -1):
            row[h] = row[h + 1] - sign * int(gen.integers(1, 4))
        for h in range(top + 1, m):
            row[h] = row[h - 1] - sign * int(gen.integers(1, 4))
        if len(set(row)) == m:
            return row


def gen_single_peaked(n: int, m: int, seed: int) -> Instance:
    """Cardinal, strictly single-peaked on the axis h1..hm.

    Uniform peak position, peak value 3m + uniform 0..10, strictly decreasing
    outward; all values positive and pairwise distinct per agent.
    """
    _check_dims(n, m)
    gen = rng_stream(seed, _PEAKED, n, m)
    rows = []
    for _ in range(n):
        peak = int(gen.integers(0, m))
        peak_value = 3 * m + int(gen.integers(0, 11))
        rows.append(tuple(_unimodal_row(gen, m, peak, peak_value, sign=+1)))
    return Instance(n=n, m=m, prefs=CardinalProfile(tuple(rows)), axis=tuple(range(m)))


def gen_single_dipped(n: int, m: int, seed: int) -> Instance:
    """Mirror construction: uniform dip position, values strictly increasing
    outward from dip value 1 + uniform 0..10; positive and distinct per agent."""
    _check_dims(n, m)
    gen = rng_stream(seed, _DIPPED, n, m)
    rows = []
    for _ in range(n):
        dip = int(gen.integers(0, m))
        dip_value = 1 + int(gen.integers(0, 11))
        rows.append(tuple(_unimodal_row(gen, m, dip, dip_value, sign=-1)))
    return Instance(n=n, m=m, prefs=CardinalProfile(tuple(rows)), axis=tuple(range(m)))
