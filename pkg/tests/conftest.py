import pytest

from envymin.core import Allocation, AltPath, Instance, OrdinalProfile


def strict_profile(orders):
    """OrdinalProfile from per-agent strict house orders (best first)."""
    return OrdinalProfile(tuple(tuple((h,) for h in order) for order in orders))


@pytest.fixture
def five_by_eight():
    """5 agents, 8 houses, weak partial rankings; the identity allocation has
    5 envious agents yet 5 reallocations reach an envy-free allocation."""
    rankings = (
        ((4, 1, 3), (7,), (0,)),
        ((4, 3), (1,), (0,), (7,)),
        ((4, 1), (3,), (6,), (2,)),
        ((4, 1), (3,), (2,), (6,)),
        ((1, 3), (4,), (5,), (0,)),
    )
    return Instance(n=5, m=8, prefs=OrdinalProfile(rankings))


@pytest.fixture
def five_by_eight_initial():
    return Allocation((0, 1, 2, 3, 4))


@pytest.fixture
def five_by_eight_target():
    return Allocation((7, 0, 6, 2, 5))


@pytest.fixture
def five_by_eight_paths():
    return (
        AltPath(houses=(7, 0, 1), agents=(0, 1)),
        AltPath(houses=(6, 2, 3), agents=(2, 3)),
        AltPath(houses=(5, 4), agents=(4,)),
    )


@pytest.fixture
def four_by_seven_peaked():
    """4 agents, 7 houses, single-peaked on h1..h7; h4 is a shared peak with
    span {h4,h5,h6} and the minimum number of envious agents is 1."""
    orders = [
        (1, 0, 2, 3, 4, 5, 6),
        (3, 4, 5, 2, 1, 0, 6),
        (3, 4, 5, 2, 6, 1, 0),
        (3, 4, 5, 6, 2, 1, 0),
    ]
    return Instance(n=4, m=7, prefs=strict_profile(orders), axis=tuple(range(7)))


@pytest.fixture
def contested_top():
    """3 agents, 4 houses, everyone ranks h1 first: envy-free only when h1
    stays unallocated, so no minimum-envy allocation is Pareto optimal."""
    orders = [
        (0, 1, 2, 3),
        (0, 2, 1, 3),
        (0, 3, 1, 2),
    ]
    return Instance(n=3, m=4, prefs=strict_profile(orders), axis=(0, 1, 2, 3))
