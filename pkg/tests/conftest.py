"""Shared fixtures: the worked reference instance and seeded fuzz generators."""

from __future__ import annotations

import pytest

from orsched.core import Instance, Job
from orsched.rng import SplitMix64


@pytest.fixture
def w1() -> Instance:
    """Two heavy jobs and one light on two machines; OPT is 4."""
    return Instance(m=2, capacity=10, jobs=(Job(0, 2, 6), Job(1, 2, 6), Job(2, 2, 3)))


def small_instance(seed: int) -> Instance:
    """Oracle-scale fuzz family: n <= 8, m in {2,3,4}, p in [1,8], capacity 12."""
    rng = SplitMix64(seed)
    n = 1 + rng.next() % 8
    m = 2 + rng.next() % 3
    cap = 12
    jobs = tuple(Job(i, 1 + rng.next() % 8, rng.next() % (cap + 1)) for i in range(n))
    return Instance(m=m, capacity=cap, jobs=jobs)


def medium_instance(seed: int) -> Instance:
    """Mid-size family with varied capacities and machine counts (n <= 60)."""
    rng = SplitMix64(seed ^ 0x9D2C5680)
    n = 2 + rng.next() % 59
    m = 2 + rng.next() % 7
    cap = 5 + rng.next() % 60
    jobs = tuple(Job(i, 1 + rng.next() % 20, rng.next() % (cap + 1)) for i in range(n))
    return Instance(m=m, capacity=cap, jobs=jobs)


def large_instance(seed: int) -> Instance:
    """Invariant-stress family without oracle support (n <= 200)."""
    rng = SplitMix64(seed ^ 0x5DEECE66D)
    n = 1 + rng.next() % 200
    m = 2 + rng.next() % 9
    cap = 6 + rng.next() % 95
    jobs = tuple(Job(i, 1 + rng.next() % 50, rng.next() % (cap + 1)) for i in range(n))
    return Instance(m=m, capacity=cap, jobs=jobs)


def tiny_instance(seed: int) -> Instance:
    """Cross-check family small enough for permutation enumeration (n <= 5)."""
    rng = SplitMix64(seed ^ 0xFACE)
    n = 1 + rng.next() % 5
    m = 1 + rng.next() % 4
    cap = 3 + rng.next() % 12
    jobs = tuple(Job(i, 1 + rng.next() % 9, rng.next() % (cap + 1)) for i in range(n))
    return Instance(m=m, capacity=cap, jobs=jobs)
