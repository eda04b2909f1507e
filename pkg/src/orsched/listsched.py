"""Event-driven greedy list scheduler and the LPT/HRR/LRR/RAND job orders."""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .core import Assignment, Instance, Schedule
from .rng import shuffle

__all__ = ["OrderPolicy", "LPT", "HRR", "LRR", "rand_policy", "order_jobs", "list_schedule"]

_KINDS = ("lpt", "hrr", "lrr", "rand")


@dataclass(frozen=True)
class OrderPolicy:
    """Job ordering criterion; RAND carries the shuffle seed."""

    kind: str
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown policy {self.kind!r}, expected one of {_KINDS}")
        if self.kind == "rand" and self.seed is None:
            raise ValueError("rand policy needs a seed")


LPT = OrderPolicy("lpt")
HRR = OrderPolicy("hrr")
LRR = OrderPolicy("lrr")


def rand_policy(seed: int) -> OrderPolicy:
    return OrderPolicy("rand", seed)


def order_jobs(instance: Instance, policy: OrderPolicy) -> list[int]:
    """Job ids in scheduling order; sorts are stable with ascending-id tie-break."""
    jobs = instance.jobs
    if policy.kind == "lpt":
        return [j.id for j in sorted(jobs, key=lambda j: (-j.p, j.id))]
    if policy.kind == "hrr":
        return [j.id for j in sorted(jobs, key=lambda j: (-j.req, j.id))]
    if policy.kind == "lrr":
        return [j.id for j in sorted(jobs, key=lambda j: (j.req, j.id))]
    ids = [j.id for j in jobs]
    shuffle(ids, policy.seed)
    return ids


def _first_le_descending(reqs: list[int], avail: int) -> int:
    """Leftmost index with reqs[idx] <= avail in a non-increasing list."""
    lo, hi = 0, len(reqs)
    while lo < hi:
        mid = (lo + hi) // 2
        if reqs[mid] > avail:
            lo = mid + 1
        else:
            hi = mid
    return lo


def list_schedule(instance: Instance, policy: OrderPolicy) -> Schedule:
    """Greedy event-driven simulation of the given list order.

    At t = 0 and after each batch of completions, while a machine is free the
    first job on the remaining list whose demand fits the free resource is
    started on the lowest-index free machine.  HRR/LRR use a binary-search
    shortcut over the req-sorted list; the result is identical to the linear
    scan (cross-checked in tests).
    """
    order = order_jobs(instance, policy)
    by_id = instance.job_by_id
    remaining = [by_id[i] for i in order]
    reqs = [j.req for j in remaining]
    fast = policy.kind in ("hrr", "lrr")

    free = list(range(instance.m))
    heapq.heapify(free)
    running: list[tuple[int, int, int]] = []  # (completion, machine, req)
    usage = 0
    t = 0
    assignments: list[Assignment] = []

    def first_fitting(avail: int) -> int | None:
        if not remaining:
            return None
        if fast:
            # HRR scans a non-increasing req list, LRR a non-decreasing one;
            # in both the first fitting job in list order is found in O(log n).
            idx = _first_le_descending(reqs, avail) if policy.kind == "hrr" else 0
            if idx < len(reqs) and reqs[idx] <= avail:
                return idx
            return None
        for idx, job in enumerate(remaining):
            if job.req <= avail:
                return idx
        return None

    while remaining:
        while free:
            idx = first_fitting(instance.capacity - usage)
            if idx is None:
                break
            job = remaining.pop(idx)
            reqs.pop(idx)
            machine = heapq.heappop(free)
            assignments.append(Assignment(job.id, machine, t, t + job.p))
            usage += job.req
            heapq.heappush(running, (t + job.p, machine, job.req))
        if not remaining:
            break
        # Advance to the next completion; all completions at that time are
        # applied before any new start (half-open intervals).
        t = running[0][0]
        while running and running[0][0] == t:
            _, machine, req = heapq.heappop(running)
            heapq.heappush(free, machine)
            usage -= req
    return Schedule(instance=instance, assignments=tuple(assignments))
