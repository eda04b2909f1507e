"""Exact optimal-makespan search for desk-scale instances.

Branch-and-bound over event-anchored schedules: in some optimal schedule
every start is 0 or the completion time of another job, so the search
branches, at each event time, on which pending jobs to start.  A naive
permutation-enumeration oracle cross-checks the result on tiny instances.
"""

from __future__ import annotations

from bisect import insort
from dataclasses import dataclass
from itertools import permutations

from .core import Assignment, Instance, Ratio, Schedule, makespan
from .listsched import HRR, LPT, list_schedule

__all__ = ["OracleResult", "OracleBudgetError", "optimal_makespan", "brute_force_makespan", "ratio"]


class OracleBudgetError(RuntimeError):
    """Raised when a non-exhausted oracle result is used as if it were exact."""


@dataclass(frozen=True)
class OracleResult:
    opt: int
    optimal_schedule: Schedule
    nodes_explored: int
    exhausted: bool


def optimal_makespan(instance: Instance, node_budget: int = 1_000_000) -> OracleResult:
    """Exact optimal makespan when the search exhausts within node_budget.

    Pruning: the best list-scheduling incumbent, exact machine-volume and
    resource-volume lower bounds on the residual load, and symmetry breaking
    (same-moment starts in ascending id order, equal (p, req) jobs started in
    ascending id order, lowest free machine always used).
    """
    if node_budget <= 0:
        raise ValueError(f"node budget must be positive, got {node_budget}")
    if not instance.jobs:
        return OracleResult(0, Schedule(instance, ()), 0, True)

    m, cap = instance.m, instance.capacity
    by_id = instance.job_by_id

    best = None
    best_assign: dict[int, tuple[int, int]] = {}
    for policy in (LPT, HRR):
        sched = list_schedule(instance, policy)
        mk = makespan(sched)
        if best is None or mk < best:
            best = mk
            best_assign = {a.job_id: (a.machine, a.start) for a in sched.assignments}

    placed: dict[int, tuple[int, int]] = {}
    running: list[tuple[int, int, int]] = []  # (completion, machine, job_id) kept sorted
    free: list[int] = list(range(m))
    pending: set[int] = {j.id for j in instance.jobs}
    nodes = 0
    exhausted = True

    def search(t: int, usage: int, cur_max: int, last_id: int) -> None:
        nonlocal nodes, best, best_assign, exhausted
        nodes += 1
        if nodes > node_budget:
            exhausted = False
            return

        if not pending:
            if cur_max < best:
                best = cur_max
                best_assign = dict(placed)
            return

        # Exact lower bounds on any completion of this partial schedule.
        work_rem = sum(by_id[i].p for i in pending)
        res_rem = sum(by_id[i].p * by_id[i].req for i in pending)
        max_p = 0
        for i in pending:
            max_p = max(max_p, by_id[i].p)
        for completion, _, job_id in running:
            left = completion - t
            work_rem += left
            res_rem += left * by_id[job_id].req
        if cur_max >= best or t + max_p >= best:
            return
        if m * t + work_rem >= m * best or cap * t + res_rem >= cap * best:
            return

        if free:
            avail = cap - usage
            started_shapes: set[tuple[int, int]] = set()
            for job_id in sorted(pending):
                if job_id <= last_id:
                    continue
                job = by_id[job_id]
                if job.req > avail:
                    continue
                shape = (job.p, job.req)
                if shape in started_shapes:
                    continue  # an identical lower-id job already branched here
                started_shapes.add(shape)
                machine = free.pop(0)
                placed[job_id] = (machine, t)
                pending.discard(job_id)
                insort(running, (t + job.p, machine, job_id))
                search(t, usage + job.req, max(cur_max, t + job.p), job_id)
                running.remove((t + job.p, machine, job_id))
                pending.add(job_id)
                del placed[job_id]
                free.insert(0, machine)

        if running:
            t_next = running[0][0]
            popped: list[tuple[int, int, int]] = []
            freed = 0
            while running and running[0][0] == t_next:
                item = running.pop(0)
                popped.append(item)
                insort(free, item[1])
                freed += by_id[item[2]].req
            search(t_next, usage - freed, cur_max, -1)
            for item in reversed(popped):
                free.remove(item[1])
                insort(running, item)

    search(0, 0, 0, -1)

    assignments = tuple(
        sorted(
            (
                Assignment(job_id, mach, start, start + by_id[job_id].p)
                for job_id, (mach, start) in best_assign.items()
            ),
            key=lambda a: (a.start, a.job_id),
        )
    )
    return OracleResult(
        opt=best,
        optimal_schedule=Schedule(instance, assignments),
        nodes_explored=nodes,
        exhausted=exhausted,
    )


def _greedy_earliest(instance: Instance, order: tuple[int, ...]) -> int:
    """Makespan of greedy earliest placement in the given job order."""
    by_id = instance.job_by_id
    cap = instance.capacity
    intervals: list[tuple[int, int, int, int]] = []  # (start, end, req, machine)

    def fits(t: int, p: int, req: int) -> int | None:
        busy = set()
        for s, e, r, mach in intervals:
            if s < t + p and t < e:
                busy.add(mach)
        for point in {t} | {s for s, e, r, mach in intervals if t <= s < t + p}:
            load = req
            for s, e, r, _ in intervals:
                if s <= point < e:
                    load += r
            if load > cap:
                return None
        for mach in range(instance.m):
            if mach not in busy:
                return mach
        return None

    mk = 0
    for job_id in order:
        job = by_id[job_id]
        for t in sorted({0} | {e for _, e, _, _ in intervals}):
            mach = fits(t, job.p, job.req)
            if mach is not None:
                intervals.append((t, t + job.p, job.req, mach))
                mk = max(mk, t + job.p)
                break
    return mk


def brute_force_makespan(instance: Instance) -> int:
    """Minimum makespan over all start-order permutations with greedy placement.

    Independent reference for the branch-and-bound; only sensible for n <= 6.
    """
    if not instance.jobs:
        return 0
    ids = [j.id for j in instance.jobs]
    return min(_greedy_earliest(instance, perm) for perm in permutations(ids))


def ratio(instance: Instance, algo_makespan: int, oracle: OracleResult) -> Ratio:
    """Exact algo/OPT ratio; refuses non-exhausted oracle results."""
    if not oracle.exhausted:
        raise OracleBudgetError("oracle did not exhaust its search; opt is not exact")
    if oracle.opt <= 0:
        raise ValueError("ratio undefined for an empty instance (opt = 0)")
    return Ratio(algo_makespan, oracle.opt)
