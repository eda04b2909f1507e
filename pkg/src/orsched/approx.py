"""Four-step approximation solver, its backfilling variant, and the strict-order heuristic.

The solver builds a schedule in four steps: heavy jobs chained on machine 0,
a two-thirds-dense prefix of light jobs, mediums list-scheduled from t2 (plus
a second light pass when t1 = t2), and a final LPT pass over everything that
was set aside.  All milestone times are integers and every threshold test is
integer cross-multiplication (usage >= 2/3 capacity <=> 3*usage >= 2*capacity).
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right, insort
from dataclasses import dataclass, field

from .core import (
    Assignment,
    Instance,
    Job,
    JobClass,
    Schedule,
    classify,
    top_m_requirement,
    validate,
)

__all__ = [
    "BuildState",
    "ApAlgTrace",
    "schedule_two_thirds",
    "strict_order_pass",
    "step1_heavy",
    "step2_light",
    "step3_medium",
    "step4_lpt",
    "apalg",
    "apalg_s",
    "apalg_h",
    "backfill",
]

_BLOCK = 1024


class _Timeline:
    """Mutable usage step function plus per-machine busy intervals (exact ints).

    Breakpoint times and their usage live in bounded-size blocks so single
    insertions never shift the whole timeline; scans walk blocks in order.
    The first breakpoint is always time 0 and usage is 0 after the last
    completion.
    """

    __slots__ = ("capacity", "tb", "ub", "heads", "machines")

    def __init__(self, m: int, capacity: int) -> None:
        self.capacity = capacity
        self.tb: list[list[int]] = [[0]]
        self.ub: list[list[int]] = [[0]]
        self.heads: list[int] = [0]
        self.machines: list[list[tuple[int, int]]] = [[] for _ in range(m)]

    @classmethod
    def from_assignments(
        cls, m: int, capacity: int, items: list[tuple[int, int, int, int]]
    ) -> "_Timeline":
        """Bulk-build from (start, end, req, machine) tuples."""
        tl = cls(m, capacity)
        delta: dict[int, int] = {0: 0}
        for start, end, req, machine in items:
            delta[start] = delta.get(start, 0) + req
            delta[end] = delta.get(end, 0) - req
            tl.machines[machine].append((start, end))
        times = sorted(delta)
        usage = []
        acc = 0
        for t in times:
            acc += delta[t]
            usage.append(acc)
        tl.tb = [times[i : i + _BLOCK] for i in range(0, len(times), _BLOCK)]
        tl.ub = [usage[i : i + _BLOCK] for i in range(0, len(usage), _BLOCK)]
        tl.heads = [blk[0] for blk in tl.tb]
        for lst in tl.machines:
            lst.sort()
        return tl

    def _locate(self, t: int) -> tuple[int, int]:
        """(block, index) of the segment containing t (t >= 0)."""
        b = bisect_right(self.heads, t) - 1
        return b, bisect_right(self.tb[b], t) - 1

    def _split(self, b: int) -> None:
        blk, ublk = self.tb[b], self.ub[b]
        mid = len(blk) // 2
        self.tb.insert(b + 1, blk[mid:])
        self.ub.insert(b + 1, ublk[mid:])
        del blk[mid:]
        del ublk[mid:]
        self.heads.insert(b + 1, self.tb[b + 1][0])

    def _ensure(self, t: int) -> None:
        b, i = self._locate(t)
        blk = self.tb[b]
        if blk[i] == t:
            return
        blk.insert(i + 1, t)
        self.ub[b].insert(i + 1, self.ub[b][i])
        if len(blk) > 2 * _BLOCK:
            self._split(b)

    def usage_at(self, t) -> int:
        if t < 0:
            return 0
        b, i = self._locate(t)
        return self.ub[b][i]

    def _apply(self, start: int, end: int, req: int) -> None:
        self._ensure(start)
        self._ensure(end)
        b, i = self._locate(start)
        while True:
            blk, ublk = self.tb[b], self.ub[b]
            n = len(blk)
            while i < n and blk[i] < end:
                ublk[i] += req
                i += 1
            if i < n:
                return  # reached the breakpoint at `end`
            b += 1
            i = 0

    def add(self, start: int, end: int, req: int, machine: int) -> None:
        self._apply(start, end, req)
        insort(self.machines[machine], (start, end))

    def remove(self, start: int, end: int, req: int, machine: int) -> None:
        self._apply(start, end, -req)
        lst = self.machines[machine]
        i = bisect_left(lst, (start, end))
        del lst[i]

    def fits_resource(self, start: int, end: int, req: int) -> bool:
        """usage + req <= capacity throughout [start, end)."""
        cap = self.capacity
        b, i = self._locate(start)
        nb = len(self.tb)
        while b < nb:
            blk, ublk = self.tb[b], self.ub[b]
            n = len(blk)
            while i < n and blk[i] < end:
                if ublk[i] + req > cap:
                    return False
                i += 1
            if i < n:
                return True
            b += 1
            i = 0
        return True

    def machine_free(self, machine: int, start: int, end: int) -> bool:
        intervals = self.machines[machine]
        i = bisect_right(intervals, (start, end))
        if i > 0 and intervals[i - 1][1] > start:
            return False
        if i < len(intervals) and intervals[i][0] < end:
            return False
        return True

    def first_free_machine(self, start: int, end: int) -> int | None:
        for m in range(len(self.machines)):
            if self.machine_free(m, start, end):
                return m
        return None

    def first_below_two_thirds(self, t: int) -> int:
        """Least event time >= t where 3*usage < 2*capacity.

        The usage function drops to 0 after the last completion, so the
        search always terminates at a breakpoint (or at t itself).
        """
        thr = 2 * self.capacity
        b, i = self._locate(t)
        if 3 * self.ub[b][i] < thr:
            return t
        i += 1
        nb = len(self.tb)
        while b < nb:
            blk, ublk = self.tb[b], self.ub[b]
            n = len(blk)
            while i < n:
                if 3 * ublk[i] < thr:
                    return blk[i]
                i += 1
            b += 1
            i = 0
        raise AssertionError("usage never drops below two thirds")  # pragma: no cover

    def sup_two_thirds(self) -> int | None:
        """sup{t : 3*usage(t) >= 2*capacity}, or None when no segment qualifies."""
        thr = 2 * self.capacity
        following: int | None = None
        for b in range(len(self.tb) - 1, -1, -1):
            blk, ublk = self.tb[b], self.ub[b]
            for i in range(len(blk) - 1, -1, -1):
                if 3 * ublk[i] >= thr:
                    return following  # the qualifying segment ends at the next breakpoint
                following = blk[i]
        return None

    def earliest_fit(self, p: int, req: int, lo: int) -> tuple[int, int]:
        """Earliest event time >= lo where the job fits, with the lowest free machine.

        Candidate times are lo itself and breakpoints after it; feasibility can
        only begin at 0 or at a completion, which are all breakpoints.
        """
        t = lo
        b, i = self._locate(lo)
        i += 1
        while True:
            if self.fits_resource(t, t + p, req):
                m = self.first_free_machine(t, t + p)
                if m is not None:
                    return t, m
            while b < len(self.tb) and i >= len(self.tb[b]):
                b += 1
                i = 0
            if b >= len(self.tb):  # pragma: no cover - always fits by the last breakpoint
                raise AssertionError("no feasible placement found")
            t = self.tb[b][i]
            i += 1


@dataclass(frozen=True)
class ApAlgTrace:
    """Milestones and bookkeeping sets of one solver run, for invariant testing."""

    t1: int
    t2: int
    t_g: int
    t3: int
    t4: int
    unscheduled_step2: frozenset[int]
    ignored_step3: frozenset[int]
    unscheduled_step4: frozenset[int]
    step3_max_completion: int

    def __post_init__(self) -> None:
        if not (0 <= self.t2 <= self.t1 <= self.t3 <= self.t4):
            raise AssertionError(f"milestones out of order: {self}")
        if self.t3 != max(self.t_g, self.t1):
            raise AssertionError(f"t3 != max(t_g, t1): {self}")

    def as_text(self) -> str:
        """Flat key=value block (milestones and set sizes) for golden tests."""
        return (
            f"t1={self.t1}\n"
            f"t2={self.t2}\n"
            f"t_g={self.t_g}\n"
            f"t3={self.t3}\n"
            f"t4={self.t4}\n"
            f"step3_max_completion={self.step3_max_completion}\n"
            f"unscheduled_step2={len(self.unscheduled_step2)}\n"
            f"ignored_step3={len(self.ignored_step3)}\n"
            f"unscheduled_step4={len(self.unscheduled_step4)}\n"
        )


@dataclass
class BuildState:
    """Mutable working state of one solver run.

    Ignored jobs stay recorded in `placed` (they count as scheduled) but are
    excluded from the timeline, so every profile or machine query over the
    state already ignores them.
    """

    instance: Instance
    timeline: _Timeline
    groups: dict[JobClass, list[Job]]
    placed: dict[int, tuple[int, int]] = field(default_factory=dict)  # id -> (machine, start)
    ignored: set[int] = field(default_factory=set)
    # step bookkeeping, assembled into the trace at the end
    t1: int = 0
    t2: int = 0
    t_g: int = 0
    t3: int = 0
    t4: int = 0
    unscheduled_step2: set[int] = field(default_factory=set)
    ignored_step3: set[int] = field(default_factory=set)
    unscheduled_step4: set[int] = field(default_factory=set)
    step3_max_completion: int = 0
    sup_was_empty: bool = True

    @classmethod
    def new(cls, instance: Instance) -> "BuildState":
        groups: dict[JobClass, list[Job]] = {c: [] for c in JobClass}
        for job in instance.jobs:
            groups[classify(job, instance.capacity)].append(job)
        return cls(
            instance=instance,
            timeline=_Timeline(instance.m, instance.capacity),
            groups=groups,
        )

    @property
    def scheduled(self) -> set[int]:
        return set(self.placed)

    def job(self, job_id: int) -> Job:
        return self.instance.job_by_id[job_id]

    def schedule_job(self, job: Job, machine: int, start: int, *, on_timeline: bool = True) -> None:
        self.placed[job.id] = (machine, start)
        if on_timeline:
            self.timeline.add(start, start + job.p, job.req, machine)

    def unschedule_job(self, job_id: int) -> None:
        machine, start = self.placed.pop(job_id)
        if job_id in self.ignored:
            self.ignored.discard(job_id)  # already off the timeline
        else:
            job = self.job(job_id)
            self.timeline.remove(start, start + job.p, job.req, machine)

    def bulk_unschedule(self, job_ids: set[int]) -> None:
        """Unschedule many jobs at once, rebuilding the timeline when cheaper."""
        if 16 * len(job_ids) < len(self.placed) or len(job_ids) <= 8:
            for job_id in sorted(job_ids):
                self.unschedule_job(job_id)
            return
        for job_id in job_ids:
            del self.placed[job_id]
        self.ignored -= job_ids
        items = []
        for job_id, (machine, start) in self.placed.items():
            if job_id not in self.ignored:
                job = self.job(job_id)
                items.append((start, start + job.p, job.req, machine))
        self.timeline = _Timeline.from_assignments(
            self.instance.m, self.instance.capacity, items
        )

    def mark_ignored(self, job_id: int) -> None:
        machine, start = self.placed[job_id]
        job = self.job(job_id)
        self.timeline.remove(start, start + job.p, job.req, machine)
        self.ignored.add(job_id)

    def active_ids(self, t: int) -> set[int]:
        """Non-ignored placed jobs active at t (start <= t < completion)."""
        return {
            job_id
            for job_id, (_, start) in self.placed.items()
            if job_id not in self.ignored and start <= t < start + self.job(job_id).p
        }

    def unscheduled_jobs(self) -> list[Job]:
        return [job for job in self.instance.jobs if job.id not in self.placed]

    def to_schedule(self) -> Schedule:
        assignments = sorted(
            (
                Assignment(job_id, machine, start, start + self.job(job_id).p)
                for job_id, (machine, start) in self.placed.items()
            ),
            key=lambda a: (a.start, a.job_id),
        )
        return Schedule(instance=self.instance, assignments=tuple(assignments))

    def to_trace(self) -> ApAlgTrace:
        return ApAlgTrace(
            t1=self.t1,
            t2=self.t2,
            t_g=self.t_g,
            t3=self.t3,
            t4=self.t4,
            unscheduled_step2=frozenset(self.unscheduled_step2),
            ignored_step3=frozenset(self.ignored_step3),
            unscheduled_step4=frozenset(self.unscheduled_step4),
            step3_max_completion=self.step3_max_completion,
        )


def schedule_two_thirds(state: BuildState, candidates: list[Job], t_s: int) -> int:
    """Gated greedy pass: place jobs while the profile stays two-thirds dense.

    Jobs are taken weakly decreasing by demand (ties: ascending id); each is
    placed at the least event time >= the running cursor where usage is below
    two thirds, provided it fits there; the first misfit stops the pass.
    Returns the least event time >= the final cursor with usage below two
    thirds, so usage >= 2/3 capacity holds throughout [t_s, returned).
    """
    tl = state.timeline
    t_c = t_s
    for job in sorted(candidates, key=lambda j: (-j.req, j.id)):
        t_c = tl.first_below_two_thirds(t_c)
        end = t_c + job.p
        if not tl.fits_resource(t_c, end, job.req):
            break
        machine = tl.first_free_machine(t_c, end)
        if machine is None:
            break
        state.schedule_job(job, machine, t_c)
    return tl.first_below_two_thirds(t_c)


def strict_order_pass(state: BuildState, candidates: list[Job], t_s: int) -> int:
    """Heuristic replacement for the gated pass: place every candidate.

    Jobs are taken weakly decreasing by demand (ties: ascending id); each is
    placed at the earliest event time >= the previously placed start where it
    fits, so starts are non-decreasing and a smaller-demand job never starts
    before a larger one.  No two-thirds gate, no early break.
    """
    tl = state.timeline
    cursor = t_s
    for job in sorted(candidates, key=lambda j: (-j.req, j.id)):
        start, machine = tl.earliest_fit(job.p, job.req, cursor)
        state.schedule_job(job, machine, start)
        cursor = start
    return tl.first_below_two_thirds(cursor)


def step1_heavy(state: BuildState) -> int:
    """Chain all heavy jobs on machine 0 from time 0; returns t1 = total heavy work."""
    if state.placed:
        raise ValueError("step 1 requires an empty build state")
    t = 0
    for job in sorted(state.groups[JobClass.HEAVY], key=lambda j: (-j.req, j.id)):
        state.schedule_job(job, 0, t)
        t += job.p
    state.t1 = t
    return t


def step2_light(state: BuildState, t1: int, *, two_thirds=schedule_two_thirds) -> int:
    """Fill [0, t2) with light jobs so usage stays above two thirds.

    Skipped entirely when there are no heavy jobs (t1 = 0).  When t1 = t2,
    light jobs starting at or after t2 are unscheduled again (recorded in the
    trace) so later steps can re-place them.
    """
    if t1 == 0:
        state.t2 = 0
        return 0
    lights = [j for j in state.groups[JobClass.LIGHT] if j.id not in state.placed]
    t_c = two_thirds(state, lights, 0)
    t2 = min(t1, t_c)
    if t1 == t2:
        light_ids = {j.id for j in state.groups[JobClass.LIGHT]}
        to_remove = {
            job_id
            for job_id, (_, start) in state.placed.items()
            if job_id in light_ids and start >= t2
        }
        state.bulk_unschedule(to_remove)
        state.unscheduled_step2 |= to_remove
    state.t2 = t2
    return t2


def step3_medium(
    state: BuildState, t1: int, t2: int, *, two_thirds=schedule_two_thirds
) -> tuple[int, int]:
    """Ignore lights straddling t2, list-schedule mediums, and find t_g and t3.

    Mediums go weakly increasing by demand (ties: ascending id), each at the
    earliest event time >= t2 where a machine is free and the resource fits,
    with non-decreasing starts.  t_g is the end of the last two-thirds-dense
    segment (t2 when none exists); when t1 = t2 a second light pass runs from
    t_g and updates it.  Returns (t_g, t3) with t3 = max(t_g, t1).
    """
    light_ids = {j.id for j in state.groups[JobClass.LIGHT]}
    for job_id in sorted(state.active_ids(t2) & light_ids):
        state.mark_ignored(job_id)
        state.ignored_step3.add(job_id)

    cursor = t2
    for job in sorted(state.groups[JobClass.MEDIUM], key=lambda j: (j.req, j.id)):
        start, machine = state.timeline.earliest_fit(job.p, job.req, cursor)
        state.schedule_job(job, machine, start)
        cursor = start

    sup = state.timeline.sup_two_thirds()
    state.sup_was_empty = sup is None
    t_g = t2 if sup is None else sup
    if t1 == t2:
        remaining = [j for j in state.groups[JobClass.LIGHT] if j.id not in state.placed]
        t_g = two_thirds(state, remaining, t_g)
    state.step3_max_completion = max(
        (start + state.job(job_id).p for job_id, (_, start) in state.placed.items()),
        default=0,
    )
    t3 = max(t_g, t1)
    state.t_g = t_g
    state.t3 = t3
    return t_g, t3


def step4_lpt(
    state: BuildState, t_g: int, t2: int, t3: int, *, enforce_gate: bool = True
) -> int:
    """Reinstate set-aside jobs and finish the schedule with an LPT pass from t3.

    The pending set is the ignored jobs, the jobs cut at the t_g boundary, and
    everything never scheduled; it must be satisfied with one unit of the
    resource (asserted when enforce_gate).  Jobs straddling t_g are cut only
    when a two-thirds-dense segment exists or t1 = t2; with no dense segment
    and t1 > t2 there is no boundary to clear, so the schedule is kept intact.
    LPT places longest-first (ties: ascending id) on per-machine availability
    cursors starting at t3, delaying past leftover jobs when the resource
    would otherwise overflow.  Returns t4 = max(t3, final makespan).
    """
    inst = state.instance
    cut: set[int] = set(state.ignored)
    if state.t1 == t2 or not state.sup_was_empty:
        cut |= state.active_ids(t_g)
    state.unscheduled_step4 = set(cut)

    state.bulk_unschedule(cut)
    pending = state.unscheduled_jobs()

    gate = top_m_requirement(pending, inst.m, inst.capacity)
    if enforce_gate:
        assert gate < 1, f"pending set not satisfied with one resource unit: R_m = {gate}"
    # With the gate satisfied, any <= m concurrent pending jobs fit the
    # resource, so placements past the last leftover completion need no
    # checks.  The heuristic variant can arrive here with the gate failed;
    # then every placement stays on the timeline and is checked.
    check_everywhere = gate >= 1

    avail: list[tuple[int, int]] = [(t3, machine) for machine in range(inst.m)]
    horizon = 0
    for job_id, (machine, start) in state.placed.items():
        completion = start + state.job(job_id).p
        if completion > avail[machine][0]:
            avail[machine] = (completion, machine)
        horizon = max(horizon, completion)
    heapify(avail)

    tl = state.timeline
    for job in sorted(pending, key=lambda j: (-j.p, j.id)):
        s, machine = avail[0]
        on_timeline = check_everywhere or s < horizon
        if on_timeline and not tl.fits_resource(s, s + job.p, job.req):
            while True:
                b, i = tl._locate(s)
                i += 1
                while i >= len(tl.tb[b]):  # usage drops to 0 by the last breakpoint
                    b += 1
                    i = 0
                s = tl.tb[b][i]
                if tl.fits_resource(s, s + job.p, job.req):
                    break
            machine = min(mach for t, mach in avail if t <= s)
            avail.remove((next(t for t, mach in avail if mach == machine), machine))
            heapify(avail)
        else:
            heappop(avail)
        state.schedule_job(job, machine, s, on_timeline=on_timeline)
        heappush(avail, (s + job.p, machine))

    t4 = max(
        [t3]
        + [start + state.job(job_id).p for job_id, (_, start) in state.placed.items()]
    )
    state.t4 = t4
    return t4


def _run(instance: Instance, two_thirds, enforce_gate: bool) -> tuple[Schedule, ApAlgTrace]:
    state = BuildState.new(instance)
    t1 = step1_heavy(state)
    t2 = step2_light(state, t1, two_thirds=two_thirds)
    t_g, t3 = step3_medium(state, t1, t2, two_thirds=two_thirds)
    step4_lpt(state, t_g, t2, t3, enforce_gate=enforce_gate)
    return state.to_schedule(), state.to_trace()


def apalg(instance: Instance) -> tuple[Schedule, ApAlgTrace]:
    """Run the four-step approximation algorithm; schedules every job exactly once."""
    return _run(instance, schedule_two_thirds, enforce_gate=True)


def apalg_h(instance: Instance) -> tuple[Schedule, ApAlgTrace]:
    """Heuristic variant: both light passes place every candidate in strict order.

    No approximation guarantee is claimed, so the step-4 density gate is not
    asserted for this variant.
    """
    return _run(instance, strict_order_pass, enforce_gate=False)


def backfill(schedule: Schedule) -> Schedule:
    """Move each job to the earliest feasible start, in ascending start order.

    Candidate starts are 0, completion times of other jobs, and the job's own
    current start, so no start ever increases and the makespan never grows.
    """
    inst = schedule.instance
    report = validate(schedule)
    if not report.ok:
        raise ValueError(f"cannot backfill an infeasible schedule: {report.violations}")
    if set(schedule.by_job) != set(inst.job_by_id):
        raise ValueError("cannot backfill a partial schedule")

    tl = _Timeline.from_assignments(
        inst.m,
        inst.capacity,
        [
            (a.start, a.completion, inst.job_by_id[a.job_id].req, a.machine)
            for a in schedule.assignments
        ],
    )
    placement: dict[int, tuple[int, int]] = {
        a.job_id: (a.machine, a.start) for a in schedule.assignments
    }
    completions = sorted(a.completion for a in schedule.assignments)

    for a in sorted(schedule.assignments, key=lambda a: (a.start, a.job_id)):
        job = inst.job_by_id[a.job_id]
        machine, start = placement[a.job_id]
        tl.remove(start, start + job.p, job.req, machine)
        del completions[bisect_left(completions, start + job.p)]

        candidates = sorted({0, start} | set(completions[: bisect_right(completions, start)]))
        for t in candidates:
            if tl.fits_resource(t, t + job.p, job.req):
                if t == start:
                    # The job's own slot is still free, so keeping its machine
                    # makes the pass independent of earlier machine churn.
                    new_machine = machine
                else:
                    new_machine = tl.first_free_machine(t, t + job.p)
                if new_machine is not None:
                    placement[a.job_id] = (new_machine, t)
                    tl.add(t, t + job.p, job.req, new_machine)
                    insort(completions, t + job.p)
                    break
        else:  # pragma: no cover - the old slot is always feasible again
            raise AssertionError(f"no feasible backfill slot for job {a.job_id}")

    assignments = sorted(
        (
            Assignment(job_id, machine, start, start + inst.job_by_id[job_id].p)
            for job_id, (machine, start) in placement.items()
        ),
        key=lambda x: (x.start, x.job_id),
    )
    return Schedule(instance=inst, assignments=tuple(assignments))


def apalg_s(instance: Instance) -> tuple[Schedule, ApAlgTrace]:
    """The four-step solver followed by the backfilling pass."""
    schedule, trace = apalg(instance)
    return backfill(schedule), trace
