"""Problem/solution data model for single-resource parallel-machine scheduling.

Times are non-negative integer ticks, resource amounts are non-negative
integers, and every threshold test is done in exact integer or rational
arithmetic.  Job execution intervals are half-open [start, completion):
a job is active at t iff start <= t < completion.
"""

from __future__ import annotations

import csv
import io
from bisect import bisect_right
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Iterable

# Exact rational used for every normalized quantity (r_i, lower bounds,
# ratios).  Fraction keeps reduced form and compares by cross-multiplication.
Ratio = Fraction

__all__ = [
    "Ratio",
    "format_ratio",
    "Job",
    "Instance",
    "JobClass",
    "Assignment",
    "Schedule",
    "ResourceProfile",
    "ViolationKind",
    "Violation",
    "ValidationReport",
    "InstanceError",
    "FormatError",
    "classify",
    "total_requirement",
    "top_m_requirement",
    "resource_profile",
    "active_jobs",
    "makespan",
    "lower_bound",
    "validate",
    "parse_instance",
    "dump_instance",
    "load_instance",
    "save_instance",
    "load_schedule_csv",
    "dump_schedule_csv",
    "save_schedule_csv",
]


def format_ratio(value: Ratio, places: int = 6) -> str:
    """Render an exact non-negative rational as a fixed-point decimal string.

    Rounds half to even so golden files are stable; internal comparisons
    should stay exact and never round-trip through this rendering.
    """
    if value < 0:
        raise ValueError(f"expected a non-negative ratio, got {value}")
    scale = 10**places
    scaled = value * scale
    q, r = divmod(scaled.numerator, scaled.denominator)
    double = 2 * r
    if double > scaled.denominator or (double == scaled.denominator and q % 2 == 1):
        q += 1
    whole, frac = divmod(q, scale)
    return f"{whole}.{frac:0{places}d}"


class InstanceError(ValueError):
    """Raised for jobs/instances that violate the model invariants."""


class FormatError(ValueError):
    """Raised when an on-disk instance or schedule file cannot be parsed."""


@dataclass(frozen=True)
class Job:
    """A rigid sequential work item: processing time and resource demand."""

    id: int
    p: int
    req: int

    def __post_init__(self) -> None:
        if self.id < 0:
            raise InstanceError(f"job id must be non-negative, got {self.id}")
        if self.p < 1:
            raise InstanceError(f"job {self.id}: processing time must be >= 1, got {self.p}")
        if self.req < 0:
            raise InstanceError(f"job {self.id}: resource demand must be >= 0, got {self.req}")


@dataclass(frozen=True)
class Instance:
    """Problem input: m identical machines, resource capacity, and a job set."""

    m: int
    capacity: int
    jobs: tuple[Job, ...]

    def __post_init__(self) -> None:
        if self.m < 1:
            raise InstanceError(f"machine count must be >= 1, got {self.m}")
        if self.capacity < 1:
            raise InstanceError(f"resource capacity must be >= 1, got {self.capacity}")
        object.__setattr__(self, "jobs", tuple(self.jobs))
        seen: set[int] = set()
        for job in self.jobs:
            if job.id in seen:
                raise InstanceError(f"duplicate job id {job.id}")
            seen.add(job.id)
            if job.req > self.capacity:
                raise InstanceError(
                    f"job {job.id}: demand {job.req} exceeds capacity {self.capacity}"
                )

    @property
    def n(self) -> int:
        return len(self.jobs)

    @cached_property
    def job_by_id(self) -> dict[int, Job]:
        return {job.id: job for job in self.jobs}


class JobClass(Enum):
    LIGHT = "light"
    MEDIUM = "medium"
    HEAVY = "heavy"


def classify(job: Job, capacity: int) -> JobClass:
    """Resource class of a job: light r <= 1/3, medium 1/3 < r <= 1/2, heavy r > 1/2."""
    if job.req > capacity:
        raise InstanceError(f"job {job.id}: demand {job.req} exceeds capacity {capacity}")
    if 2 * job.req > capacity:
        return JobClass.HEAVY
    if 3 * job.req > capacity:
        return JobClass.MEDIUM
    return JobClass.LIGHT


def total_requirement(jobs: Iterable[Job], capacity: int) -> Ratio:
    """Sum of normalized demands of a job set, as an exact rational."""
    return Ratio(sum(job.req for job in jobs), capacity)


def top_m_requirement(jobs: Iterable[Job], m: int, capacity: int) -> Ratio:
    """Sum of the min(m, |jobs|) largest normalized demands in a job set."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    reqs = sorted((job.req for job in jobs), reverse=True)
    return Ratio(sum(reqs[:m]), capacity)


@dataclass(frozen=True)
class Assignment:
    """Placement of one job: machine index and half-open [start, completion)."""

    job_id: int
    machine: int
    start: int
    completion: int

    def __post_init__(self) -> None:
        if self.start < 0:
            raise InstanceError(f"job {self.job_id}: start must be >= 0, got {self.start}")
        if self.machine < 0:
            raise InstanceError(f"job {self.job_id}: machine must be >= 0, got {self.machine}")
        if self.completion <= self.start:
            raise InstanceError(f"job {self.job_id}: empty or inverted interval")

    def active_at(self, t) -> bool:
        return self.start <= t < self.completion


def make_assignment(job: Job, machine: int, start: int) -> Assignment:
    return Assignment(job_id=job.id, machine=machine, start=start, completion=start + job.p)


@dataclass(frozen=True)
class Schedule:
    """A (possibly partial) set of assignments for one instance.

    Feasibility is checked by validate(), not enforced by construction, so
    schedules loaded from files can be inspected even when they are broken.
    """

    instance: Instance
    assignments: tuple[Assignment, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "assignments", tuple(self.assignments))

    @cached_property
    def by_job(self) -> dict[int, Assignment]:
        """job_id -> assignment; for duplicated ids the first occurrence wins."""
        mapping: dict[int, Assignment] = {}
        for a in self.assignments:
            mapping.setdefault(a.job_id, a)
        return mapping


def makespan(schedule: Schedule) -> int:
    """Maximum completion time; 0 for an empty schedule."""
    return max((a.completion for a in schedule.assignments), default=0)


def active_jobs(schedule: Schedule, t) -> set[int]:
    """Ids of jobs active at time t (start <= t < completion)."""
    return {a.job_id for a in schedule.assignments if a.active_at(t)}


@dataclass(frozen=True)
class ResourceProfile:
    """Right-continuous step function t -> total resource usage.

    times[i] holds usage[i] on [times[i], times[i+1]); the final segment
    extends to infinity with usage 0 once the last job has completed.
    """

    times: tuple[int, ...]
    usage: tuple[int, ...]

    def usage_at(self, t) -> int:
        if t < self.times[0]:
            return 0
        return self.usage[bisect_right(self.times, t) - 1]

    @property
    def breakpoints(self) -> tuple[tuple[int, int], ...]:
        return tuple(zip(self.times, self.usage))


def resource_profile(schedule: Schedule) -> ResourceProfile:
    """Usage profile of a schedule, with breakpoints at assignment starts/completions."""
    by_id = schedule.instance.job_by_id
    deltas: dict[int, int] = {0: 0}
    for a in schedule.assignments:
        job = by_id.get(a.job_id)
        if job is None:
            raise InstanceError(f"assignment references unknown job id {a.job_id}")
        deltas[a.start] = deltas.get(a.start, 0) + job.req
        deltas[a.completion] = deltas.get(a.completion, 0) - job.req
    times = sorted(deltas)
    usage = []
    acc = 0
    for t in times:
        acc += deltas[t]
        usage.append(acc)
    return ResourceProfile(times=tuple(times), usage=tuple(usage))


def lower_bound(instance: Instance) -> Ratio:
    """max(total work / m, total resource-time / capacity): a lower bound on OPT."""
    volume = Ratio(sum(job.p for job in instance.jobs), instance.m)
    resource = Ratio(sum(job.p * job.req for job in instance.jobs), instance.capacity)
    return max(volume, resource)


class ViolationKind(Enum):
    MACHINE_OVERLAP = "machine_overlap"
    RESOURCE_OVERFLOW = "resource_overflow"
    MACHINE_COUNT_EXCEEDED = "machine_count_exceeded"
    UNKNOWN_JOB = "unknown_job"
    DUPLICATE_JOB = "duplicate_job"


@dataclass(frozen=True)
class Violation:
    kind: ViolationKind
    time: int
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[Violation, ...]


def validate(schedule: Schedule) -> ValidationReport:
    """Check all feasibility invariants; reports the first-offending time per kind."""
    inst = schedule.instance
    by_id = inst.job_by_id
    candidates: list[Violation] = []

    seen: set[int] = set()
    for a in schedule.assignments:
        if a.job_id not in by_id:
            candidates.append(
                Violation(ViolationKind.UNKNOWN_JOB, a.start, f"job {a.job_id} not in instance")
            )
        if a.job_id in seen:
            candidates.append(
                Violation(ViolationKind.DUPLICATE_JOB, a.start, f"job {a.job_id} assigned twice")
            )
        seen.add(a.job_id)
        if a.machine >= inst.m:
            candidates.append(
                Violation(
                    ViolationKind.MACHINE_COUNT_EXCEEDED,
                    a.start,
                    f"job {a.job_id} on machine {a.machine}, only {inst.m} machines",
                )
            )

    per_machine: dict[int, list[Assignment]] = {}
    for a in schedule.assignments:
        per_machine.setdefault(a.machine, []).append(a)
    for machine, items in per_machine.items():
        items.sort(key=lambda a: (a.start, a.job_id))
        for prev, cur in zip(items, items[1:]):
            if cur.start < prev.completion:
                candidates.append(
                    Violation(
                        ViolationKind.MACHINE_OVERLAP,
                        cur.start,
                        f"jobs {prev.job_id} and {cur.job_id} overlap on machine {machine}",
                    )
                )

    # Sweep usage and active-job count over all breakpoints.
    deltas: dict[int, tuple[int, int]] = {}
    for a in schedule.assignments:
        req = by_id[a.job_id].req if a.job_id in by_id else 0
        u, c = deltas.get(a.start, (0, 0))
        deltas[a.start] = (u + req, c + 1)
        u, c = deltas.get(a.completion, (0, 0))
        deltas[a.completion] = (u - req, c - 1)
    usage = count = 0
    for t in sorted(deltas):
        du, dc = deltas[t]
        usage += du
        count += dc
        if usage > inst.capacity:
            candidates.append(
                Violation(
                    ViolationKind.RESOURCE_OVERFLOW,
                    t,
                    f"usage {usage} exceeds capacity {inst.capacity}",
                )
            )
        if count > inst.m:
            candidates.append(
                Violation(
                    ViolationKind.MACHINE_COUNT_EXCEEDED,
                    t,
                    f"{count} concurrent jobs on {inst.m} machines",
                )
            )

    first_per_kind: dict[ViolationKind, Violation] = {}
    for v in candidates:
        best = first_per_kind.get(v.kind)
        if best is None or v.time < best.time:
            first_per_kind[v.kind] = v
    violations = tuple(sorted(first_per_kind.values(), key=lambda v: (v.time, v.kind.value)))
    return ValidationReport(ok=not violations, violations=violations)


# --- instance text format -------------------------------------------------
#
# line 1: "m <int> R <int>", line 2: "<n>", then n lines "<p> <req>".
# Lines starting with '#' are comments and may appear anywhere.


def parse_instance(text: str) -> Instance:
    lines = [
        line.strip()
        for line in text.splitlines()
        if line.strip() and not line.lstrip().startswith("#")
    ]
    if not lines:
        raise FormatError("empty instance file")
    head = lines[0].split()
    if len(head) != 4 or head[0] != "m" or head[2] != "R":
        raise FormatError(f"bad header line: {lines[0]!r} (expected 'm <int> R <int>')")
    try:
        m, capacity = int(head[1]), int(head[3])
    except ValueError as exc:
        raise FormatError(f"bad header line: {lines[0]!r}") from exc
    if len(lines) < 2:
        raise FormatError("missing job count line")
    try:
        n = int(lines[1])
    except ValueError as exc:
        raise FormatError(f"bad job count: {lines[1]!r}") from exc
    if n < 0:
        raise FormatError(f"job count must be >= 0, got {n}")
    if len(lines) != 2 + n:
        raise FormatError(f"expected {n} job lines, found {len(lines) - 2}")
    fields = []
    for line in lines[2:]:
        parts = line.split()
        if len(parts) != 2:
            raise FormatError(f"bad job line: {line!r} (expected '<p> <req>')")
        try:
            fields.append((int(parts[0]), int(parts[1])))
        except ValueError as exc:
            raise FormatError(f"bad job line: {line!r}") from exc
    try:
        jobs = tuple(Job(id=i, p=p, req=req) for i, (p, req) in enumerate(fields))
        return Instance(m=m, capacity=capacity, jobs=jobs)
    except InstanceError as exc:
        raise FormatError(str(exc)) from exc


def dump_instance(instance: Instance) -> str:
    out = [f"m {instance.m} R {instance.capacity}", str(instance.n)]
    out.extend(f"{job.p} {job.req}" for job in instance.jobs)
    return "\n".join(out) + "\n"


def load_instance(path) -> Instance:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_instance(fh.read())


def save_instance(instance: Instance, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dump_instance(instance))


# --- schedule CSV format --------------------------------------------------

_SCHEDULE_FIELDS = ["job_id", "machine", "start", "completion"]


def dump_schedule_csv(schedule: Schedule) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_SCHEDULE_FIELDS)
    for a in sorted(schedule.assignments, key=lambda a: a.job_id):
        writer.writerow([a.job_id, a.machine, a.start, a.completion])
    return buf.getvalue()


def save_schedule_csv(schedule: Schedule, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(dump_schedule_csv(schedule))


def load_schedule_csv(path, instance: Instance) -> Schedule:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != _SCHEDULE_FIELDS:
            raise FormatError(
                f"bad schedule header: expected {','.join(_SCHEDULE_FIELDS)}"
            )
        assignments = []
        by_id = instance.job_by_id
        for lineno, row in enumerate(reader, start=2):
            try:
                a = Assignment(
                    job_id=int(row["job_id"]),
                    machine=int(row["machine"]),
                    start=int(row["start"]),
                    completion=int(row["completion"]),
                )
            except (TypeError, ValueError, InstanceError) as exc:
                raise FormatError(f"line {lineno}: bad schedule row: {exc}") from exc
            job = by_id.get(a.job_id)
            if job is not None and a.completion - a.start != job.p:
                raise FormatError(
                    f"line {lineno}: job {a.job_id} interval length "
                    f"{a.completion - a.start} does not match p={job.p}"
                )
            assignments.append(a)
    return Schedule(instance=instance, assignments=tuple(assignments))
