"""Trace ingestion, statistics, and seeded instance sampling.

The on-disk trace format is a CSV with `duration_s` and `memory_bytes`
columns (other columns are ignored).  Pools keep integer memory units with
capacity equal to the largest surviving requirement, which induces exactly
the same normalized demands as rescaling to [0, 1] would.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import FormatError, Instance, Job, Ratio, format_ratio, lower_bound
from .rng import SplitMix64

__all__ = [
    "TraceRecord",
    "JobPool",
    "TraceFormatError",
    "SampleRejectedError",
    "parse_trace",
    "load_trace",
    "percentile",
    "build_pool",
    "spearman",
    "sample_instance",
    "pool_summary",
]

_REQUIRED_COLUMNS = ("duration_s", "memory_bytes")


class TraceFormatError(FormatError):
    """Raised for missing columns or malformed rows (line numbers included)."""


class SampleRejectedError(RuntimeError):
    """Raised when the nontriviality filter rejects every retried draw."""


@dataclass(frozen=True)
class TraceRecord:
    duration: int  # seconds
    memory: int  # bytes


@dataclass(frozen=True)
class JobPool:
    """Filtered (p, req) records plus the induced resource capacity."""

    records: tuple[tuple[int, int], ...]
    capacity: int
    dropped_zero_duration: int = 0


def parse_trace(stream: Iterable[str]) -> list[TraceRecord]:
    """Parse trace CSV rows in order; any malformed row aborts with its line number."""
    reader = csv.DictReader(stream)
    if reader.fieldnames is None:
        raise TraceFormatError("empty trace: missing CSV header")
    fields = [f.strip() for f in reader.fieldnames]
    missing = [c for c in _REQUIRED_COLUMNS if c not in fields]
    if missing:
        raise TraceFormatError(f"trace header lacks required columns: {', '.join(missing)}")
    records: list[TraceRecord] = []
    bad: list[str] = []
    for lineno, row in enumerate(reader, start=2):
        try:
            duration = int(row["duration_s"])
            memory = int(row["memory_bytes"])
            if duration < 0 or memory < 0:
                raise ValueError("negative value")
        except (TypeError, ValueError) as exc:
            bad.append(f"line {lineno}: {exc}")
            continue
        records.append(TraceRecord(duration=duration, memory=memory))
    if bad:
        raise TraceFormatError("malformed trace rows: " + "; ".join(bad))
    return records


def load_trace(path) -> list[TraceRecord]:
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            return parse_trace(fh)
    except OSError as exc:
        raise OSError(f"cannot read trace {path}: {exc}") from exc


def percentile(values: Sequence[int], q: int) -> int:
    """Nearest-rank percentile: the ceil(q*N/100)-th smallest value."""
    if not values:
        raise ValueError("percentile of an empty sequence")
    if not 1 <= q <= 100:
        raise ValueError(f"q must be in 1..100, got {q}")
    ordered = sorted(values)
    rank = math.ceil(q * len(ordered) / 100)
    return ordered[rank - 1]


def build_pool(records: Sequence[TraceRecord]) -> JobPool:
    """Drop zero-duration records, filter both fields at their 99th percentiles.

    Both thresholds are computed on the kept-nonzero set and applied jointly;
    capacity is the largest surviving memory requirement.
    """
    nonzero = [r for r in records if r.duration > 0]
    dropped = len(records) - len(nonzero)
    if not nonzero:
        raise ValueError("no records with positive duration")
    p99_duration = percentile([r.duration for r in nonzero], 99)
    p99_memory = percentile([r.memory for r in nonzero], 99)
    kept = [r for r in nonzero if r.duration <= p99_duration and r.memory <= p99_memory]
    if not kept:
        raise ValueError("all records filtered out at the 99th percentiles")
    capacity = max(r.memory for r in kept)
    return JobPool(
        records=tuple((r.duration, r.memory) for r in kept),
        capacity=capacity,
        dropped_zero_duration=dropped,
    )


def _average_ranks(values: Sequence[int]) -> list[Ratio]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks: list[Ratio] = [Ratio(0)] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = Ratio(i + j + 2, 2)  # mean of 1-based ranks i+1 .. j+1
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def spearman(pairs: Sequence[tuple[int, int]]) -> float:
    """Spearman rank correlation with average-rank tie handling."""
    if len(pairs) < 2:
        raise ValueError("spearman needs at least two pairs")
    xs = [x for x, _ in pairs]
    ys = [y for _, y in pairs]
    if len(set(xs)) == 1 or len(set(ys)) == 1:
        raise ValueError("spearman undefined for a constant sequence")
    rx = _average_ranks(xs)
    ry = _average_ranks(ys)
    n = len(pairs)
    mean = Ratio(n + 1, 2)  # both rank vectors average to (n+1)/2
    cov = sum((a - mean) * (b - mean) for a, b in zip(rx, ry))
    var_x = sum((a - mean) ** 2 for a in rx)
    var_y = sum((b - mean) ** 2 for b in ry)
    return float(cov) / math.sqrt(float(var_x) * float(var_y))


def sample_instance(pool: JobPool, n: int, m: int, seed: int, max_retries: int = 1000) -> Instance:
    """Draw n pool jobs uniformly with replacement; retry with seed+1 until max p < L.

    Instances whose optimal length would be pinned by a single job are
    rejected; after max_retries rejections the family is considered
    degenerate.
    """
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    if not pool.records:
        raise ValueError("cannot sample from an empty pool")
    for attempt in range(max_retries + 1):
        rng = SplitMix64(seed + attempt)
        jobs = []
        for job_id in range(n):
            p, req = pool.records[rng.next() % len(pool.records)]
            jobs.append(Job(id=job_id, p=p, req=req))
        instance = Instance(m=m, capacity=pool.capacity, jobs=tuple(jobs))
        if max(job.p for job in jobs) < lower_bound(instance):
            return instance
    raise SampleRejectedError(
        f"no nontrivial instance within {max_retries} retries (n={n}, m={m}, seed={seed})"
    )


def pool_summary(pool: JobPool) -> str:
    """Flat key=value text: record count, capacity, and demand-ratio quartiles."""
    ratios = [Ratio(req, pool.capacity) for _, req in pool.records]
    lines = [
        f"count={len(pool.records)}",
        f"capacity={pool.capacity}",
        f"dropped_zero_duration={pool.dropped_zero_duration}",
        f"r_p25={format_ratio(percentile_ratio(ratios, 25))}",
        f"r_p50={format_ratio(percentile_ratio(ratios, 50))}",
        f"r_p75={format_ratio(percentile_ratio(ratios, 75))}",
    ]
    return "\n".join(lines) + "\n"


def percentile_ratio(values: Sequence[Ratio], q: int) -> Ratio:
    """Nearest-rank percentile over exact rationals."""
    if not values:
        raise ValueError("percentile of an empty sequence")
    ordered = sorted(values)
    rank = math.ceil(q * len(ordered) / 100)
    return ordered[rank - 1]
