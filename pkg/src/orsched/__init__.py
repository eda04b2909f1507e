"""Scheduling toolkit for identical machines sharing one renewable resource.

Solvers map an Instance to a Schedule: a four-step approximation algorithm
(`apalg`), its backfilled variant (`apalg_s`), a strict-order heuristic
(`apalg_h`), and the LPT/HRR/LRR/RAND list-scheduling baselines.  An exact
branch-and-bound oracle covers desk-scale instances, and the workload and
harness modules reproduce the trace-driven benchmarking pipeline.
"""

from .approx import ApAlgTrace, apalg, apalg_h, apalg_s, backfill
from .core import (
    Assignment,
    Instance,
    Job,
    JobClass,
    Ratio,
    ResourceProfile,
    Schedule,
    ValidationReport,
    active_jobs,
    classify,
    load_instance,
    lower_bound,
    makespan,
    resource_profile,
    save_instance,
    top_m_requirement,
    total_requirement,
    validate,
)
from .listsched import HRR, LPT, LRR, OrderPolicy, list_schedule, order_jobs, rand_policy
from .oracle import OracleResult, brute_force_makespan, optimal_makespan, ratio
from .workload import JobPool, TraceRecord, build_pool, parse_trace, percentile, sample_instance, spearman

__all__ = [
    "Job",
    "Instance",
    "JobClass",
    "Assignment",
    "Schedule",
    "ResourceProfile",
    "ValidationReport",
    "Ratio",
    "classify",
    "total_requirement",
    "top_m_requirement",
    "resource_profile",
    "active_jobs",
    "makespan",
    "lower_bound",
    "validate",
    "load_instance",
    "save_instance",
    "ApAlgTrace",
    "apalg",
    "apalg_s",
    "apalg_h",
    "backfill",
    "OrderPolicy",
    "LPT",
    "HRR",
    "LRR",
    "rand_policy",
    "order_jobs",
    "list_schedule",
    "OracleResult",
    "optimal_makespan",
    "brute_force_makespan",
    "ratio",
    "TraceRecord",
    "JobPool",
    "parse_trace",
    "percentile",
    "build_pool",
    "spearman",
    "sample_instance",
]
