"""Command-line front end and the trace-driven benchmark pipeline."""

from __future__ import annotations

import argparse
import csv
import io
import sys
import time
from dataclasses import dataclass

from .approx import apalg, apalg_h, apalg_s
from .core import (
    FormatError,
    Instance,
    Ratio,
    Schedule,
    format_ratio,
    load_instance,
    load_schedule_csv,
    lower_bound,
    makespan,
    save_instance,
    save_schedule_csv,
    validate,
)
from .listsched import HRR, LPT, LRR, list_schedule, rand_policy
from .oracle import optimal_makespan
from .rng import mix_seed
from .workload import (
    JobPool,
    SampleRejectedError,
    build_pool,
    load_trace,
    pool_summary,
    sample_instance,
    spearman,
)

__all__ = [
    "ALGORITHMS",
    "solve",
    "BenchConfig",
    "BenchRow",
    "parse_config",
    "run_bench",
    "bench_instance",
    "rows_to_csv",
    "summarize",
    "cli",
    "main",
]

ALGORITHMS = ("apalg", "apalg-s", "apalg-h", "lpt", "hrr", "lrr", "rand")

BENCH_FIELDS = [
    "instance_id",
    "n",
    "m",
    "seed",
    "algorithm",
    "cmax",
    "lower_bound",
    "normalized_cmax",
    "runtime_ms",
]

SUMMARY_FIELDS = [
    "n",
    "m",
    "algorithm",
    "min_normalized_cmax",
    "median_normalized_cmax",
    "max_normalized_cmax",
    "median_runtime_ms",
]


def solve(algorithm: str, instance: Instance, seed: int = 0) -> Schedule:
    """Run one named algorithm; rand is seeded with the given seed."""
    if algorithm == "apalg":
        return apalg(instance)[0]
    if algorithm == "apalg-s":
        return apalg_s(instance)[0]
    if algorithm == "apalg-h":
        return apalg_h(instance)[0]
    if algorithm == "lpt":
        return list_schedule(instance, LPT)
    if algorithm == "hrr":
        return list_schedule(instance, HRR)
    if algorithm == "lrr":
        return list_schedule(instance, LRR)
    if algorithm == "rand":
        return list_schedule(instance, rand_policy(seed))
    raise ValueError(f"unknown algorithm {algorithm!r}")


@dataclass(frozen=True)
class BenchConfig:
    trace: str
    ns: tuple[int, ...]
    ms: tuple[int, ...]
    reps: int
    seed: int
    algos: tuple[str, ...]
    out: str

    def __post_init__(self) -> None:
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if not self.algos:
            raise ValueError("at least one algorithm is required")
        for name in self.algos:
            if name not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {name!r}")


def parse_config(text: str) -> BenchConfig:
    """Flat key=value config, one key per line, lists comma-separated."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise FormatError(f"config line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    required = ("trace", "ns", "ms", "reps", "seed", "algos", "out")
    missing = [k for k in required if k not in values]
    if missing:
        raise FormatError(f"config lacks required keys: {', '.join(missing)}")
    try:
        return BenchConfig(
            trace=values["trace"],
            ns=tuple(int(v) for v in values["ns"].split(",")),
            ms=tuple(int(v) for v in values["ms"].split(",")),
            reps=int(values["reps"]),
            seed=int(values["seed"]),
            algos=tuple(v.strip() for v in values["algos"].split(",")),
            out=values["out"],
        )
    except ValueError as exc:
        raise FormatError(f"bad config value: {exc}") from exc


@dataclass(frozen=True)
class BenchRow:
    instance_id: str
    n: int
    m: int
    seed: int
    algorithm: str
    cmax: int | None
    lb: Ratio | None
    normalized: Ratio | None
    runtime_ms: float | None

    def as_csv_row(self) -> list[str]:
        return [
            self.instance_id,
            str(self.n),
            str(self.m),
            str(self.seed),
            self.algorithm,
            "" if self.cmax is None else str(self.cmax),
            "" if self.lb is None else format_ratio(self.lb),
            "" if self.normalized is None else format_ratio(self.normalized),
            "" if self.runtime_ms is None else f"{self.runtime_ms:.3f}",
        ]


def bench_instance(
    instance: Instance, instance_id: str, seed: int, algos: tuple[str, ...]
) -> list[BenchRow]:
    """Solve one instance with each algorithm; wall clock covers the solve only."""
    lb = lower_bound(instance)
    rows = []
    for name in algos:
        begin = time.perf_counter()
        schedule = solve(name, instance, seed)
        elapsed_ms = (time.perf_counter() - begin) * 1000.0
        report = validate(schedule)
        if not report.ok:
            raise AssertionError(f"{name} produced an infeasible schedule: {report.violations}")
        cmax = makespan(schedule)
        rows.append(
            BenchRow(
                instance_id=instance_id,
                n=instance.n,
                m=instance.m,
                seed=seed,
                algorithm=name,
                cmax=cmax,
                lb=lb,
                normalized=Ratio(cmax) / lb,
                runtime_ms=elapsed_ms,
            )
        )
    return rows


def run_bench(config: BenchConfig, pool: JobPool | None = None) -> list[BenchRow]:
    """Full experiment matrix in deterministic (n, m, rep, algorithm) order.

    Rejected draws produce one `skipped` row with empty result fields instead
    of aborting the matrix.
    """
    if pool is None:
        pool = build_pool(load_trace(config.trace))
    rows: list[BenchRow] = []
    for n in config.ns:
        for m in config.ms:
            for rep in range(config.reps):
                cell_seed = mix_seed(config.seed, n, m, rep)
                instance_id = f"n{n}-m{m}-r{rep}"
                try:
                    instance = sample_instance(pool, n, m, cell_seed)
                except SampleRejectedError:
                    rows.append(
                        BenchRow(instance_id, n, m, cell_seed, "skipped", None, None, None, None)
                    )
                    continue
                rows.extend(bench_instance(instance, instance_id, cell_seed, config.algos))
    return rows


def rows_to_csv(rows: list[BenchRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(BENCH_FIELDS)
    for row in rows:
        writer.writerow(row.as_csv_row())
    return buf.getvalue()


def _median_exact(values: list[Ratio]) -> Ratio:
    ordered = sorted(values)
    k = len(ordered)
    if k % 2 == 1:
        return ordered[k // 2]
    return (ordered[k // 2 - 1] + ordered[k // 2]) / 2


def _median_float(values: list[float]) -> float:
    ordered = sorted(values)
    k = len(ordered)
    if k % 2 == 1:
        return ordered[k // 2]
    return (ordered[k // 2 - 1] + ordered[k // 2]) / 2


def summarize(rows: list[BenchRow]) -> str:
    """Per (n, m, algorithm): min/median/max normalized makespan, median runtime.

    Groups appear in first-occurrence order; skipped rows are left out.
    """
    if not rows:
        raise ValueError("cannot summarize an empty row set")
    groups: dict[tuple[int, int, str], list[BenchRow]] = {}
    for row in rows:
        if row.algorithm == "skipped":
            continue
        groups.setdefault((row.n, row.m, row.algorithm), []).append(row)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_FIELDS)
    for (n, m, algorithm), members in groups.items():
        normalized = [r.normalized for r in members]
        runtimes = [r.runtime_ms for r in members]
        writer.writerow(
            [
                n,
                m,
                algorithm,
                format_ratio(min(normalized)),
                format_ratio(_median_exact(normalized)),
                format_ratio(max(normalized)),
                f"{_median_float(runtimes):.3f}",
            ]
        )
    return buf.getvalue()


# --- command line ----------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orsched",
        description="Makespan scheduling with one orthogonal renewable resource.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run one algorithm on an instance file")
    p_solve.add_argument("--algo", required=True, choices=ALGORITHMS)
    p_solve.add_argument("--input", required=True)
    p_solve.add_argument("--seed", type=int, default=0)
    p_solve.add_argument("--out")
    p_solve.set_defaults(func=_cmd_solve)

    p_validate = sub.add_parser("validate", help="check a schedule CSV against an instance")
    p_validate.add_argument("--input", required=True)
    p_validate.add_argument("--schedule", required=True)
    p_validate.set_defaults(func=_cmd_validate)

    p_oracle = sub.add_parser("oracle", help="exact optimal makespan for small instances")
    p_oracle.add_argument("--input", required=True)
    p_oracle.add_argument("--budget", type=int, default=1_000_000)
    p_oracle.set_defaults(func=_cmd_oracle)

    p_gen = sub.add_parser("gen", help="sample an instance from a trace CSV")
    p_gen.add_argument("--trace", required=True)
    p_gen.add_argument("--n", type=int, required=True)
    p_gen.add_argument("--m", type=int, required=True)
    p_gen.add_argument("--seed", type=int, required=True)
    p_gen.add_argument("--out", required=True)
    p_gen.set_defaults(func=_cmd_gen)

    p_stats = sub.add_parser("stats", help="trace statistics: pool quartiles and Spearman")
    p_stats.add_argument("--trace", required=True)
    p_stats.set_defaults(func=_cmd_stats)

    p_bench = sub.add_parser("bench", help="run the experiment matrix from a config file")
    p_bench.add_argument("--config", required=True)
    p_bench.set_defaults(func=_cmd_bench)
    return parser


def _cmd_solve(args) -> int:
    instance = load_instance(args.input)
    schedule = solve(args.algo, instance, args.seed)
    report = validate(schedule)
    if not report.ok:
        print(f"error: solver emitted an infeasible schedule: {report.violations}", file=sys.stderr)
        return 1
    if args.out:
        save_schedule_csv(schedule, args.out)
    print(f"cmax {makespan(schedule)}")
    return 0


def _cmd_validate(args) -> int:
    instance = load_instance(args.input)
    schedule = load_schedule_csv(args.schedule, instance)
    report = validate(schedule)
    if report.ok:
        print("ok")
        return 0
    for v in report.violations:
        print(f"{v.kind.value} at t={v.time}: {v.detail}")
    return 1


def _cmd_oracle(args) -> int:
    instance = load_instance(args.input)
    result = optimal_makespan(instance, args.budget)
    print(f"opt {result.opt}")
    print(f"nodes {result.nodes_explored}")
    print(f"exhausted {str(result.exhausted).lower()}")
    return 0 if result.exhausted else 4


def _cmd_gen(args) -> int:
    pool = build_pool(load_trace(args.trace))
    instance = sample_instance(pool, args.n, args.m, args.seed)
    save_instance(instance, args.out)
    print(f"wrote {args.out} (n={instance.n}, m={instance.m}, R={instance.capacity})")
    return 0


def _cmd_stats(args) -> int:
    records = load_trace(args.trace)
    pool = build_pool(records)
    sys.stdout.write(pool_summary(pool))
    try:
        rho = spearman([(r.duration, r.memory) for r in records])
        print(f"spearman={rho:.5f}")
    except ValueError:
        print("spearman=undefined")
    return 0


def _cmd_bench(args) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        config = parse_config(fh.read())
    rows = run_bench(config)
    with open(config.out, "w", encoding="utf-8", newline="") as fh:
        fh.write(rows_to_csv(rows))
    sys.stdout.write(summarize(rows))
    return 0


def cli(argv=None) -> int:
    """Entry point returning the process exit code (see the exit-code table)."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except SampleRejectedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(cli(sys.argv[1:]))
