"""Batch experiment driver: seeded runs, SR / group-debits / PSRR metrics, CSV.

Each run generates one instance from ``base_seed + r`` and solves it under
every pipeline; failures are recorded, never dropped.  The CSV carries only
the deterministic fields (seed, label, success, step counts) so that two runs
with identical flags produce byte-identical files; wall-clock stage timings
live on the in-memory records and in the printed summary.
"""

from __future__ import annotations

import csv
import logging
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from .deorder import deorder, rebalance_hands
from .domain_def import build_domain
from .executor import execute_partial_order, execute_sequential
from .grounding import ground, relaxed_reachability
from .scenarios import ScenarioSpec, gen_scenario
from .search import STATUS_SOLVED, SearchConfig, solve
from .writer import write_problem_rule

log = logging.getLogger(__name__)

SCHED_SEQUENTIAL = "sequential"
SCHED_PARTIAL_ORDER = "partial_order"


@dataclass(frozen=True)
class PipelineConfig:
    label: str
    writer: str = "rule"  # "rule" | "external"
    search: str = "gbfs"  # "bfs" | "gbfs"
    scheduling: str = SCHED_PARTIAL_ORDER


# The two ablation arms: hand-parallel scheduling versus the sequential
# single-stream baseline, both on the same deterministic writer and solver.
DEFAULT_PIPELINES = {
    "map": PipelineConfig("map", scheduling=SCHED_PARTIAL_ORDER),
    "p": PipelineConfig("p", scheduling=SCHED_SEQUENTIAL),
    "map-bfs": PipelineConfig("map-bfs", search="bfs", scheduling=SCHED_PARTIAL_ORDER),
    "p-bfs": PipelineConfig("p-bfs", search="bfs", scheduling=SCHED_SEQUENTIAL),
}


@dataclass
class BenchRecord:
    seed: int
    label: str
    writer_time_s: float
    search_time_s: float
    schedule_time_s: float
    success: bool
    sequential_steps: int
    parallel_steps: int


def _finish_record(
    spec: ScenarioSpec,
    pipeline: PipelineConfig,
    task,
    result,
    writer_time: float,
    search_time: float,
) -> BenchRecord:
    if result.status != STATUS_SOLVED:
        log.warning("seed %d pipeline %s: %s", spec.seed, pipeline.label, result.status)
        return BenchRecord(
            spec.seed, pipeline.label, writer_time, search_time, 0.0, False, 0, 0
        )
    plan = result.plan
    if pipeline.scheduling == SCHED_PARTIAL_ORDER:
        t2 = time.perf_counter()
        pplan = deorder(rebalance_hands(plan, task), task)
        schedule_time = time.perf_counter() - t2
        report = execute_partial_order(task, pplan)
        parallel_steps = pplan.n_steps
    else:
        schedule_time = 0.0
        report = execute_sequential(task, plan)
        parallel_steps = len(plan)
    return BenchRecord(
        seed=spec.seed,
        label=pipeline.label,
        writer_time_s=writer_time,
        search_time_s=search_time,
        schedule_time_s=schedule_time,
        success=report.success,
        sequential_steps=len(plan) if report.success else 0,
        parallel_steps=parallel_steps if report.success else 0,
    )


def run_one(spec: ScenarioSpec, pipeline: PipelineConfig, timeout_s: float = 60.0) -> BenchRecord:
    """Run the full pipeline on one seeded instance and record the outcome."""
    domain = build_domain()
    t0 = time.perf_counter()
    scene, goal, _text = gen_scenario(spec)
    problem = write_problem_rule(scene, goal, domain)
    writer_time = time.perf_counter() - t0
    t1 = time.perf_counter()
    task = relaxed_reachability(ground(domain, problem))
    result = solve(task, SearchConfig(algorithm=pipeline.search, timeout_s=timeout_s))
    search_time = time.perf_counter() - t1
    return _finish_record(spec, pipeline, task, result, writer_time, search_time)


def _run_seed(args) -> list[BenchRecord]:
    """All pipelines on one instance; those sharing (writer, search) share one solve."""
    spec, pipelines, timeout_s = args
    records = []
    by_stage: dict[tuple[str, str], list[PipelineConfig]] = {}
    for p in pipelines:
        by_stage.setdefault((p.writer, p.search), []).append(p)
    domain = build_domain()
    for (writer, search), members in by_stage.items():
        t0 = time.perf_counter()
        scene, goal, _text = gen_scenario(spec)
        problem = write_problem_rule(scene, goal, domain)
        writer_time = time.perf_counter() - t0
        t1 = time.perf_counter()
        task = relaxed_reachability(ground(domain, problem))
        result = solve(task, SearchConfig(algorithm=search, timeout_s=timeout_s))
        search_time = time.perf_counter() - t1
        for pipeline in members:
            records.append(
                _finish_record(spec, pipeline, task, result, writer_time, search_time)
            )
    return records


def run_bench(
    spec_template: ScenarioSpec,
    pipelines: list[PipelineConfig],
    runs: int,
    base_seed: int = 0,
    timeout_s: float = 60.0,
    workers: int = 1,
) -> list[BenchRecord]:
    """One instance per run (seed = base_seed + r), solved under every pipeline."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    jobs = [
        (replace(spec_template, seed=base_seed + r), list(pipelines), timeout_s)
        for r in range(runs)
    ]
    records: list[BenchRecord] = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for batch in pool.map(_run_seed, jobs):
                records.extend(batch)
    else:
        for job in jobs:
            records.extend(_run_seed(job))
    records.sort(key=lambda r: (r.seed, r.label))
    return records


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

def success_rate(records: list[BenchRecord]) -> float:
    """Percentage of successful records."""
    if not records:
        raise ValueError("success_rate over empty record set")
    return 100.0 * sum(1 for r in records if r.success) / len(records)


def group_debits(records: list[BenchRecord]) -> tuple[dict[str, list[int]], int]:
    """Per-pipeline debit distributions over per-seed groups.

    Within each seed group the champion is the successful record with the
    fewest steps; every successful record is charged its excess over the
    champion.  Unsuccessful records are excluded; groups with no success are
    skipped and counted.
    """
    groups: dict[int, list[BenchRecord]] = {}
    for r in records:
        groups.setdefault(r.seed, []).append(r)
    debits: dict[str, list[int]] = {}
    skipped = 0
    for seed in sorted(groups):
        winners = [r for r in groups[seed] if r.success]
        if not winners:
            skipped += 1
            continue
        champion = min(r.parallel_steps for r in winners)
        for r in winners:
            debits.setdefault(r.label, []).append(r.parallel_steps - champion)
    return debits, skipped


def psrr(baseline: BenchRecord, partial_order: BenchRecord) -> float:
    """Step reduction of the partial-order arm over the sequential baseline, in %."""
    if baseline.seed != partial_order.seed:
        raise ValueError("PSRR pair must share a seed")
    if not (baseline.success and partial_order.success):
        raise ValueError("PSRR is only defined over successful pairs")
    if baseline.sequential_steps == 0:
        raise ValueError("degenerate instance: baseline has zero steps")
    return (
        (baseline.sequential_steps - partial_order.parallel_steps)
        / baseline.sequential_steps
        * 100.0
    )


def psrr_pairs(
    records: list[BenchRecord], baseline_label: str, partial_label: str
) -> list[float]:
    by_seed: dict[int, dict[str, BenchRecord]] = {}
    for r in records:
        by_seed.setdefault(r.seed, {})[r.label] = r
    values = []
    for seed in sorted(by_seed):
        pair = by_seed[seed]
        base, po = pair.get(baseline_label), pair.get(partial_label)
        if base and po and base.success and po.success and base.sequential_steps:
            values.append(psrr(base, po))
    return values


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

CSV_FIELDS = ("seed", "label", "success", "sequential_steps", "parallel_steps")


def emit_csv(records: list[BenchRecord], path: str | Path) -> None:
    """Deterministic CSV: header plus one row per record, sorted by (seed, label)."""
    ordered = sorted(records, key=lambda r: (r.seed, r.label))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_FIELDS)
        for r in ordered:
            writer.writerow(
                [r.seed, r.label, str(r.success).lower(), r.sequential_steps, r.parallel_steps]
            )


def _mean_sd(values: list[float]) -> str:
    if not values:
        return "n/a"
    mean = statistics.fmean(values)
    sd = statistics.pstdev(values) if len(values) > 1 else 0.0
    return f"{mean:.2f} ± {sd:.2f}"


def summarize(
    records: list[BenchRecord],
    baseline_label: str = "p",
    partial_label: str = "map",
) -> str:
    """Human-readable summary: SR, stage times, debit histogram, mean PSRR.

    Step counting: partial-order arms report parallel steps (schedule layers),
    sequential arms report plan length.
    """
    lines = [
        "step counting: parallel steps for partial-order arms, plan length otherwise",
    ]
    labels = sorted({r.label for r in records})
    debits, skipped = group_debits(records)
    for label in labels:
        subset = [r for r in records if r.label == label]
        lines.append(f"pipeline {label}:")
        lines.append(f"  runs: {len(subset)}  SR: {success_rate(subset):.1f}%")
        lines.append(f"  writer time s: {_mean_sd([r.writer_time_s for r in subset])}")
        lines.append(f"  search time s: {_mean_sd([r.search_time_s for r in subset])}")
        lines.append(f"  schedule time s: {_mean_sd([r.schedule_time_s for r in subset])}")
        dist = debits.get(label, [])
        if dist:
            buckets: dict[int, int] = {}
            for d in dist:
                buckets[d] = buckets.get(d, 0) + 1
            hist = "  ".join(f"{d}:{buckets[d]}" for d in sorted(buckets))
            lines.append(f"  debits histogram (debit:count): {hist}")
    if skipped:
        lines.append(f"seed groups skipped (no success): {skipped}")
    values = psrr_pairs(records, baseline_label, partial_label)
    if values:
        lines.append(
            f"mean PSRR ({partial_label} over {baseline_label}): "
            f"{statistics.fmean(values):.1f}% across {len(values)} pairs"
        )
    return "\n".join(lines)
