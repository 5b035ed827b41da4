"""Command-line entry point wiring the pipeline stages into subcommands.

Exit codes: 0 success, 1 domain-level failure (unsolvable, timeout, failed
validation, exhausted retries), 2 usage or parse errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import bench as bench_mod
from .deorder import deorder, load_pplan, rebalance_hands, save_pplan
from .domain_def import build_domain
from .executor import execute_partial_order, execute_sequential
from .grounding import GroundingError, ground, relaxed_reachability
from .model import Domain, print_domain, print_problem
from .parser import ParseError, parse_domain, parse_problem
from .scenarios import (
    PILE_SHAPES,
    ScenarioSpec,
    gen_scenario,
    goal_from_task_text,
    load_scene,
    save_scene,
)
from .search import STATUS_SOLVED, SearchConfig, load_plan, save_plan, solve
from .writer import (
    WriterConfig,
    WriterCredentialError,
    WriterError,
    write_problem_external,
    write_problem_rule,
)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

TASK_FLAGS = {
    "serve-water": "serve_water",
    "serve-fruit": "serve_fruit",
    "stack-block": "stack_block",
}


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _load_domain(path: str | None) -> Domain:
    if path is None:
        return build_domain()
    return parse_domain(Path(path).read_text())


def _load_task(domain_path: str | None, problem_path: str):
    domain = _load_domain(domain_path)
    problem = parse_problem(Path(problem_path).read_text(), domain)
    return domain, problem, relaxed_reachability(ground(domain, problem))


def _spec_from_args(args) -> ScenarioSpec:
    task = TASK_FLAGS.get(args.task)
    if task is None:
        raise CliError(f"unknown task '{args.task}'", EXIT_USAGE)
    blocks = getattr(args, "blocks", None)
    piles = getattr(args, "piles", None)
    shape = None
    if piles is not None:
        try:
            a, b = (int(x) for x in piles.split(","))
            shape = (a, b)
        except ValueError:
            raise CliError(f"cannot parse pile shape '{piles}'", EXIT_USAGE)
    if task == "stack_block" and blocks is None:
        blocks = 5
    if task == "stack_block" and shape is None:
        shape = PILE_SHAPES[blocks][0] if blocks in PILE_SHAPES else None
    try:
        return ScenarioSpec(task, seed=args.seed, block_total=blocks, pile_shape=shape)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE)


def cmd_plan(args) -> int:
    _, _, task = _load_task(args.domain, args.problem)
    result = solve(task, SearchConfig(algorithm=args.search, timeout_s=args.timeout))
    if args.out:
        save_plan(args.out, result)
    print(f"status: {result.status}")
    print(f"plan length: {len(result.plan.actions) if result.plan else 0}")
    print(f"expanded: {result.expanded}")
    print(f"duration_s: {result.duration_s:.3f}")
    if result.status != STATUS_SOLVED:
        if task.unsolvable_reason:
            print(task.unsolvable_reason)
        return EXIT_FAILURE
    return EXIT_OK


def cmd_schedule(args) -> int:
    _, _, task = _load_task(args.domain, args.problem)
    try:
        plan, status = load_plan(args.plan, task)
    except ValueError as exc:
        print(f"invalid plan: {exc}")
        return EXIT_FAILURE
    report = execute_sequential(task, plan)
    if not report.success:
        fail = report.failure
        where = f" at step {fail.step} ({fail.action})" if fail else ""
        print(f"plan does not validate{where}")
        return EXIT_FAILURE
    if not args.no_rebalance:
        plan = rebalance_hands(plan, task)
    pplan = deorder(plan, task)
    if args.out:
        save_pplan(args.out, pplan)
    print(f"steps: {pplan.n_steps} (from {len(plan.actions)} actions)")
    return EXIT_OK


def cmd_gen(args) -> int:
    spec = _spec_from_args(args)
    scene, goal, text = gen_scenario(spec)
    domain = build_domain()
    problem = write_problem_rule(scene, goal, domain)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_scene(out / "scene.json", scene, text)
    (out / "problem.pddl").write_text(print_problem(problem))
    (out / "task.txt").write_text(text + "\n")
    print(f"wrote scene.json, problem.pddl, task.txt to {out}")
    return EXIT_OK


def cmd_validate(args) -> int:
    _, _, task = _load_task(args.domain, args.problem)
    try:
        if args.partial_order:
            pplan = load_pplan(args.plan, task)
            report = execute_partial_order(task, pplan)
        else:
            plan, _ = load_plan(args.plan, task)
            report = execute_sequential(task, plan)
    except ValueError as exc:
        print(f"invalid plan file: {exc}")
        return EXIT_FAILURE
    print(json.dumps(report.to_dict(task), indent=2))
    return EXIT_OK if report.success else EXIT_FAILURE


def cmd_bench(args) -> int:
    spec = _spec_from_args(args)
    pipelines = []
    for label in args.pipelines.split(","):
        label = label.strip()
        pipe = bench_mod.DEFAULT_PIPELINES.get(label)
        if pipe is None:
            raise CliError(
                f"unknown pipeline '{label}' "
                f"(available: {', '.join(sorted(bench_mod.DEFAULT_PIPELINES))})",
                EXIT_USAGE,
            )
        pipelines.append(pipe)
    records = bench_mod.run_bench(
        spec,
        pipelines,
        runs=args.runs,
        base_seed=args.seed,
        timeout_s=args.timeout,
        workers=args.workers,
    )
    if args.csv:
        bench_mod.emit_csv(records, args.csv)
    print(bench_mod.summarize(records))
    return EXIT_OK


def cmd_write_problem(args) -> int:
    scene, task_text = load_scene(args.scene)
    domain = _load_domain(args.domain)
    if args.writer == "rule":
        goal = goal_from_task_text(scene, task_text)
        problem = write_problem_rule(scene, goal, domain)
        round_trips = 0
    else:
        endpoint = args.endpoint or os.environ.get("LLM_ENDPOINT")
        if not endpoint:
            raise CliError(
                "llm writer needs --endpoint or LLM_ENDPOINT", EXIT_USAGE
            )
        cfg = WriterConfig(
            endpoint=endpoint,
            model=args.model,
            api_key_env=args.api_key_env,
            max_retries=args.max_retries,
        )
        try:
            result = write_problem_external(scene, task_text, domain, cfg)
        except WriterCredentialError as exc:
            raise CliError(str(exc), EXIT_USAGE)
        except WriterError as exc:
            print(f"writer failed: {exc}")
            return EXIT_FAILURE
        problem, round_trips = result.problem, result.round_trips
    Path(args.out).write_text(print_problem(problem))
    if args.writer != "rule":
        print(f"round trips: {round_trips}")
    print(f"wrote {args.out}")
    return EXIT_OK


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bimanual-planner",
        description="Two-hand task planning: generate, solve, deorder, validate, benchmark.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="solve a problem and write a plan file")
    p.add_argument("--domain", help="domain file (default: built-in two-hand domain)")
    p.add_argument("--problem", required=True)
    p.add_argument("--search", choices=("bfs", "gbfs"), default="gbfs")
    p.add_argument("--timeout", type=float, default=300.0)
    p.add_argument("--out", help="plan file to write")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("schedule", help="deorder a plan into hand-parallel steps")
    p.add_argument("--plan", required=True)
    p.add_argument("--domain")
    p.add_argument("--problem", required=True)
    p.add_argument("--out", help="partial-order plan file to write")
    p.add_argument(
        "--no-rebalance",
        action="store_true",
        help="keep the input plan's hand assignment instead of optimizing it",
    )
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("gen", help="generate a seeded scenario (scene, problem, task text)")
    p.add_argument("--task", required=True, choices=sorted(TASK_FLAGS))
    p.add_argument("--blocks", type=int, help="block count for stack-block (4 or 5)")
    p.add_argument("--piles", help='pile shape for stack-block, e.g. "4,1"')
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("validate", help="execute a plan file and report the outcome")
    p.add_argument("--domain")
    p.add_argument("--problem", required=True)
    p.add_argument("--plan", required=True)
    p.add_argument("--partial-order", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("bench", help="run the seeded benchmark harness")
    p.add_argument("--task", required=True, choices=sorted(TASK_FLAGS))
    p.add_argument("--blocks", type=int)
    p.add_argument("--piles")
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--pipelines", default="map,p")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--timeout", type=float, default=60.0)
    p.add_argument("--csv", help="CSV output path")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("write-problem", help="write a problem file from a scene file")
    p.add_argument("--scene", required=True)
    p.add_argument("--writer", choices=("rule", "llm"), default="rule")
    p.add_argument("--domain")
    p.add_argument("--out", required=True)
    p.add_argument("--endpoint", help="text-generation endpoint (or LLM_ENDPOINT)")
    p.add_argument("--model", default="default")
    p.add_argument("--api-key-env", default="LLM_API_KEY")
    p.add_argument("--max-retries", type=int, default=3)
    p.set_defaults(func=cmd_write_problem)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_arg_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GroundingError as exc:
        print(f"grounding error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CliError as exc:
        print(str(exc), file=sys.stderr)
        return exc.code
    except FileNotFoundError as exc:
        print(f"cannot read {exc.filename}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, json.JSONDecodeError) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
