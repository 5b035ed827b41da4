"""Forward state-space search over a ground task.

States are plain integers interpreted as bit-vectors over the task's atom
table (bit i set iff atom i holds), so successor generation and duplicate
detection are single big-int operations.

Two algorithms are provided: blind breadth-first search, which returns a
shortest plan and serves as the optimality oracle, and greedy best-first
search guided by the additive delete-relaxation heuristic, which is the
default solver.  Both are deterministic: successors are generated in action-id
order and ties broken FIFO.
"""

from __future__ import annotations

import heapq
import json
import math
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

from .grounding import GroundAction, GroundTask

INF = math.inf

STATUS_SOLVED = "solved"
STATUS_UNSOLVABLE = "unsolvable"
STATUS_TIMEOUT = "timeout"


@dataclass
class SearchConfig:
    algorithm: str = "gbfs"  # "bfs" | "gbfs"
    timeout_s: float = 300.0

    def __post_init__(self):
        if self.algorithm not in ("bfs", "gbfs"):
            raise ValueError(f"unknown search algorithm '{self.algorithm}'")
        if self.timeout_s <= 0:
            raise ValueError("timeout must be positive")


@dataclass
class Plan:
    actions: list[GroundAction] = field(default_factory=list)
    expanded: int = 0
    duration_s: float = 0.0

    def __len__(self) -> int:
        return len(self.actions)

    def action_strings(self) -> list[str]:
        return [str(a) for a in self.actions]


@dataclass
class SearchResult:
    status: str
    plan: Plan | None
    expanded: int
    duration_s: float


def applicable(state: int, action: GroundAction) -> bool:
    """True iff all positive preconditions hold and no negative one is violated."""
    return (
        state & action.pre_mask == action.pre_mask
        and state & action.pre_neg_mask == 0
    )


def apply(state: int, action: GroundAction) -> int:
    """Successor state ``(state \\ delete) | add``; requires applicability."""
    if not applicable(state, action):
        raise ValueError(f"action {action} is not applicable")
    return (state & ~action.del_mask) | action.add_mask


def goal_reached(state: int, task: GroundTask) -> bool:
    # A goal with a statically impossible atom can never be reached, whatever
    # the fluent part of the state says.
    if task.unsolvable_reason is not None:
        return False
    return (
        state & task.goal_pos_mask == task.goal_pos_mask
        and state & task.goal_neg_mask == 0
    )


def _state_atoms(state: int) -> list[int]:
    out = []
    while state:
        low = state & -state
        out.append(low.bit_length() - 1)
        state ^= low
    return out


# ---------------------------------------------------------------------------
# Additive delete-relaxation heuristic
# ---------------------------------------------------------------------------

_UNREACHED = 1 << 30


def _hadd_tables(task: GroundTask):
    """Per-task index: which actions consume each atom, base counters, adds."""
    cache = task._hadd_cache
    if cache is not None:
        return cache
    consumers: list[tuple[int, ...]] = [() for _ in range(task.n_atoms)]
    grouped: list[list[int]] = [[] for _ in range(task.n_atoms)]
    base_counters = []
    add_lists = []
    for i, act in enumerate(task.actions):
        add_lists.append(tuple(act.add))
        base_counters.append(len(act.pre))
        for p in act.pre:
            grouped[p].append(i)
    consumers = [tuple(g) for g in grouped]
    is_goal = bytearray(task.n_atoms)
    for g in task.goal_pos:
        is_goal[g] = 1
    cache = (consumers, base_counters, add_lists, is_goal, tuple(task.goal_pos))
    task._hadd_cache = cache
    return cache


def h_add(state: int, task: GroundTask) -> float:
    """Sum over goal atoms of their relaxed reachability cost from ``state``.

    0 iff the goal already holds under delete relaxation; ``inf`` iff some
    positive goal atom is relaxed-unreachable.  Negative preconditions and
    negative goal atoms are ignored (treated as free), keeping the estimate
    sound for dead-end detection.

    Costs are unit per action, so the computation runs as an integer
    bucket-queue Dijkstra over the atom table; an action fires when its last
    positive precondition is settled.
    """
    if not task.goal_pos:
        return 0.0
    consumers, base_counters, add_lists, is_goal, goal_ids = _hadd_tables(task)
    cost = [_UNREACHED] * task.n_atoms
    counters = base_counters.copy()
    acc = [1] * len(counters)  # action cost accumulator: 1 + sum of pre costs
    state_atoms = _state_atoms(state)
    for atom in state_atoms:
        cost[atom] = 0
    if all(cost[g] == 0 for g in goal_ids):
        return 0.0
    # The settle loop below decrements once per goal atom, including the
    # cost-0 ones popped from the first bucket.
    goal_missing = len(goal_ids)

    buckets: list[list[int]] = [state_atoms]

    def trigger(action_idx: int) -> None:
        c = acc[action_idx]
        for a in add_lists[action_idx]:
            if c < cost[a]:
                cost[a] = a_cost = c
                while len(buckets) <= a_cost:
                    buckets.append([])
                buckets[a_cost].append(a)

    for i, n in enumerate(counters):
        if n == 0:
            trigger(i)

    c = 0
    while c < len(buckets):
        for atom in buckets[c]:
            if cost[atom] != c:
                continue  # stale entry; a cheaper bucket already settled it
            cost[atom] = -c - 1  # mark settled (negative), value recoverable
            if is_goal[atom]:
                goal_missing -= 1
                if goal_missing == 0:
                    total = 0
                    for g in goal_ids:
                        gc = cost[g]
                        total += -gc - 1 if gc < 0 else gc
                    return float(total)
            for i in consumers[atom]:
                counters[i] -= 1
                acc[i] += c
                if counters[i] == 0:
                    trigger(i)
        c += 1
    return INF


# ---------------------------------------------------------------------------
# Search algorithms
# ---------------------------------------------------------------------------

def _extract(parents, state: int, task: GroundTask) -> list[GroundAction]:
    seq: list[GroundAction] = []
    while True:
        prev = parents[state]
        if prev is None:
            break
        state, action_idx = prev
        seq.append(task.actions[action_idx])
    seq.reverse()
    return seq


def _mask_arrays(task: GroundTask):
    """Parallel per-action mask lists; attribute access is too slow in the hot loop."""
    cache = getattr(task, "_mask_cache", None)
    if cache is None:
        cache = (
            [a.pre_mask for a in task.actions],
            [a.pre_neg_mask for a in task.actions],
            [a.add_mask for a in task.actions],
            [~a.del_mask for a in task.actions],
        )
        task._mask_cache = cache
    return cache


def _bfs(task: GroundTask, deadline: float):
    init = task.init_mask
    parents: dict[int, tuple[int, int] | None] = {init: None}
    expanded = 0
    if goal_reached(init, task):
        return STATUS_SOLVED, [], expanded
    pres, negs, adds, keeps = _mask_arrays(task)
    indices = range(len(pres))
    goal_pos, goal_neg = task.goal_pos_mask, task.goal_neg_mask
    queue = deque([init])
    while queue:
        if time.perf_counter() > deadline:
            return STATUS_TIMEOUT, None, expanded
        state = queue.popleft()
        expanded += 1
        for i in indices:
            pre = pres[i]
            if state & pre == pre and not state & negs[i]:
                succ = (state & keeps[i]) | adds[i]
                if succ in parents:
                    continue
                parents[succ] = (state, i)
                if succ & goal_pos == goal_pos and not succ & goal_neg:
                    return STATUS_SOLVED, _extract(parents, succ, task), expanded
                queue.append(succ)
    return STATUS_UNSOLVABLE, None, expanded


def _gbfs(task: GroundTask, deadline: float):
    init = task.init_mask
    if goal_reached(init, task):
        return STATUS_SOLVED, [], 0
    h0 = h_add(init, task)
    if h0 == INF:
        return STATUS_UNSOLVABLE, None, 0
    parents: dict[int, tuple[int, int] | None] = {init: None}
    # Every generated state is evaluated once; relaxed dead ends (h = inf) are
    # never queued.  FIFO tie-breaking via a counter.
    tie = 0
    heap: list[tuple[float, int, int]] = [(h0, tie, init)]
    expanded = 0
    pres, negs, adds, keeps = _mask_arrays(task)
    indices = range(len(pres))
    goal_pos, goal_neg = task.goal_pos_mask, task.goal_neg_mask
    push = heapq.heappush
    while heap:
        if time.perf_counter() > deadline:
            return STATUS_TIMEOUT, None, expanded
        _, _, state = heapq.heappop(heap)
        expanded += 1
        for i in indices:
            pre = pres[i]
            if state & pre == pre and not state & negs[i]:
                succ = (state & keeps[i]) | adds[i]
                if succ in parents:
                    continue
                parents[succ] = (state, i)
                if succ & goal_pos == goal_pos and not succ & goal_neg:
                    return STATUS_SOLVED, _extract(parents, succ, task), expanded
                h = h_add(succ, task)
                if h == INF:
                    continue
                tie += 1
                push(heap, (h, tie, succ))
    return STATUS_UNSOLVABLE, None, expanded


def solve(task: GroundTask, config: SearchConfig | None = None) -> SearchResult:
    """Search for a plan; bfs yields a shortest one, gbfs some valid one.

    Returns a distinct status for timeout and unsolvable instead of raising;
    returned plans always validate under the executor's semantics.
    """
    config = config or SearchConfig()
    start = time.perf_counter()
    if task.unsolvable_reason is not None:
        return SearchResult(STATUS_UNSOLVABLE, None, 0, time.perf_counter() - start)
    deadline = start + config.timeout_s
    algo = _bfs if config.algorithm == "bfs" else _gbfs
    status, actions, expanded = algo(task, deadline)
    duration = time.perf_counter() - start
    plan = Plan(actions, expanded, duration) if status == STATUS_SOLVED else None
    return SearchResult(status, plan, expanded, duration)


# ---------------------------------------------------------------------------
# Plan files
# ---------------------------------------------------------------------------

def result_to_dict(result: SearchResult) -> dict:
    return {
        "status": result.status,
        "actions": result.plan.action_strings() if result.plan else [],
        "expanded": result.expanded,
        "duration_s": round(result.duration_s, 6),
    }


def save_plan(path: str | Path, result: SearchResult) -> None:
    Path(path).write_text(json.dumps(result_to_dict(result), indent=2) + "\n")


def parse_action_string(text: str) -> tuple[str, tuple[str, ...]]:
    text = text.strip()
    if not text.endswith(")") or "(" not in text:
        raise ValueError(f"malformed action string '{text}'")
    name, inner = text[:-1].split("(", 1)
    args = tuple(a.strip() for a in inner.split(",")) if inner.strip() else ()
    return name.strip().lower(), args


def resolve_plan(task: GroundTask, action_strings: list[str]) -> Plan:
    """Map serialized action strings back onto this task's ground actions."""
    table = task.action_by_signature()
    actions = []
    for text in action_strings:
        sig = parse_action_string(text)
        act = table.get(sig)
        if act is None:
            raise ValueError(f"unknown action '{text}' for this task")
        actions.append(act)
    return Plan(actions)


def load_plan(path: str | Path, task: GroundTask) -> tuple[Plan, str]:
    data = json.loads(Path(path).read_text())
    return resolve_plan(task, data["actions"]), data.get("status", STATUS_SOLVED)
