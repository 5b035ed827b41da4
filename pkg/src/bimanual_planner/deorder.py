"""Deorder a total-order plan into a precedence DAG and a layered two-hand schedule.

Edges only ever point forward in the input plan order, so the graph is acyclic
by construction.  The edge rules are the full pairwise-interference closure
for STRIPS with negative preconditions, plus hand-resource exclusion; any
topological order of the result is a valid plan reaching the same final state.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .grounding import GroundTask
from .rng import SplitMix64
from .search import Plan

EDGE_CAUSAL = "causal"
EDGE_THREAT = "threat"
EDGE_CONFLICT = "conflict"
EDGE_HAND = "hand-resource"


@dataclass
class PrecedenceGraph:
    """Ordering constraints between plan positions, with reasons per edge."""

    n: int
    edges: dict[tuple[int, int], tuple[str, ...]] = field(default_factory=dict)

    def predecessors(self, j: int) -> list[int]:
        return [i for (i, k) in self.edges if k == j]

    def successors(self, i: int) -> list[int]:
        return [k for (h, k) in self.edges if h == i]

    def transitive_reduction(self) -> "PrecedenceGraph":
        """Drop edges implied by longer paths (reasons preserved on kept edges)."""
        succ = {i: set() for i in range(self.n)}
        for (i, j) in self.edges:
            succ[i].add(j)
        # reachable[i] = nodes reachable via >=2 hops; iterate in reverse order
        reach: dict[int, set[int]] = {i: set() for i in range(self.n)}
        for i in range(self.n - 1, -1, -1):
            for j in succ[i]:
                reach[i] |= succ[j] | reach[j]
        kept = {
            (i, j): reasons
            for (i, j), reasons in self.edges.items()
            if j not in reach[i]
        }
        return PrecedenceGraph(self.n, kept)


@dataclass
class PartialOrderPlan:
    plan: Plan
    graph: PrecedenceGraph
    layers: list[list[int]]  # positions into plan.actions, grouped by step

    @property
    def n_steps(self) -> int:
        return len(self.layers)

    def step_actions(self) -> list[list[str]]:
        return [[str(self.plan.actions[i]) for i in layer] for layer in self.layers]


def precedence_graph(plan: Plan, task: GroundTask) -> PrecedenceGraph:
    """Build ordering constraints whose every linearization stays valid.

    Edge rules for i < j:
      causal    — i is the latest producer before j of an atom j requires
                  (positively: i adds it; negatively: i deletes it)
      threat    — j deletes an atom i requires, or j adds an atom i requires
                  absent (a consumer never floats past its clobberer)
      conflict  — effects collide (one adds what the other deletes), keeping
                  every producer/deleter pair of an atom in plan order
      hand-resource — both bind at least one common hand

    Support edges come only from the *latest* producer: earlier producers and
    deleters of the same atom are already ordered against it by conflict
    edges, so any topological order preserves each consumer's support chain.
    """
    acts = plan.actions
    edges: dict[tuple[int, int], set[str]] = {}

    def note(i: int, j: int, reason: str) -> None:
        edges.setdefault((i, j), set()).add(reason)

    last_add: dict[int, int] = {}
    last_del: dict[int, int] = {}
    for j, aj in enumerate(acts):
        for atom in aj.pre:
            i = last_add.get(atom)
            if i is not None:
                note(i, j, EDGE_CAUSAL)
        for atom in aj.pre_neg:
            i = last_del.get(atom)
            if i is not None:
                note(i, j, EDGE_CAUSAL)
        for i in range(j):
            ai = acts[i]
            if ai.pre_mask & aj.del_mask or ai.pre_neg_mask & aj.add_mask:
                note(i, j, EDGE_THREAT)
            if ai.add_mask & aj.del_mask or ai.del_mask & aj.add_mask:
                note(i, j, EDGE_CONFLICT)
            if ai.hands & aj.hands:
                note(i, j, EDGE_HAND)
        for atom in aj.add:
            last_add[atom] = j
        for atom in aj.delete:
            last_del[atom] = j
    return PrecedenceGraph(
        len(acts), {k: tuple(sorted(v)) for k, v in edges.items()}
    )


def schedule(graph: PrecedenceGraph, plan: Plan) -> PartialOrderPlan:
    """Greedy earliest-layer assignment: layer(j) = 1 + max layer of predecessors.

    Hand-resource edges make the at-most-one-action-per-hand-per-step
    constraint structural, so no extra bookkeeping is needed here.
    """
    preds: dict[int, list[int]] = {j: [] for j in range(graph.n)}
    for (i, j) in graph.edges:
        preds[j].append(i)
    level = [0] * graph.n
    # Edges only point forward in plan order, so increasing position order is
    # already topological.
    for j in range(graph.n):
        if preds[j]:
            level[j] = 1 + max(level[i] for i in preds[j])
    layers: list[list[int]] = [[] for _ in range(max(level, default=-1) + 1)]
    for pos, lv in enumerate(level):
        layers[lv].append(pos)
    return PartialOrderPlan(plan, graph, layers)


def deorder(plan: Plan, task: GroundTask) -> PartialOrderPlan:
    """Convenience: precedence graph + layered schedule in one call."""
    return schedule(precedence_graph(plan, task), plan)


# ---------------------------------------------------------------------------
# Hand rebalancing
# ---------------------------------------------------------------------------

def _simulates(task: GroundTask, actions: list) -> bool:
    state = task.init_mask
    for act in actions:
        if state & act.pre_mask != act.pre_mask or state & act.pre_neg_mask:
            return False
        state = (state & ~act.del_mask) | act.add_mask
    return (
        state & task.goal_pos_mask == task.goal_pos_mask
        and state & task.goal_neg_mask == 0
    )


def _carry_cycles(plan: Plan) -> list[list[int]]:
    """Maximal action groups that must share one hand binding.

    A cycle opens at a grasp and runs until the carry resolves (release or
    place); single-hand actions outside a carry (push) are singleton cycles.
    Joint actions are never reassignable.
    """
    cycles: list[list[int]] = []
    open_cycle: dict[str, list[int]] = {}
    for pos, act in enumerate(plan.actions):
        if len(act.hands) != 1:
            continue
        hand = next(iter(act.hands))
        if act.name == "grasp":
            open_cycle[hand] = [pos]
            cycles.append(open_cycle[hand])
        elif hand in open_cycle:
            open_cycle[hand].append(pos)
            if act.name in ("release", "place"):
                del open_cycle[hand]
        else:
            cycles.append([pos])
    return cycles


def rebalance_hands(plan: Plan, task: GroundTask, hands: tuple[str, str] = ("left_hand", "right_hand")) -> Plan:
    """Reassign whole carry cycles to the other hand when that shrinks the schedule.

    Deterministic steepest-descent local search over hand bindings: a flipped
    cycle is accepted only if every flipped action exists in the ground task
    (unreachable flips, e.g. across the body, simply do not exist), the
    resulting sequence still executes to the goal, and the layered schedule
    gets strictly shorter.  Plan length never changes, so the sequential
    baseline is unaffected.
    """
    table = task.action_by_signature()
    left, right = hands
    other = {left: right, right: left}

    def flipped(current: Plan, positions: list[int]) -> Plan | None:
        new_actions = list(current.actions)
        for pos in positions:
            act = current.actions[pos]
            hand = next(iter(act.hands))
            args = tuple(other[hand] if a == hand else a for a in act.args)
            repl = table.get((act.name, args))
            if repl is None:
                return None
            new_actions[pos] = repl
        return Plan(new_actions, current.expanded, current.duration_s)

    best = plan
    best_layers = schedule(precedence_graph(best, task), best).n_steps
    while True:
        winner = None
        for cycle in _carry_cycles(best):
            cand = flipped(best, cycle)
            if cand is None or not _simulates(task, cand.actions):
                continue
            layers = schedule(precedence_graph(cand, task), cand).n_steps
            if layers < best_layers:
                winner, best_layers = cand, layers
        if winner is None:
            return best
        best = winner


def _count_linearizations(graph: PrecedenceGraph, cap: int) -> int:
    """Count topological orders, stopping early once the count exceeds ``cap``."""
    succs: dict[int, list[int]] = {i: [] for i in range(graph.n)}
    indeg = [0] * graph.n
    for (i, j) in graph.edges:
        succs[i].append(j)
        indeg[j] += 1
    count = 0

    def rec(indeg: list[int], remaining: int) -> bool:
        nonlocal count
        if remaining == 0:
            count += 1
            return count <= cap
        for v in range(graph.n):
            if indeg[v] == 0:
                indeg[v] = -1
                for w in succs[v]:
                    indeg[w] -= 1
                ok = rec(indeg, remaining - 1)
                for w in succs[v]:
                    indeg[w] += 1
                indeg[v] = 0
                if not ok:
                    return False
        return True

    rec(indeg.copy(), graph.n)
    return count


def linearizations(pplan: PartialOrderPlan, limit: int = 10000) -> list[Plan]:
    """All topological orderings of the precedence graph as total-order plans.

    Raises ``ValueError`` when the count exceeds ``limit`` (reported as a
    lower bound) rather than materializing an explosion.
    """
    graph = pplan.graph
    count = _count_linearizations(graph, limit)
    if count > limit:
        raise ValueError(
            f"linearization count exceeds limit: at least {count} > {limit}"
        )
    succs: dict[int, list[int]] = {i: [] for i in range(graph.n)}
    indeg = [0] * graph.n
    for (i, j) in graph.edges:
        succs[i].append(j)
        indeg[j] += 1
    out: list[Plan] = []
    order: list[int] = []

    def rec() -> None:
        if len(order) == graph.n:
            out.append(Plan([pplan.plan.actions[i] for i in order]))
            return
        for v in range(graph.n):
            if indeg[v] == 0:
                indeg[v] = -1
                for w in succs[v]:
                    indeg[w] -= 1
                order.append(v)
                rec()
                order.pop()
                for w in succs[v]:
                    indeg[w] += 1
                indeg[v] = 0

    rec()
    return out


def sample_linearizations(pplan: PartialOrderPlan, k: int, seed: int = 0) -> list[Plan]:
    """``k`` random topological orders (random Kahn), deterministic per seed."""
    graph = pplan.graph
    succs: dict[int, list[int]] = {i: [] for i in range(graph.n)}
    base_indeg = [0] * graph.n
    for (i, j) in graph.edges:
        succs[i].append(j)
        base_indeg[j] += 1
    rng = SplitMix64(seed)
    out = []
    for _ in range(k):
        indeg = base_indeg.copy()
        ready = [v for v in range(graph.n) if indeg[v] == 0]
        order = []
        while ready:
            v = ready.pop(rng.below(len(ready)))
            order.append(v)
            for w in succs[v]:
                indeg[w] -= 1
                if indeg[w] == 0:
                    ready.append(w)
        out.append(Plan([pplan.plan.actions[i] for i in order]))
    return out


# ---------------------------------------------------------------------------
# Partial-order plan files
# ---------------------------------------------------------------------------

def pplan_to_dict(pplan: PartialOrderPlan) -> dict:
    return {
        "actions": pplan.plan.action_strings(),
        "steps": pplan.step_actions(),
        "edges": [
            {"from": i, "to": j, "reasons": list(reasons)}
            for (i, j), reasons in sorted(pplan.graph.edges.items())
        ],
    }


def save_pplan(path: str | Path, pplan: PartialOrderPlan) -> None:
    Path(path).write_text(json.dumps(pplan_to_dict(pplan), indent=2) + "\n")


def load_pplan(path: str | Path, task: GroundTask) -> PartialOrderPlan:
    """Rebuild a partial-order plan from its file against ``task``.

    The stored layer structure is preserved (it is re-derived from the stored
    edges), so a hand-edited file with an invalid layer will be caught by the
    executor rather than silently repaired.
    """
    from .search import resolve_plan

    data = json.loads(Path(path).read_text())
    plan = resolve_plan(task, data["actions"])
    n = len(plan.actions)
    edges = {
        (e["from"], e["to"]): tuple(e["reasons"]) for e in data.get("edges", [])
    }
    graph = PrecedenceGraph(n, edges)
    sig_to_pos: dict[str, list[int]] = {}
    for pos, text in enumerate(data["actions"]):
        sig_to_pos.setdefault(text, []).append(pos)
    layers = []
    for step in data["steps"]:
        layer = []
        for text in step:
            positions = sig_to_pos.get(text)
            if not positions:
                raise ValueError(f"step action '{text}' not in action list")
            layer.append(positions.pop(0))
        layers.append(layer)
    return PartialOrderPlan(plan, graph, layers)
