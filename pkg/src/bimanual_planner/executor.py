"""Simulated world: validates and executes plans against a ground task.

Execution failures are data (reports), never exceptions.  Parallel steps use
Graphplan non-interference semantics: all preconditions are checked against
the layer-entry state, pairwise interference is rejected, then all effects
apply simultaneously.
"""

from __future__ import annotations

from dataclasses import dataclass

from .deorder import PartialOrderPlan
from .grounding import GroundAction, GroundTask
from .search import Plan, applicable


@dataclass(frozen=True)
class ExecutionFailure:
    step: int
    action: str
    reason: str  # precondition | neg-precondition | interference | hand-overlap
    atom: str | None = None
    other_action: str | None = None


@dataclass
class ExecutionReport:
    success: bool
    steps_executed: int
    failure: ExecutionFailure | None
    final_state: int
    goal_satisfied: bool

    def to_dict(self, task: GroundTask) -> dict:
        out = {
            "success": self.success,
            "steps_executed": self.steps_executed,
            "goal_satisfied": self.goal_satisfied,
            "final_state": sorted(
                task.atom_name(i) for i in _bits(self.final_state)
            ),
        }
        if self.failure is not None:
            out["failure"] = {
                "step": self.failure.step,
                "action": self.failure.action,
                "reason": self.failure.reason,
                "atom": self.failure.atom,
                "other_action": self.failure.other_action,
            }
        return out


def _bits(state: int):
    while state:
        low = state & -state
        yield low.bit_length() - 1
        state ^= low


def goal_check(state: int, task: GroundTask) -> bool:
    """True iff positive goal atoms all hold and negative ones are all absent."""
    if task.unsolvable_reason is not None and "static" in task.unsolvable_reason:
        return False
    return (
        state & task.goal_pos_mask == task.goal_pos_mask
        and state & task.goal_neg_mask == 0
    )


def _first_violation(state: int, action: GroundAction, task: GroundTask, step: int) -> ExecutionFailure:
    for atom_id in sorted(action.pre):
        if not state & (1 << atom_id):
            return ExecutionFailure(
                step, str(action), "precondition", task.atom_name(atom_id)
            )
    for atom_id in sorted(action.pre_neg):
        if state & (1 << atom_id):
            return ExecutionFailure(
                step, str(action), "neg-precondition", task.atom_name(atom_id)
            )
    raise AssertionError("no violation found for inapplicable action")


def execute_sequential(task: GroundTask, plan: Plan) -> ExecutionReport:
    """Apply actions in order, halting at the first inapplicable one."""
    state = task.init_mask
    for step, action in enumerate(plan.actions):
        if not applicable(state, action):
            return ExecutionReport(
                success=False,
                steps_executed=step,
                failure=_first_violation(state, action, task, step),
                final_state=state,
                goal_satisfied=goal_check(state, task),
            )
        state = (state & ~action.del_mask) | action.add_mask
    reached = goal_check(state, task)
    return ExecutionReport(
        success=reached,
        steps_executed=len(plan.actions),
        failure=None if reached else ExecutionFailure(
            len(plan.actions), "", "goal", None
        ),
        final_state=state,
        goal_satisfied=reached,
    )


def _interference(a: GroundAction, b: GroundAction) -> tuple[str, str] | None:
    """Why ``a`` and ``b`` may not share a step (reason, atom/hand), if at all."""
    if a.hands & b.hands:
        return "hand-overlap", sorted(a.hands & b.hands)[0]
    clash = a.del_mask & (b.pre_mask | b.add_mask)
    if clash:
        return "interference", None if not clash else _lowest(clash)
    clash = a.add_mask & b.pre_neg_mask
    if clash:
        return "interference", _lowest(clash)
    return None


def _lowest(mask: int):
    return (mask & -mask).bit_length() - 1


def execute_partial_order(task: GroundTask, pplan: PartialOrderPlan) -> ExecutionReport:
    """Execute layer by layer, checking joint applicability and non-interference.

    ``steps_executed`` counts completed layers.
    """
    state = task.init_mask
    actions = pplan.plan.actions
    for step, layer in enumerate(pplan.layers):
        members = [actions[i] for i in layer]
        for act in members:
            if not applicable(state, act):
                return ExecutionReport(
                    False, step, _first_violation(state, act, task, step), state,
                    goal_check(state, task),
                )
        for x in range(len(members)):
            for y in range(len(members)):
                if x == y:
                    continue
                hit = _interference(members[x], members[y])
                if hit is not None:
                    reason, detail = hit
                    atom = (
                        task.atom_name(detail)
                        if reason == "interference" and detail is not None
                        else (detail if isinstance(detail, str) else None)
                    )
                    return ExecutionReport(
                        False,
                        step,
                        ExecutionFailure(
                            step, str(members[x]), reason, atom, str(members[y])
                        ),
                        state,
                        goal_check(state, task),
                    )
        add = 0
        delete = 0
        for act in members:
            add |= act.add_mask
            delete |= act.del_mask
        state = (state & ~delete) | add
    reached = goal_check(state, task)
    return ExecutionReport(
        success=reached,
        steps_executed=len(pplan.layers),
        failure=None if reached else ExecutionFailure(len(pplan.layers), "", "goal", None),
        final_state=state,
        goal_satisfied=reached,
    )
