"""Instantiate action schemas over problem objects into an indexed ground task.

Atoms are interned as dense integer ids; sets of atoms are carried both as
frozensets of ids and as integer bitmasks (bit i set iff atom i present),
which is what the search and the executor operate on.

Static predicates (those never occurring in any effect) are used to filter
bindings against the initial state and are then compiled out of
preconditions; they never enter the atom table.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .model import Domain, Literal, Problem, is_subtype

Atom = tuple[str, ...]  # (predicate, arg, ...) — all lowercase


class GroundingError(Exception):
    """Raised when a problem cannot be soundly grounded against its domain."""


def atom_str(atom: Atom) -> str:
    return f"{atom[0]}({', '.join(atom[1:])})"


def _mask(ids) -> int:
    m = 0
    for i in ids:
        m |= 1 << i
    return m


@dataclass(frozen=True)
class GroundAction:
    """One type-consistent instantiation of an action schema."""

    name: str
    args: tuple[str, ...]
    pre: frozenset[int]
    pre_neg: frozenset[int]
    add: frozenset[int]
    delete: frozenset[int]
    hands: frozenset[str]
    index: int = field(compare=False, default=0)
    pre_mask: int = field(compare=False, default=0)
    pre_neg_mask: int = field(compare=False, default=0)
    add_mask: int = field(compare=False, default=0)
    del_mask: int = field(compare=False, default=0)

    def __str__(self) -> str:
        return f"{self.name}({', '.join(self.args)})"


@dataclass
class GroundTask:
    """Interned atoms, ground actions and the init/goal of one instance."""

    atoms: list[Atom]
    atom_ids: dict[Atom, int]
    actions: list[GroundAction]
    init: frozenset[int]
    goal_pos: frozenset[int]
    goal_neg: frozenset[int]
    static_atoms: frozenset[Atom]
    unsolvable_reason: str | None = None
    goal_relaxed_reachable: bool = True

    def __post_init__(self):
        self.init_mask = _mask(self.init)
        self.goal_pos_mask = _mask(self.goal_pos)
        self.goal_neg_mask = _mask(self.goal_neg)
        self._hadd_cache = None

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    def atom_name(self, atom_id: int) -> str:
        return atom_str(self.atoms[atom_id])

    def action_by_signature(self) -> dict[tuple[str, tuple[str, ...]], GroundAction]:
        return {(a.name, a.args): a for a in self.actions}


def dump_atom_table(task: GroundTask) -> str:
    """One ``id<TAB>atom`` line per interned atom, for debugging."""
    return "\n".join(f"{i}\t{atom_str(a)}" for i, a in enumerate(task.atoms)) + "\n"


def _objects_by_type(domain: Domain, problem: Problem) -> dict[str, list[str]]:
    """Map each declared type (plus the root) to its objects, in declaration order."""
    by_type: dict[str, list[str]] = {}
    for name, ty in problem.objects:
        by_type.setdefault(ty.lower(), []).append(name.lower())
    # Expand: an object of a subtype is also an object of every ancestor type.
    expanded: dict[str, list[str]] = {}
    all_types = [t.name.lower() for t in domain.types]
    for ty in all_types:
        members = []
        for sub, objs in by_type.items():
            if is_subtype(domain, sub, ty):
                members.extend(objs)
        expanded[ty] = members
    from .model import ROOT_TYPE

    expanded[ROOT_TYPE] = [name.lower() for name, _ in problem.objects]
    return expanded


def static_predicates(domain: Domain) -> frozenset[str]:
    """Predicates never occurring in any add or delete effect."""
    fluent = {
        lit.predicate.lower()
        for a in domain.actions
        for lit in itertools.chain(a.add_effects, a.del_effects)
    }
    return frozenset(p.name.lower() for p in domain.predicates) - frozenset(fluent)


def enumerate_bindings(
    domain: Domain, problem: Problem, schema_name: str
) -> list[tuple[str, ...]]:
    """All type-consistent parameter bindings for one schema.

    Equality constraints are applied; static-precondition filtering is not.
    This is the raw candidate set before any reachability pruning.
    """
    schema = next(
        (a for a in domain.actions if a.name.lower() == schema_name.lower()), None
    )
    if schema is None:
        raise GroundingError(f"unknown action schema '{schema_name}'")
    by_type = _objects_by_type(domain, problem)
    pools = [by_type.get(ty.lower(), []) for _, ty in schema.params]
    param_index = {v.lower(): i for i, (v, _) in enumerate(schema.params)}
    out = []
    for combo in itertools.product(*pools):
        ok = True
        for eq in schema.equalities:
            lhs = combo[param_index[eq.left.lower()]] if eq.left.startswith("?") else eq.left.lower()
            rhs = combo[param_index[eq.right.lower()]] if eq.right.startswith("?") else eq.right.lower()
            if eq.negated == (lhs == rhs):
                ok = False
                break
        if ok:
            out.append(combo)
    return out


def ground(domain: Domain, problem: Problem) -> GroundTask:
    """Ground ``problem`` over ``domain``.

    Enumerates all type-consistent instantiations, applies equality
    constraints, filters bindings on static preconditions against the initial
    state, compiles static predicates out, and interns the remaining atoms in
    a deterministic discovery order (init first, then schema enumeration
    order) so state hashes are reproducible.
    """
    statics = static_predicates(domain)
    object_types = {name.lower(): ty.lower() for name, ty in problem.objects}
    hand_objects = frozenset(
        name for name, ty in object_types.items() if is_subtype(domain, ty, "hand")
    )
    by_type = _objects_by_type(domain, problem)

    atoms: list[Atom] = []
    atom_ids: dict[Atom, int] = {}

    def intern(atom: Atom) -> int:
        got = atom_ids.get(atom)
        if got is None:
            got = len(atoms)
            atom_ids[atom] = got
            atoms.append(atom)
        return got

    static_true: set[Atom] = set()
    init_ids: list[int] = []
    for lit in problem.init:
        atom = (lit.predicate.lower(),) + tuple(a.lower() for a in lit.args)
        if atom[0] in statics:
            static_true.add(atom)
        else:
            init_ids.append(intern(atom))

    actions: list[GroundAction] = []
    for schema in domain.actions:
        param_index = {v.lower(): i for i, (v, _) in enumerate(schema.params)}

        def resolve(term: str, combo: tuple[str, ...]) -> str:
            low = term.lower()
            if term.startswith("?"):
                return combo[param_index[low]]
            if low not in object_types:
                raise GroundingError(
                    f"action '{schema.name}' references undeclared constant '{term}'"
                )
            return low

        pools = [by_type.get(ty.lower(), []) for _, ty in schema.params]
        for combo in itertools.product(*pools):
            ok = True
            for eq in schema.equalities:
                lhs = resolve(eq.left, combo)
                rhs = resolve(eq.right, combo)
                if eq.negated == (lhs == rhs):
                    ok = False
                    break
            if not ok:
                continue
            pre: set[int] = set()
            pre_neg: set[int] = set()
            for lit in schema.precondition:
                atom = (lit.predicate.lower(),) + tuple(resolve(t, combo) for t in lit.args)
                if atom[0] in statics:
                    holds = atom in static_true
                    if holds == lit.negated:
                        ok = False
                        break
                else:
                    (pre_neg if lit.negated else pre).add(intern(atom))
            if not ok:
                continue
            add = frozenset(
                intern((lit.predicate.lower(),) + tuple(resolve(t, combo) for t in lit.args))
                for lit in schema.add_effects
            )
            delete = frozenset(
                intern((lit.predicate.lower(),) + tuple(resolve(t, combo) for t in lit.args))
                for lit in schema.del_effects
            )
            overlap = add & delete
            if overlap:
                raise GroundingError(
                    f"action {schema.name}({', '.join(combo)}) adds and deletes "
                    f"{atom_str(atoms[next(iter(overlap))])}"
                )
            # Hand resources: every hand-typed object among the bound arguments
            # or mentioned in the body (joint skills name both hands directly).
            hands = {a for a in combo if a in hand_objects}
            for group in (pre, pre_neg, add, delete):
                for atom_id in group:
                    hands.update(h for h in atoms[atom_id][1:] if h in hand_objects)
            actions.append(
                GroundAction(
                    schema.name.lower(),
                    tuple(combo),
                    frozenset(pre),
                    frozenset(pre_neg),
                    add,
                    delete,
                    frozenset(hands),
                    index=len(actions),
                    pre_mask=_mask(pre),
                    pre_neg_mask=_mask(pre_neg),
                    add_mask=_mask(add),
                    del_mask=_mask(delete),
                )
            )

    goal_pos: set[int] = set()
    goal_neg: set[int] = set()
    unsolvable: str | None = None
    for lit in problem.goal:
        atom = (lit.predicate.lower(),) + tuple(a.lower() for a in lit.args)
        if atom[0] in statics:
            holds = atom in static_true
            if holds == lit.negated:
                unsolvable = f"unsolvable goal: static atom {atom_str(atom)} can never change"
        else:
            (goal_neg if lit.negated else goal_pos).add(intern(atom))

    return GroundTask(
        atoms=atoms,
        atom_ids=atom_ids,
        actions=actions,
        init=frozenset(init_ids),
        goal_pos=frozenset(goal_pos),
        goal_neg=frozenset(goal_neg),
        static_atoms=frozenset(static_true),
        unsolvable_reason=unsolvable,
        goal_relaxed_reachable=unsolvable is None,
    )


def relaxed_reachability(task: GroundTask) -> GroundTask:
    """Restrict ``task`` to actions applicable under delete relaxation.

    Negative preconditions are treated as free (satisfiable), so the
    reachable set over-approximates true reachability and pruning never
    removes an action that could appear in a valid plan.  Atom ids are
    preserved; only the action list shrinks.
    """
    reached = set(task.init)
    consumers: dict[int, list[int]] = {}
    counters = []
    for i, act in enumerate(task.actions):
        counters.append(len(act.pre))
        for p in act.pre:
            consumers.setdefault(p, []).append(i)

    queue = list(task.init)
    applicable: set[int] = set()
    for i, act in enumerate(task.actions):
        if counters[i] == 0:
            applicable.add(i)
            for a in act.add:
                if a not in reached:
                    reached.add(a)
                    queue.append(a)
    while queue:
        atom = queue.pop()
        for i in consumers.get(atom, ()):
            counters[i] -= 1
            if counters[i] == 0:
                applicable.add(i)
                for a in task.actions[i].add:
                    if a not in reached:
                        reached.add(a)
                        queue.append(a)

    kept = [
        GroundAction(
            a.name,
            a.args,
            a.pre,
            a.pre_neg,
            a.add,
            a.delete,
            a.hands,
            index=new_index,
            pre_mask=a.pre_mask,
            pre_neg_mask=a.pre_neg_mask,
            add_mask=a.add_mask,
            del_mask=a.del_mask,
        )
        for new_index, a in enumerate(
            a for i, a in enumerate(task.actions) if i in applicable
        )
    ]
    goal_ok = task.goal_pos <= reached
    reason = task.unsolvable_reason
    if not goal_ok and reason is None:
        missing = sorted(task.goal_pos - reached)
        reason = (
            "unsolvable goal: atom "
            f"{atom_str(task.atoms[missing[0]])} is relaxed-unreachable"
        )
    return GroundTask(
        atoms=task.atoms,
        atom_ids=task.atom_ids,
        actions=kept,
        init=task.init,
        goal_pos=task.goal_pos,
        goal_neg=task.goal_neg,
        static_atoms=task.static_atoms,
        unsolvable_reason=reason,
        goal_relaxed_reachable=goal_ok and task.goal_relaxed_reachable,
    )
