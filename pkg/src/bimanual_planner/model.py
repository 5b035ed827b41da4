"""Typed STRIPS planning-language model: domains, problems and their canonical text form.

The supported fragment is typed STRIPS with negative preconditions and
(in)equality constraints.  No conditional effects, no numeric fluents, no
durative actions.  All model classes are immutable; instances can be shared
freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

# Name of the built-in universal type.  Every declared type without an
# explicit parent is a direct child of this root.  It cannot be redeclared.
ROOT_TYPE = "any"


@dataclass(frozen=True)
class TypeName:
    """A declared object type.  ``parent=None`` means child of the root."""

    name: str
    parent: str | None = None


@dataclass(frozen=True)
class PredicateSchema:
    """Predicate declaration: name plus ordered (variable, type) parameters."""

    name: str
    params: tuple[tuple[str, str], ...] = ()

    @property
    def arity(self) -> int:
        return len(self.params)


@dataclass(frozen=True)
class Literal:
    """A (possibly negated) predicate applied to terms.

    Terms starting with ``?`` are variables, anything else is a constant.
    """

    predicate: str
    args: tuple[str, ...] = ()
    negated: bool = False

    def negate(self) -> "Literal":
        return replace(self, negated=not self.negated)

    def __str__(self) -> str:
        inner = f"({self.predicate}{''.join(' ' + a for a in self.args)})"
        return f"(not {inner})" if self.negated else inner


@dataclass(frozen=True)
class EqualityConstraint:
    """Equality (``(= a b)``) or inequality (``(not (= a b))``) between terms."""

    left: str
    right: str
    negated: bool = False


@dataclass(frozen=True)
class AgentAnnotation:
    """Hand-resource metadata attached to an action schema.

    ``kind`` is ``"single"`` (one hand, identified by the parameter at
    ``hand_param``) or ``"joint"`` (binds both hands).  This is model
    metadata, not planning-language syntax: it never appears in printed
    text and is excluded from structural equality.
    """

    kind: str
    hand_param: int | None = None


@dataclass(frozen=True)
class ActionSchema:
    name: str
    params: tuple[tuple[str, str], ...] = ()
    precondition: tuple[Literal, ...] = ()
    equalities: tuple[EqualityConstraint, ...] = ()
    add_effects: tuple[Literal, ...] = ()
    del_effects: tuple[Literal, ...] = ()
    agent: AgentAnnotation | None = field(default=None, compare=False)

    @property
    def param_names(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.params)


@dataclass(frozen=True)
class Domain:
    name: str
    types: tuple[TypeName, ...] = ()
    predicates: tuple[PredicateSchema, ...] = ()
    actions: tuple[ActionSchema, ...] = ()

    def predicate(self, name: str) -> PredicateSchema | None:
        low = name.lower()
        for p in self.predicates:
            if p.name.lower() == low:
                return p
        return None


@dataclass(frozen=True)
class Problem:
    name: str
    domain_name: str
    objects: tuple[tuple[str, str], ...] = ()
    init: tuple[Literal, ...] = ()
    goal: tuple[Literal, ...] = ()


# ---------------------------------------------------------------------------
# Type hierarchy helpers
# ---------------------------------------------------------------------------

def type_table(domain: Domain) -> dict[str, str | None]:
    """Map lowercase type name -> lowercase parent (None for root children)."""
    table: dict[str, str | None] = {}
    for t in domain.types:
        table[t.name.lower()] = t.parent.lower() if t.parent else None
    return table


def is_subtype(domain: Domain, sub: str, ancestor: str) -> bool:
    """True iff ``sub`` equals or descends from ``ancestor`` (case-insensitive)."""
    sub = sub.lower()
    ancestor = ancestor.lower()
    if ancestor == ROOT_TYPE:
        return True
    table = type_table(domain)
    seen = set()
    cur: str | None = sub
    while cur is not None and cur not in seen:
        if cur == ancestor:
            return True
        seen.add(cur)
        cur = table.get(cur)
    return False


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def validate_domain(domain: Domain) -> list[str]:
    """Return all structural violations in ``domain`` (empty list if well-formed)."""
    problems: list[str] = []
    table = type_table(domain)

    seen_types: set[str] = set()
    for t in domain.types:
        low = t.name.lower()
        if low == ROOT_TYPE:
            problems.append(f"type '{t.name}' shadows the built-in root type")
        if low in seen_types:
            problems.append(f"duplicate type '{t.name}'")
        seen_types.add(low)
        if t.parent and t.parent.lower() != ROOT_TYPE and t.parent.lower() not in table:
            problems.append(f"type '{t.name}' has undeclared parent '{t.parent}'")
    # Cycle check: walk each chain with a visited set.
    for t in domain.types:
        seen: set[str] = set()
        cur: str | None = t.name.lower()
        while cur is not None:
            if cur in seen:
                problems.append(f"type cycle through '{t.name}'")
                break
            seen.add(cur)
            cur = table.get(cur)

    def check_type_ref(ty: str, where: str) -> None:
        if ty.lower() != ROOT_TYPE and ty.lower() not in table:
            problems.append(f"undeclared type '{ty}' in {where}")

    preds: dict[str, PredicateSchema] = {}
    for p in domain.predicates:
        low = p.name.lower()
        if low in preds:
            problems.append(f"duplicate predicate '{p.name}'")
        preds[low] = p
        names = set()
        for var, ty in p.params:
            if not var.startswith("?"):
                problems.append(f"predicate '{p.name}' parameter '{var}' is not a variable")
            if var.lower() in names:
                problems.append(f"predicate '{p.name}' has duplicate parameter '{var}'")
            names.add(var.lower())
            check_type_ref(ty, f"predicate '{p.name}'")

    action_names: set[str] = set()
    for a in domain.actions:
        low = a.name.lower()
        if low in action_names:
            problems.append(f"duplicate action '{a.name}'")
        action_names.add(low)
        params = set()
        for var, ty in a.params:
            if var.lower() in params:
                problems.append(f"action '{a.name}' has duplicate parameter '{var}'")
            params.add(var.lower())
            check_type_ref(ty, f"action '{a.name}'")

        def check_literal(lit: Literal, where: str) -> None:
            schema = preds.get(lit.predicate.lower())
            if schema is None:
                problems.append(f"undeclared predicate '{lit.predicate}' in {where}")
            elif schema.arity != len(lit.args):
                problems.append(
                    f"arity mismatch for '{lit.predicate}' in {where}: "
                    f"expected {schema.arity}, got {len(lit.args)}"
                )
            for term in lit.args:
                if term.startswith("?") and term.lower() not in params:
                    problems.append(f"unbound variable '{term}' in {where}")

        for lit in a.precondition:
            check_literal(lit, f"precondition of '{a.name}'")
        for eq in a.equalities:
            for term in (eq.left, eq.right):
                if term.startswith("?") and term.lower() not in params:
                    problems.append(f"unbound variable '{term}' in equality of '{a.name}'")
        for lit in a.add_effects:
            if lit.negated:
                problems.append(f"negated add effect in '{a.name}'")
            check_literal(lit, f"effect of '{a.name}'")
        for lit in a.del_effects:
            if lit.negated:
                problems.append(f"negated delete effect in '{a.name}'")
            check_literal(lit, f"effect of '{a.name}'")
        overlap = set(a.add_effects) & set(a.del_effects)
        for lit in sorted(overlap, key=str):
            problems.append(f"literal {lit} appears in both add and delete of '{a.name}'")
        if a.agent is not None and a.agent.kind == "single":
            idx = a.agent.hand_param
            if idx is None or idx >= len(a.params):
                problems.append(f"action '{a.name}' hand annotation out of range")
    return problems


def validate_problem(problem: Problem, domain: Domain) -> list[str]:
    """Return all violations of ``problem`` against ``domain``."""
    issues: list[str] = []
    if problem.domain_name.lower() != domain.name.lower():
        issues.append(
            f"problem declares domain '{problem.domain_name}' but got '{domain.name}'"
        )
    table = type_table(domain)
    objects: dict[str, str] = {}
    for name, ty in problem.objects:
        if name.lower() in objects:
            issues.append(f"duplicate object '{name}'")
        if ty.lower() != ROOT_TYPE and ty.lower() not in table:
            issues.append(f"object '{name}' has undeclared type '{ty}'")
        objects[name.lower()] = ty

    def check_ground(lit: Literal, where: str) -> None:
        schema = domain.predicate(lit.predicate)
        if schema is None:
            issues.append(f"undeclared predicate '{lit.predicate}' in {where}")
        elif schema.arity != len(lit.args):
            issues.append(f"arity mismatch for '{lit.predicate}' in {where}")
        for term in lit.args:
            if term.startswith("?"):
                issues.append(f"variable '{term}' in {where} (must be ground)")
            elif term.lower() not in objects:
                issues.append(f"unknown object '{term}' in {where}")

    for lit in problem.init:
        if lit.negated:
            issues.append(f"negated init atom {lit}")
        check_ground(lit, "init")
    for lit in problem.goal:
        check_ground(lit, "goal")
    return issues


# ---------------------------------------------------------------------------
# Canonical printer
# ---------------------------------------------------------------------------

REQUIREMENTS_LINE = "(:requirements :strips :typing :negative-preconditions :equality)"


def _typed_item(name: str, ty: str | None) -> str:
    if ty is None or ty.lower() == ROOT_TYPE:
        return name.lower()
    return f"{name.lower()} - {ty.lower()}"


def _literal_text(lit: Literal) -> str:
    inner = f"({lit.predicate.lower()}{''.join(' ' + a.lower() for a in lit.args)})"
    return f"(not {inner})" if lit.negated else inner


def _equality_text(eq: EqualityConstraint) -> str:
    inner = f"(= {eq.left.lower()} {eq.right.lower()})"
    return f"(not {inner})" if eq.negated else inner


def print_domain(domain: Domain) -> str:
    """Emit canonical text for ``domain``.

    Lowercase identifiers, one declaration per line, declaration order
    preserved, so output is stable enough for golden files and round-trips
    through the parser.
    """
    lines = [f"(define (domain {domain.name.lower()})", f"  {REQUIREMENTS_LINE}"]
    if domain.types:
        lines.append("  (:types")
        for t in domain.types:
            lines.append(f"    {_typed_item(t.name, t.parent)}")
        lines.append("  )")
    if domain.predicates:
        lines.append("  (:predicates")
        for p in domain.predicates:
            params = "".join(f" {_typed_item(v, ty)}" for v, ty in p.params)
            lines.append(f"    ({p.name.lower()}{params})")
        lines.append("  )")
    for a in domain.actions:
        lines.append(f"  (:action {a.name.lower()}")
        params = " ".join(_typed_item(v, ty) for v, ty in a.params)
        lines.append(f"    :parameters ({params})")
        pre = [_literal_text(lit) for lit in a.precondition]
        pre += [_equality_text(eq) for eq in a.equalities]
        lines.append(f"    :precondition (and{''.join(' ' + p for p in pre)})")
        eff = [_literal_text(lit) for lit in a.add_effects]
        eff += [f"(not {_literal_text(lit)})" for lit in a.del_effects]
        lines.append(f"    :effect (and{''.join(' ' + e for e in eff)})")
        lines.append("  )")
    lines.append(")")
    return "\n".join(lines) + "\n"


def print_problem(problem: Problem) -> str:
    """Emit canonical text for ``problem``; round-trips through the parser."""
    lines = [
        f"(define (problem {problem.name.lower()})",
        f"  (:domain {problem.domain_name.lower()})",
    ]
    if problem.objects:
        lines.append("  (:objects")
        for name, ty in problem.objects:
            lines.append(f"    {_typed_item(name, ty)}")
        lines.append("  )")
    lines.append("  (:init")
    for lit in problem.init:
        lines.append(f"    {_literal_text(lit)}")
    lines.append("  )")
    goal = "".join(" " + _literal_text(lit) for lit in problem.goal)
    lines.append(f"  (:goal (and{goal}))")
    lines.append(")")
    return "\n".join(lines) + "\n"
