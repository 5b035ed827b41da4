from __future__ import annotations

import pytest

from bimanual_planner.model import (
    ActionSchema,
    Domain,
    Literal,
    PredicateSchema,
    Problem,
    TypeName,
    print_domain,
    print_problem,
    validate_domain,
    validate_problem,
)
from bimanual_planner.parser import parse_domain, parse_problem
from bimanual_planner.scenarios import ScenarioSpec, gen_scenario
from bimanual_planner.writer import write_problem_rule


def test_print_empty_domain_is_header_only():
    text = print_domain(Domain("empty"))
    assert text.startswith("(define (domain empty)")
    assert ":types" not in text
    assert ":action" not in text
    assert parse_domain(text) == Domain("empty")


def test_print_domain_single_nullary_predicate():
    d = Domain("tiny", predicates=(PredicateSchema("flag"),))
    text = print_domain(d)
    assert "(flag)" in text
    assert parse_domain(text) == d


def test_bimanual_domain_round_trips(bimanual):
    assert parse_domain(print_domain(bimanual)) == bimanual


def test_print_problem_minimal():
    d = Domain("empty")
    p = Problem("tiny", "empty")
    text = print_problem(p)
    assert "(:goal (and))" in text
    assert parse_problem(text, d) == p


def test_print_problem_one_object_per_type(bimanual):
    p = Problem(
        "typed",
        "bimanual",
        objects=(("h1", "hand"), ("a1", "area"), ("o1", "object"), ("p1", "point")),
    )
    text = print_problem(p)
    for line in ("h1 - hand", "a1 - area", "o1 - object", "p1 - point"):
        assert line in text
    assert parse_problem(text, bimanual) == p


def test_generated_serve_water_problem_round_trips(bimanual):
    scene, goal, _ = gen_scenario(ScenarioSpec("serve_water", seed=7))
    problem = write_problem_rule(scene, goal, bimanual)
    assert parse_problem(print_problem(problem), bimanual) == problem


def test_validate_domain_reports_arity_mismatch():
    d = Domain(
        "bad",
        predicates=(PredicateSchema("p", (("?x", "any"),)),),
        actions=(
            ActionSchema(
                "a",
                params=(("?x", "any"),),
                precondition=(Literal("p", ("?x", "?x")),),
            ),
        ),
    )
    issues = validate_domain(d)
    assert any("arity mismatch" in i for i in issues)


def test_validate_domain_reports_unbound_variable_and_add_del_overlap():
    d = Domain(
        "bad",
        predicates=(PredicateSchema("p", (("?x", "any"),)),),
        actions=(
            ActionSchema(
                "a",
                params=(("?x", "any"),),
                precondition=(Literal("p", ("?y",)),),
                add_effects=(Literal("p", ("?x",)),),
                del_effects=(Literal("p", ("?x",)),),
            ),
        ),
    )
    issues = validate_domain(d)
    assert any("unbound variable '?y'" in i for i in issues)
    assert any("both add and delete" in i for i in issues)


def test_validate_domain_rejects_type_cycle():
    d = Domain("bad", types=(TypeName("a", "b"), TypeName("b", "a")))
    assert any("cycle" in i for i in validate_domain(d))


def test_validate_problem_checks_objects_and_domain_name(bimanual):
    p = Problem(
        "bad",
        "other_domain",
        objects=(("x", "ghost"),),
        init=(Literal("is_free", ("y",)),),
    )
    issues = validate_problem(p, bimanual)
    assert any("declares domain" in i for i in issues)
    assert any("undeclared type 'ghost'" in i for i in issues)
    assert any("unknown object 'y'" in i for i in issues)


def test_well_formed_bimanual_domain_validates_clean(bimanual):
    assert validate_domain(bimanual) == []


@pytest.mark.parametrize("seed", [0, 3, 11])
def test_generated_problems_validate_clean(bimanual, seed):
    scene, goal, _ = gen_scenario(ScenarioSpec("serve_fruit", seed=seed))
    problem = write_problem_rule(scene, goal, bimanual)
    assert validate_problem(problem, bimanual) == []
