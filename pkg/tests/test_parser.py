from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bimanual_planner.domain_def import build_domain
from bimanual_planner.model import print_domain, print_problem
from bimanual_planner.parser import ParseError, parse_domain, parse_problem
from bimanual_planner.scenarios import ScenarioSpec, gen_scenario
from bimanual_planner.writer import write_problem_rule

TINY_DOMAIN = """
(define (domain tiny)
  (:requirements :strips :typing)
  (:types block)
  (:predicates (clear ?b - block) (on ?a - block ?b - block))
  (:action stack
    :parameters (?a - block ?b - block)
    :precondition (and (clear ?a) (clear ?b) (not (= ?a ?b)))
    :effect (and (on ?a ?b) (not (clear ?b)))
  )
)
"""

TINY_PROBLEM = """
(define (problem two)
  (:domain tiny)
  (:objects b1 b2 - block)
  (:init (clear b1) (clear b2))
  (:goal (and (on b1 b2)))
)
"""


def test_empty_domain():
    d = parse_domain("(define (domain empty))")
    assert d.name == "empty"
    assert d.types == () and d.predicates == () and d.actions == ()


def test_builtin_domain_text_shape():
    d = parse_domain(print_domain(build_domain()))
    assert len(d.types) == 4
    assert len(d.predicates) >= 12
    assert len(d.actions) == 9


def test_undeclared_type_is_semantic_error():
    with pytest.raises(ParseError) as err:
        parse_domain("(define (domain x) (:predicates (p ?a - ghost)))")
    assert "semantic error" in err.value.message
    assert "undeclared type" in err.value.message


def test_tiny_domain_and_problem():
    d = parse_domain(TINY_DOMAIN)
    assert [a.name for a in d.actions] == ["stack"]
    stack = d.actions[0]
    assert len(stack.precondition) == 2
    assert len(stack.equalities) == 1 and stack.equalities[0].negated
    p = parse_problem(TINY_PROBLEM, d)
    assert len(p.init) == 2 and len(p.goal) == 1


def test_minimal_problem_empty_goal():
    d = parse_domain("(define (domain empty))")
    p = parse_problem("(define (problem m) (:domain empty) (:init) (:goal (and)))", d)
    assert p.goal == ()


def test_rule_writer_output_parses_with_one_location_atom_per_object():
    domain = build_domain()
    scene, goal, _ = gen_scenario(ScenarioSpec("serve_water", seed=4))
    problem = write_problem_rule(scene, goal, domain)
    reparsed = parse_problem(print_problem(problem), domain)
    at_area = [lit for lit in reparsed.init if lit.predicate == "object_at_area"]
    assert len(at_area) == len(scene.objects)
    assert {lit.args[0] for lit in at_area} == {o.name for o in scene.objects}


def test_goal_with_undeclared_object_is_semantic_error():
    d = parse_domain(TINY_DOMAIN)
    bad = TINY_PROBLEM.replace("(on b1 b2)", "(on b1 b9)")
    with pytest.raises(ParseError) as err:
        parse_problem(bad, d)
    assert "unknown object" in err.value.message


def test_problem_domain_mismatch():
    d = parse_domain(TINY_DOMAIN)
    with pytest.raises(ParseError) as err:
        parse_problem("(define (problem x) (:domain other) (:init) (:goal (and)))", d)
    assert "declares domain" in err.value.message


def test_duplicate_declarations_rejected():
    with pytest.raises(ParseError):
        parse_domain("(define (domain d) (:types a a))")
    with pytest.raises(ParseError):
        parse_domain("(define (domain d) (:predicates (p) (p)))")


def test_unsupported_requirement_rejected():
    with pytest.raises(ParseError) as err:
        parse_domain("(define (domain d) (:requirements :adl))")
    assert "unsupported requirement" in err.value.message


def test_error_positions_point_at_corruption():
    # Corrupt one token per line of a valid file: reported line must match.
    d_text = print_domain(build_domain())
    lines = d_text.splitlines()
    for lineno in (3, 10, 30):
        broken = lines.copy()
        broken[lineno - 1] = broken[lineno - 1].replace("(", "((", 1)
        try:
            parse_domain("\n".join(broken))
        except ParseError as err:
            assert err.line >= lineno  # never points before the corruption
        else:
            pytest.fail("corruption went unnoticed")


def test_reported_line_matches_bad_token_line():
    src = "(define (domain d)\n  (:types a)\n  (:predicates (p ?x - ghost))\n)"
    with pytest.raises(ParseError) as err:
        parse_domain(src)
    assert err.value.line == 3
    assert err.value.column > 1


def test_determinism():
    text = print_domain(build_domain())
    assert parse_domain(text) == parse_domain(text)


def test_lexical_error_on_bad_character():
    with pytest.raises(ParseError) as err:
        parse_domain('(define (domain "x"))')
    assert "lexical error" in err.value.message


def test_trailing_content_rejected():
    with pytest.raises(ParseError):
        parse_domain("(define (domain d)) extra")


@given(st.binary(max_size=400))
@settings(max_examples=300, deadline=None)
def test_fuzz_domain_never_crashes(data):
    try:
        parse_domain(data.decode("utf-8", errors="replace"))
    except ParseError:
        pass


@given(st.text(alphabet="(definproblmdomain:objcts-?~ \n\t;", max_size=300))
@settings(max_examples=300, deadline=None)
def test_fuzz_problem_never_crashes(text):
    d = parse_domain(TINY_DOMAIN)
    try:
        parse_problem(text, d)
    except ParseError:
        pass


@given(st.integers(0, 10000), st.sampled_from("()?;:- azx\n"))
@settings(max_examples=200, deadline=None)
def test_fuzz_mutated_valid_files(position, replacement):
    base = TINY_DOMAIN + TINY_PROBLEM
    pos = position % len(base)
    mutated = base[:pos] + replacement + base[pos + 1 :]
    domain_part = mutated[: len(TINY_DOMAIN)]
    try:
        d = parse_domain(domain_part)
    except ParseError:
        d = parse_domain(TINY_DOMAIN)
    try:
        parse_problem(mutated[len(TINY_DOMAIN) :], d)
    except ParseError:
        pass
