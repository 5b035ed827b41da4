from __future__ import annotations

import itertools

import pytest

from bimanual_planner.domain_def import build_domain
from bimanual_planner.grounding import (
    GroundingError,
    dump_atom_table,
    enumerate_bindings,
    ground,
    relaxed_reachability,
    static_predicates,
)
from bimanual_planner.model import is_subtype
from bimanual_planner.parser import parse_domain, parse_problem
from bimanual_planner.scenarios import ScenarioSpec, gen_scenario
from bimanual_planner.search import SearchConfig, solve
from bimanual_planner.writer import write_problem_rule

from conftest import make_instance

PAIR_DOMAIN = """
(define (domain pairs)
  (:predicates (linked ?a ?b))
  (:action link
    :parameters (?a ?b)
    :precondition (and)
    :effect (and (linked ?a ?b))
  )
)
"""

PAIR_PROBLEM = """
(define (problem three)
  (:domain pairs)
  (:objects x y z)
  (:init)
  (:goal (and (linked x y)))
)
"""


def brute_force_ground_count(domain, problem) -> int:
    """Independent enumeration: typed products, equality filter, static filter."""
    statics = {
        p.name.lower()
        for p in domain.predicates
        if p.name.lower()
        not in {
            lit.predicate.lower()
            for a in domain.actions
            for lit in a.add_effects + a.del_effects
        }
    }
    static_init = {
        (lit.predicate.lower(),) + tuple(t.lower() for t in lit.args)
        for lit in problem.init
        if lit.predicate.lower() in statics
    }
    total = 0
    for schema in domain.actions:
        pools = []
        for _, ty in schema.params:
            pools.append(
                [n.lower() for n, oty in problem.objects if is_subtype(domain, oty, ty)]
            )
        names = [v.lower() for v, _ in schema.params]
        for combo in itertools.product(*pools):
            binding = dict(zip(names, combo))

            def term(t):
                return binding[t.lower()] if t.startswith("?") else t.lower()

            if any(
                eq.negated == (term(eq.left) == term(eq.right))
                for eq in schema.equalities
            ):
                continue
            ok = True
            for lit in schema.precondition:
                if lit.predicate.lower() in statics:
                    atom = (lit.predicate.lower(),) + tuple(term(t) for t in lit.args)
                    if (atom in static_init) == lit.negated:
                        ok = False
                        break
            if ok:
                total += 1
    return total


def test_two_params_three_objects_nine_actions():
    d = parse_domain(PAIR_DOMAIN)
    p = parse_problem(PAIR_PROBLEM, d)
    task = ground(d, p)
    assert len(task.actions) == 9


def test_serve_water_count_matches_brute_force(bimanual):
    scene, goal, _ = gen_scenario(ScenarioSpec("serve_water", seed=3))
    problem = write_problem_rule(scene, goal, bimanual)
    task = ground(bimanual, problem)
    assert len(task.actions) == brute_force_ground_count(bimanual, problem)


@pytest.mark.parametrize(
    "spec",
    [
        ScenarioSpec("serve_fruit", seed=9),
        ScenarioSpec("stack_block", seed=2, block_total=4, pile_shape=(3, 1)),
    ],
)
def test_other_domains_count_matches_brute_force(bimanual, spec):
    scene, goal, _ = gen_scenario(spec)
    problem = write_problem_rule(scene, goal, bimanual)
    task = ground(bimanual, problem)
    assert len(task.actions) == brute_force_ground_count(bimanual, problem)


def test_grasp_candidates_two_hands_two_cups_three_areas(bimanual):
    # Binding enumeration before any static or reachability filtering.
    problem = parse_problem(
        """
        (define (problem cand) (:domain bimanual)
          (:objects left_hand right_hand - hand
                    left_area right_area overlap_area - area
                    cup_a cup_b - object)
          (:init)
          (:goal (and)))
        """,
        bimanual,
    )
    assert len(enumerate_bindings(bimanual, problem, "grasp")) == 2 * 2 * 3


def test_static_predicates_of_builtin_domain(bimanual):
    statics = static_predicates(bimanual)
    assert {"control", "arm_access", "point_at", "is_graspable",
            "is_accessible", "is_releasable"} <= statics
    assert "is_free" not in statics
    assert "available" not in statics


def test_interning_is_bijective(serve_water_task):
    task = serve_water_task
    assert len(set(task.atoms)) == len(task.atoms)
    for atom, idx in task.atom_ids.items():
        assert task.atoms[idx] == atom


def test_atom_table_dump_format(serve_water_task):
    lines = dump_atom_table(serve_water_task).strip().splitlines()
    assert len(lines) == serve_water_task.n_atoms
    first_id, first_atom = lines[0].split("\t")
    assert first_id == "0" and "(" in first_atom


def test_hand_annotations(bimanual):
    _, _, task, _, _ = make_instance(ScenarioSpec("serve_fruit", seed=1), prune=False)
    singles = {"grasp", "move_to", "release", "push", "pour", "move_above", "place"}
    for act in task.actions:
        if act.name in singles:
            assert len(act.hands) == 1, act
        else:
            assert act.name in ("co_hold", "co_move_to")
            assert act.hands == {"left_hand", "right_hand"}, act


def test_undeclared_constant_in_schema_body_is_grounding_error(bimanual):
    problem = parse_problem(
        """
        (define (problem nohands) (:domain bimanual)
          (:objects left_area right_area overlap_area - area cup - object)
          (:init)
          (:goal (and)))
        """,
        bimanual,
    )
    with pytest.raises(GroundingError) as err:
        ground(bimanual, problem)
    assert "undeclared constant" in str(err.value)


def test_relaxed_unreachable_goal_is_flagged():
    # The only producer of the goal atom is statically inapplicable, so the
    # atom survives grounding as a fluent but is never added.
    d = parse_domain(
        """
        (define (domain pairs)
          (:predicates (linked ?a ?b) (seen ?a))
          (:action link
            :parameters (?a ?b)
            :precondition (and (seen ?a))
            :effect (and (linked ?a ?b))))
        """
    )
    p = parse_problem(
        """
        (define (problem impossible) (:domain pairs)
          (:objects x)
          (:init)
          (:goal (and (linked x x))))
        """,
        d,
    )
    pruned = relaxed_reachability(ground(d, p))
    assert not pruned.goal_relaxed_reachable
    assert "relaxed-unreachable" in pruned.unsolvable_reason


def test_task_with_no_actions_reaches_only_init():
    d = parse_domain("(define (domain still) (:predicates (a) (b)))")
    p = parse_problem(
        "(define (problem s) (:domain still) (:init (a)) (:goal (and (a))))", d
    )
    pruned = relaxed_reachability(ground(d, p))
    assert pruned.goal_relaxed_reachable
    assert pruned.actions == []


def test_pruning_preserves_bfs_plan_length(bimanual):
    scene, goal, _ = gen_scenario(ScenarioSpec("serve_water", seed=5))
    problem = write_problem_rule(scene, goal, bimanual)
    raw = ground(bimanual, problem)
    pruned = relaxed_reachability(raw)
    assert len(pruned.actions) <= len(raw.actions)
    cfg = SearchConfig("bfs", 120)
    res_raw = solve(raw, cfg)
    res_pruned = solve(pruned, cfg)
    assert res_raw.status == res_pruned.status == "solved"
    assert len(res_raw.plan.actions) == len(res_pruned.plan.actions)


def test_static_goal_atom_never_true_marks_unsolvable(bimanual):
    problem = parse_problem(
        """
        (define (problem st) (:domain bimanual)
          (:objects left_hand right_hand - hand
                    left_area right_area overlap_area - area
                    cup - object)
          (:init)
          (:goal (and (is_graspable cup))))
        """,
        bimanual,
    )
    task = ground(bimanual, problem)
    assert task.unsolvable_reason is not None
    res = solve(task, SearchConfig("bfs", 10))
    assert res.status == "unsolvable"
