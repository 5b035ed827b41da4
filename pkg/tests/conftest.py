from __future__ import annotations

import pytest

from bimanual_planner.domain_def import build_domain
from bimanual_planner.grounding import ground, relaxed_reachability
from bimanual_planner.scenarios import ScenarioSpec, gen_scenario
from bimanual_planner.writer import write_problem_rule


@pytest.fixture(scope="session")
def bimanual():
    return build_domain()


def make_instance(spec: ScenarioSpec, prune: bool = True):
    """Scene -> problem -> (pruned) ground task for one seeded instance."""
    domain = build_domain()
    scene, goal, text = gen_scenario(spec)
    problem = write_problem_rule(scene, goal, domain)
    task = ground(domain, problem)
    if prune:
        task = relaxed_reachability(task)
    return domain, problem, task, scene, text


@pytest.fixture()
def serve_water_task():
    _, _, task, _, _ = make_instance(ScenarioSpec("serve_water", seed=0))
    return task
