"""Problem writers: a deterministic rule writer and an external text-generation one.

The rule writer translates a scene directly into a problem; the external
writer sends the domain text, scene and task description to a text-completion
endpoint, extracts the first problem definition from the reply, and re-prompts
with the error message when the reply fails to parse or ground.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass

import requests

from .domain_def import ARM_ACCESS, AREAS, HANDS, LEFT_AREA, RIGHT_AREA
from .grounding import GroundingError, ground
from .model import Domain, Literal, Problem
from .parser import ParseError, parse_problem
from .scenarios import Scene, scene_to_dict

log = logging.getLogger(__name__)


def area_object(area: str) -> str:
    """Map a scene area tag ('left') to its problem object ('left_area')."""
    return f"{area}_area"


def write_problem_rule(scene: Scene, goal: tuple[Literal, ...], domain: Domain) -> Problem:
    """Deterministically translate a scene and goal into a problem.

    The init holds exactly: hand control/availability/rest position, the
    fixed reach relation, one location atom per object plus its flag atoms,
    and one location atom per point plus its flag atoms.
    """
    objects = [(h, "hand") for h in HANDS]
    objects += [(a, "area") for a in AREAS]
    objects += [(o.name, "object") for o in scene.objects]
    objects += [(p.name, "point") for p in scene.points]

    init: list[Literal] = []
    for hand in HANDS:
        init.append(Literal("control", (hand,)))
        init.append(Literal("available", (hand,)))
        init.append(Literal("arm_ready", (hand,)))
    init.append(Literal("arm_at", (HANDS[0], LEFT_AREA)))
    init.append(Literal("arm_at", (HANDS[1], RIGHT_AREA)))
    for hand in HANDS:
        for area in ARM_ACCESS[hand]:
            init.append(Literal("arm_access", (hand, area)))
    for obj in scene.objects:
        init.append(Literal("object_at_area", (obj.name, area_object(obj.area))))
        if obj.graspable:
            init.append(Literal("is_graspable", (obj.name,)))
        if obj.free:
            init.append(Literal("is_free", (obj.name,)))
        if obj.water_filled:
            init.append(Literal("contains_water", (obj.name,)))
    for point in scene.points:
        init.append(Literal("point_at", (point.name, area_object(point.area))))
        if point.accessible:
            init.append(Literal("is_accessible", (point.name,)))
        if point.releasable:
            init.append(Literal("is_releasable", (point.name,)))

    return Problem(
        name="instance",
        domain_name=domain.name,
        objects=tuple(objects),
        init=tuple(init),
        goal=tuple(goal),
    )


# ---------------------------------------------------------------------------
# External writer
# ---------------------------------------------------------------------------

class WriterError(Exception):
    """Base class for external-writer failures; carries the last error message."""


class WriterCredentialError(WriterError):
    pass


class WriterNetworkError(WriterError):
    pass


class WriterRetriesExhausted(WriterError):
    def __init__(self, message: str, round_trips: int):
        super().__init__(message)
        self.round_trips = round_trips


@dataclass
class WriterConfig:
    endpoint: str
    model: str = "default"
    api_key_env: str = "LLM_API_KEY"
    max_retries: int = 3
    request_timeout_s: float = 120.0


@dataclass
class ExternalWriteResult:
    problem: Problem
    round_trips: int


def extract_problem_block(text: str) -> str | None:
    """First balanced ``(define (problem ...))`` s-expression in ``text``."""
    lowered = text.lower()
    pos = 0
    while True:
        start = lowered.find("(define", pos)
        if start < 0:
            return None
        depth = 0
        end = None
        for i in range(start, len(text)):
            if text[i] == "(":
                depth += 1
            elif text[i] == ")":
                depth -= 1
                if depth == 0:
                    end = i + 1
                    break
        if end is not None and "(problem" in lowered[start:end]:
            return text[start:end]
        pos = start + 1


def build_prompt(domain_text: str, scene: Scene, task_text: str, error: str | None) -> str:
    parts = [
        "You are writing a planning problem file for a two-hand robot.",
        "Domain definition:",
        domain_text,
        "Scene description (JSON):",
        json.dumps(scene_to_dict(scene, task_text), indent=2),
        f"Task: {task_text}",
        "Reply with exactly one (define (problem ...)) block compatible with the domain.",
    ]
    if error:
        parts.append(f"Your previous reply failed with this error; fix it:\n{error}")
    return "\n\n".join(parts)


def write_problem_external(
    scene: Scene, task_text: str, domain: Domain, cfg: WriterConfig
) -> ExternalWriteResult:
    """Obtain a problem from a text-generation endpoint, re-prompting on errors.

    Raises ``WriterCredentialError`` when the credential variable is unset,
    ``WriterNetworkError`` on transport failures, and
    ``WriterRetriesExhausted`` once ``max_retries`` re-prompts did not yield a
    problem that parses and grounds.
    """
    from .model import print_domain

    api_key = os.environ.get(cfg.api_key_env)
    if not api_key:
        raise WriterCredentialError(
            f"credential variable '{cfg.api_key_env}' is not set"
        )
    domain_text = print_domain(domain)
    error: str | None = None
    round_trips = 0
    while round_trips <= cfg.max_retries:
        prompt = build_prompt(domain_text, scene, task_text, error)
        try:
            response = requests.post(
                cfg.endpoint,
                json={"model": cfg.model, "prompt": prompt},
                headers={"Authorization": f"Bearer {api_key}"},
                timeout=cfg.request_timeout_s,
            )
            response.raise_for_status()
        except requests.RequestException as exc:
            raise WriterNetworkError(f"endpoint request failed: {exc}") from exc
        round_trips += 1
        block = extract_problem_block(response.text)
        if block is None:
            error = "reply contained no (define (problem ...)) block"
            log.debug("external writer round %d: %s", round_trips, error)
            continue
        try:
            problem = parse_problem(block, domain)
            ground(domain, problem)
        except (ParseError, GroundingError) as exc:
            error = str(exc)
            log.debug("external writer round %d: %s", round_trips, error)
            continue
        return ExternalWriteResult(problem, round_trips)
    raise WriterRetriesExhausted(
        f"no valid problem after {round_trips} round trips; last error: {error}",
        round_trips,
    )
