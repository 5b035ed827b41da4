"""Seeded scenario generators for the three task families and scene file IO.

Every placement is drawn from its own sub-stream of the instance seed (one
per decision, in declaration order), so scenes, goals and task texts are a
pure function of the spec and stay stable when unrelated decisions are added.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

from .model import Literal
from .rng import substream

TASK_SERVE_WATER = "serve_water"
TASK_SERVE_FRUIT = "serve_fruit"
TASK_STACK_BLOCK = "stack_block"
TASKS = (TASK_SERVE_WATER, TASK_SERVE_FRUIT, TASK_STACK_BLOCK)

AREA_NAMES = ("left", "right", "overlap")

PILE_SHAPES = {
    4: ((2, 2), (3, 1), (4, 0)),
    5: ((2, 3), (4, 1), (5, 0)),
}

# Fixed color pool; the first block_total colors are used.
BLOCK_COLORS = ("red", "green", "blue", "yellow", "purple", "black")

SERVE_POINTS = {area: f"serve_point_{area}" for area in AREA_NAMES}
STORE_POINT = "store_point"


@dataclass(frozen=True)
class SceneObject:
    name: str
    kind: str  # cup | box | fruit | bowl | block | tray
    area: str  # left | right | overlap
    graspable: bool = True
    free: bool = True
    water_filled: bool = False


@dataclass(frozen=True)
class ScenePoint:
    name: str
    area: str
    accessible: bool = True
    releasable: bool = True


@dataclass(frozen=True)
class Scene:
    objects: tuple[SceneObject, ...]
    points: tuple[ScenePoint, ...]
    human_area: str


@dataclass(frozen=True)
class ScenarioSpec:
    task: str
    seed: int = 0
    block_total: int | None = None
    pile_shape: tuple[int, int] | None = None

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"unknown task '{self.task}' (expected one of {TASKS})")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.task == TASK_STACK_BLOCK:
            if self.block_total not in PILE_SHAPES:
                raise ValueError(
                    f"block_total must be one of {sorted(PILE_SHAPES)}, got {self.block_total}"
                )
            shapes = PILE_SHAPES[self.block_total]
            if tuple(self.pile_shape or ()) not in shapes:
                raise ValueError(
                    f"pile_shape {self.pile_shape} invalid for {self.block_total} blocks; "
                    f"expected one of {list(shapes)}"
                )
        else:
            if self.block_total is not None or self.pile_shape is not None:
                raise ValueError(f"block_total/pile_shape only apply to {TASK_STACK_BLOCK}")

    def label(self) -> str:
        if self.task == TASK_STACK_BLOCK:
            a, b = self.pile_shape
            return f"{self.task}-{self.block_total}-({a},{b})"
        return self.task


def _serve_points() -> tuple[ScenePoint, ...]:
    return tuple(ScenePoint(SERVE_POINTS[a], a) for a in AREA_NAMES)


def gen_scenario(spec: ScenarioSpec) -> tuple[Scene, tuple[Literal, ...], str]:
    """Deterministically generate (scene, goal conjunction, task text) for ``spec``."""
    seed = spec.seed
    if spec.task == TASK_SERVE_WATER:
        yellow_area = substream(seed, 0).choice(AREA_NAMES)
        blue_area = substream(seed, 1).choice(AREA_NAMES)
        box_area = substream(seed, 2).choice(("left", "right"))
        human_area = substream(seed, 3).choice(AREA_NAMES)
        scene = Scene(
            objects=(
                SceneObject("yellow_cup", "cup", yellow_area),
                SceneObject("blue_cup", "cup", blue_area, water_filled=True),
                SceneObject("brown_box", "box", box_area, graspable=False, free=False),
            ),
            points=_serve_points() + (ScenePoint(STORE_POINT, box_area),),
            human_area=human_area,
        )
        text = (
            f"The task is to serve the water in the yellow cup to the human "
            f"in front of the {human_area} area, while putting the blue cup "
            f"to the store point on the brown box."
        )
    elif spec.task == TASK_SERVE_FRUIT:
        banana_area = substream(seed, 0).choice(AREA_NAMES)
        apple_area = substream(seed, 1).choice(AREA_NAMES)
        bowl_area = substream(seed, 2).choice(AREA_NAMES)
        scene = Scene(
            objects=(
                SceneObject("banana", "fruit", banana_area),
                SceneObject("apple", "fruit", apple_area),
                SceneObject("red_bowl", "bowl", bowl_area, graspable=False),
            ),
            points=_serve_points(),
            human_area="overlap",
        )
        text = (
            "The task is to serve the banana and the apple with the red bowl "
            "to the human in front of the overlap area."
        )
    else:
        n = spec.block_total
        colors = BLOCK_COLORS[:n]
        block_areas = [substream(seed, i).choice(AREA_NAMES) for i in range(n)]
        human_area = substream(seed, n).choice(AREA_NAMES)
        shuffled = substream(seed, n + 1).shuffled(colors)
        p1, p2 = spec.pile_shape
        piles = [shuffled[:p1]] + ([shuffled[p1:]] if p2 else [])
        objects = tuple(
            SceneObject(f"{c}_block", "block", block_areas[i])
            for i, c in enumerate(colors)
        ) + (SceneObject("tray", "tray", human_area, graspable=False, free=False),)
        scene = Scene(objects=objects, points=(), human_area=human_area)
        number = {4: "four", 5: "five"}[n]
        pile_texts = [" over ".join(p) for p in piles]
        if len(piles) == 1:
            text = (
                f"The task is to stack the selected {number} blocks in one pile "
                f"on the tray right in front of the human, where the pile is "
                f"{pile_texts[0]}."
            )
        else:
            text = (
                f"The task is to stack the selected {number} blocks in two piles "
                f"on the tray right in front of the human, where one pile is "
                f"{pile_texts[0]} and one pile is {pile_texts[1]}."
            )
    return scene, goal_from_task_text(scene, text), text


def goal_from_task_text(scene: Scene, task_text: str) -> tuple[Literal, ...]:
    """Derive the goal conjunction a task text asks for, given the scene.

    This is the deterministic stand-in for reading the natural-language goal:
    serve goals are templated, stacking order is parsed out of the text.
    """
    kinds = {o.kind for o in scene.objects}
    if "cup" in kinds:
        serve = SERVE_POINTS[scene.human_area]
        return (
            Literal("object_at_point", ("yellow_cup", serve)),
            Literal("is_free", ("yellow_cup",)),
            Literal("contains_water", ("yellow_cup",)),
            Literal("object_at_point", ("blue_cup", STORE_POINT)),
            Literal("is_free", ("blue_cup",)),
        )
    if "bowl" in kinds:
        return (
            Literal("on", ("banana", "red_bowl")),
            Literal("on", ("apple", "red_bowl")),
            Literal("object_at_point", ("red_bowl", SERVE_POINTS["overlap"])),
        )
    if "block" in kinds:
        match = re.search(
            r"one pile is ([a-z ]+?) and one pile is ([a-z ]+?)\.", task_text
        )
        if match:
            piles = [match.group(1), match.group(2)]
        else:
            single = re.search(r"the pile is ([a-z ]+?)\.", task_text)
            if not single:
                raise ValueError(f"cannot parse pile structure from: {task_text!r}")
            piles = [single.group(1)]
        goal: list[Literal] = []
        for pile in piles:
            colors = [c.strip() for c in pile.split(" over ")]
            blocks = [f"{c}_block" for c in reversed(colors)]  # bottom first
            below = "tray"
            for b in blocks:
                goal.append(Literal("on", (b, below)))
                below = b
        return tuple(goal)
    raise ValueError("scene does not correspond to a known task family")


# ---------------------------------------------------------------------------
# Scene files
# ---------------------------------------------------------------------------

def scene_to_dict(scene: Scene, task_text: str) -> dict:
    return {
        "objects": [
            {
                "name": o.name,
                "kind": o.kind,
                "area": o.area,
                "graspable": o.graspable,
                "free": o.free,
                "water_filled": o.water_filled,
            }
            for o in scene.objects
        ],
        "points": [
            {
                "name": p.name,
                "area": p.area,
                "accessible": p.accessible,
                "releasable": p.releasable,
            }
            for p in scene.points
        ],
        "human_area": scene.human_area,
        "task_text": task_text,
    }


def scene_from_dict(data: dict) -> tuple[Scene, str]:
    objects = tuple(
        SceneObject(
            o["name"],
            o["kind"],
            o["area"],
            bool(o.get("graspable", True)),
            bool(o.get("free", True)),
            bool(o.get("water_filled", False)),
        )
        for o in data.get("objects", [])
    )
    points = tuple(
        ScenePoint(
            p["name"],
            p["area"],
            bool(p.get("accessible", True)),
            bool(p.get("releasable", True)),
        )
        for p in data.get("points", [])
    )
    for item in objects + points:
        if item.area not in AREA_NAMES:
            raise ValueError(f"unknown area '{item.area}' for '{item.name}'")
    human = data.get("human_area", "overlap")
    if human not in AREA_NAMES:
        raise ValueError(f"unknown human_area '{human}'")
    return Scene(objects, points, human), data.get("task_text", "")


def save_scene(path: str | Path, scene: Scene, task_text: str) -> None:
    Path(path).write_text(json.dumps(scene_to_dict(scene, task_text), indent=2) + "\n")


def load_scene(path: str | Path) -> tuple[Scene, str]:
    return scene_from_dict(json.loads(Path(path).read_text()))
