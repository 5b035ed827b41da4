"""The fixed two-hand manipulation domain.

Objects are typed hand/area/object/point.  The table surface splits into a
left and a right area, each reachable by one hand only, and an overlap area
reachable by both; cooperation happens there.  Seven single-hand skills and
two joint skills cover grasping, carrying, releasing, pushing, pouring and
stacking.  Joint skills take no hand parameter: they require both hands to be
available and bind both hand resources.

Some position facts (``arm_at``, ``is_above``, ``on``, ``object_at_point``)
accumulate rather than being deleted when superseded; every skill that
depends on an object's position re-verifies it through ``object_at_area`` or
freshness flags, so stale facts can only make plans longer, never unsound.
"""

from __future__ import annotations

from .model import (
    ActionSchema,
    AgentAnnotation,
    Domain,
    EqualityConstraint,
    Literal,
    PredicateSchema,
    TypeName,
)

DOMAIN_NAME = "bimanual"

LEFT_HAND = "left_hand"
RIGHT_HAND = "right_hand"
HANDS = (LEFT_HAND, RIGHT_HAND)

LEFT_AREA = "left_area"
RIGHT_AREA = "right_area"
OVERLAP_AREA = "overlap_area"
AREAS = (LEFT_AREA, RIGHT_AREA, OVERLAP_AREA)

# Which areas each hand can reach.
ARM_ACCESS = {
    LEFT_HAND: (LEFT_AREA, OVERLAP_AREA),
    RIGHT_HAND: (RIGHT_AREA, OVERLAP_AREA),
}

SINGLE = AgentAnnotation("single", 0)
JOINT = AgentAnnotation("joint")


def _lit(pred: str, *args: str) -> Literal:
    return Literal(pred, tuple(args))


def build_domain() -> Domain:
    """Construct the two-hand manipulation domain model."""
    types = (
        TypeName("hand"),
        TypeName("area"),
        TypeName("object"),
        TypeName("point"),
    )
    predicates = (
        PredicateSchema("control", (("?h", "hand"),)),
        PredicateSchema("available", (("?h", "hand"),)),
        PredicateSchema("is_graspable", (("?o", "object"),)),
        PredicateSchema("is_free", (("?o", "object"),)),
        PredicateSchema("is_releasable", (("?p", "point"),)),
        PredicateSchema("is_accessible", (("?p", "point"),)),
        PredicateSchema("arm_at", (("?h", "hand"), ("?a", "area"))),
        PredicateSchema("arm_access", (("?h", "hand"), ("?a", "area"))),
        PredicateSchema("lifting", (("?o", "object"), ("?h", "hand"))),
        PredicateSchema("object_at_area", (("?o", "object"), ("?a", "area"))),
        PredicateSchema("object_at_point", (("?o", "object"), ("?p", "point"))),
        PredicateSchema("point_at", (("?p", "point"), ("?a", "area"))),
        # Auxiliary state the base predicate set cannot express:
        PredicateSchema("contains_water", (("?o", "object"),)),
        PredicateSchema("poured", (("?o", "object"),)),
        PredicateSchema("is_above", (("?o1", "object"), ("?o2", "object"))),
        PredicateSchema("on", (("?o1", "object"), ("?o2", "object"))),
        PredicateSchema("held_jointly", (("?o", "object"),)),
        # Per-hand alignment bookkeeping: arm_ready is a token consumed when the
        # arm commits to a point or target alignment and restored when the
        # carry resolves (release, place, pour); arm_at_point records which
        # point the arm is currently aligned over.  Together they keep "where
        # is the carried object" unambiguous in STRIPS.
        PredicateSchema("arm_ready", (("?h", "hand"),)),
        PredicateSchema("arm_at_point", (("?h", "hand"), ("?p", "point"))),
    )

    grasp = ActionSchema(
        "grasp",
        params=(("?h", "hand"), ("?o", "object"), ("?a", "area")),
        precondition=(
            _lit("control", "?h"),
            _lit("available", "?h"),
            _lit("is_graspable", "?o"),
            _lit("is_free", "?o"),
            _lit("object_at_area", "?o", "?a"),
            _lit("arm_access", "?h", "?a"),
        ),
        add_effects=(_lit("lifting", "?o", "?h"), _lit("arm_at", "?h", "?a")),
        del_effects=(
            _lit("available", "?h"),
            _lit("object_at_area", "?o", "?a"),
            _lit("is_free", "?o"),
        ),
        agent=SINGLE,
    )

    move_to = ActionSchema(
        "move_to",
        params=(("?h", "hand"), ("?o", "object"), ("?p", "point"), ("?a", "area")),
        precondition=(
            _lit("control", "?h"),
            _lit("lifting", "?o", "?h"),
            _lit("arm_ready", "?h"),
            _lit("point_at", "?p", "?a"),
            _lit("is_accessible", "?p"),
            _lit("arm_access", "?h", "?a"),
        ),
        add_effects=(
            _lit("arm_at_point", "?h", "?p"),
            _lit("object_at_area", "?o", "?a"),
            _lit("arm_at", "?h", "?a"),
        ),
        del_effects=(_lit("arm_ready", "?h"),),
        agent=SINGLE,
    )

    release = ActionSchema(
        "release",
        params=(("?h", "hand"), ("?o", "object"), ("?p", "point"), ("?a", "area")),
        precondition=(
            _lit("control", "?h"),
            _lit("lifting", "?o", "?h"),
            _lit("arm_at_point", "?h", "?p"),
            _lit("is_releasable", "?p"),
            _lit("point_at", "?p", "?a"),
            _lit("arm_access", "?h", "?a"),
        ),
        add_effects=(
            _lit("object_at_point", "?o", "?p"),
            _lit("available", "?h"),
            _lit("is_free", "?o"),
            _lit("arm_ready", "?h"),
        ),
        del_effects=(
            _lit("lifting", "?o", "?h"),
            _lit("arm_at_point", "?h", "?p"),
        ),
        agent=SINGLE,
    )

    push = ActionSchema(
        "push",
        params=(("?h", "hand"), ("?o", "object"), ("?ta", "area"), ("?sa", "area")),
        precondition=(
            _lit("control", "?h"),
            _lit("available", "?h"),
            _lit("is_free", "?o"),
            _lit("object_at_area", "?o", "?sa"),
            _lit("arm_access", "?h", "?sa"),
            _lit("arm_access", "?h", "?ta"),
        ),
        equalities=(EqualityConstraint("?sa", "?ta", negated=True),),
        add_effects=(_lit("object_at_area", "?o", "?ta"), _lit("arm_at", "?h", "?ta")),
        del_effects=(_lit("object_at_area", "?o", "?sa"),),
        agent=SINGLE,
    )

    # Pouring requires the source to be held above a target that is itself
    # settled (is_free): a target that has been grasped or moved away cannot
    # be poured into, which keeps pour ordered against target motion.
    pour = ActionSchema(
        "pour",
        params=(("?h", "hand"), ("?src", "object"), ("?tgt", "object")),
        precondition=(
            _lit("control", "?h"),
            _lit("lifting", "?src", "?h"),
            _lit("is_above", "?src", "?tgt"),
            _lit("contains_water", "?src"),
            _lit("is_free", "?tgt"),
        ),
        equalities=(EqualityConstraint("?src", "?tgt", negated=True),),
        add_effects=(
            _lit("contains_water", "?tgt"),
            _lit("poured", "?src"),
            _lit("arm_ready", "?h"),
        ),
        del_effects=(_lit("contains_water", "?src"),),
        agent=SINGLE,
    )

    move_above = ActionSchema(
        "move_above",
        params=(("?h", "hand"), ("?src", "object"), ("?tgt", "object"), ("?a", "area")),
        precondition=(
            _lit("control", "?h"),
            _lit("lifting", "?src", "?h"),
            _lit("arm_ready", "?h"),
            _lit("object_at_area", "?tgt", "?a"),
            _lit("arm_access", "?h", "?a"),
        ),
        equalities=(EqualityConstraint("?src", "?tgt", negated=True),),
        add_effects=(_lit("is_above", "?src", "?tgt"), _lit("arm_at", "?h", "?a")),
        del_effects=(_lit("arm_ready", "?h"),),
        agent=SINGLE,
    )

    # Placing consumes the target's freshness (nothing can later be stacked on
    # or grasp the covered target) but does not require it, so containers such
    # as the bowl or the tray accept several items while pile chains are still
    # forced to build bottom-up.
    place = ActionSchema(
        "place",
        params=(("?h", "hand"), ("?src", "object"), ("?tgt", "object"), ("?a", "area")),
        precondition=(
            _lit("control", "?h"),
            _lit("lifting", "?src", "?h"),
            _lit("is_above", "?src", "?tgt"),
            _lit("object_at_area", "?tgt", "?a"),
            _lit("arm_access", "?h", "?a"),
        ),
        equalities=(EqualityConstraint("?src", "?tgt", negated=True),),
        add_effects=(
            _lit("on", "?src", "?tgt"),
            _lit("object_at_area", "?src", "?a"),
            _lit("is_free", "?src"),
            _lit("available", "?h"),
            _lit("arm_ready", "?h"),
        ),
        del_effects=(
            _lit("lifting", "?src", "?h"),
            _lit("is_above", "?src", "?tgt"),
            _lit("is_free", "?tgt"),
        ),
        agent=SINGLE,
    )

    # Joint skills carry no hand parameter; they name both hands directly and
    # require both to be available.  Symmetric two-hand manipulation is only
    # possible in the overlap area, and only for objects a single hand cannot
    # grasp (the big bowl), so small items never tie up both hands.
    co_hold = ActionSchema(
        "co_hold",
        params=(("?o", "object"),),
        precondition=(
            _lit("available", LEFT_HAND),
            _lit("available", RIGHT_HAND),
            Literal("is_graspable", ("?o",), negated=True),
            _lit("object_at_area", "?o", OVERLAP_AREA),
        ),
        add_effects=(_lit("held_jointly", "?o"),),
        del_effects=(
            _lit("available", LEFT_HAND),
            _lit("available", RIGHT_HAND),
            _lit("is_free", "?o"),
        ),
        agent=JOINT,
    )

    co_move_to = ActionSchema(
        "co_move_to",
        params=(("?o", "object"), ("?p", "point")),
        precondition=(
            _lit("held_jointly", "?o"),
            _lit("point_at", "?p", OVERLAP_AREA),
            _lit("is_accessible", "?p"),
            _lit("is_releasable", "?p"),
        ),
        add_effects=(
            _lit("object_at_point", "?o", "?p"),
            _lit("available", LEFT_HAND),
            _lit("available", RIGHT_HAND),
            _lit("is_free", "?o"),
        ),
        del_effects=(_lit("held_jointly", "?o"),),
        agent=JOINT,
    )

    return Domain(
        DOMAIN_NAME,
        types,
        predicates,
        (grasp, move_to, release, push, pour, move_above, place, co_hold, co_move_to),
    )
