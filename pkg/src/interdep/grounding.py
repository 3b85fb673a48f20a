"""Symbolic grounding: world states as proposition sets, steps as planning actions.

A grounded proposition is a binary fact about the kitchen, drawn from a
closed vocabulary (what sits on each counter, each pot's fill level and
phase, what each cook holds, soups delivered so far). A transition becomes
a planning-style action with a precondition set, an add set and a delete
set over those propositions, tagged with the subtask the interact resolved
to.

Propositions split into shared fluents, observable surfaces both cooks act
through (counters, pots), and private fluents (held items, the delivery
tally) that can never link one cook's action to the other's.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import gridworld as gw
from .errors import InconsistentTransition
from .gridworld import (
    GET_SOUP_POT,
    MOVE,
    NOOP,
    PICKUP_DISH_COUNTER,
    PICKUP_DISH_DISPENSER,
    PICKUP_ONION_COUNTER,
    PICKUP_ONION_DISPENSER,
    PICKUP_SOUP_COUNTER,
    PLACE_DISH_COUNTER,
    PLACE_ONION_COUNTER,
    PLACE_ONION_POT,
    PLACE_SOUP_COUNTER,
    SERVE_SOUP,
    Item,
    PotPhase,
    PrimitiveAction,
    WorldState,
)

SHARED_PREDICATES = frozenset(
    {
        "onion-on-counter",
        "dish-on-counter",
        "soup-on-counter",
        "counter-empty",
        "pot-contains",
        "soup-cooking",
        "soup-ready",
    }
)
PRIVATE_PREDICATES = frozenset({"holding", "soups-delivered"})

# Argument signature per predicate, as python types in order.
PREDICATE_SIGNATURES: dict[str, tuple[type, ...]] = {
    "onion-on-counter": (int, int),
    "dish-on-counter": (int, int),
    "soup-on-counter": (int, int),
    "counter-empty": (int, int),
    "pot-contains": (int, int),
    "soup-cooking": (int,),
    "soup-ready": (int,),
    "holding": (int, str),
    "soups-delivered": (int,),
}

_ITEM_NAMES = frozenset(item.value for item in Item)


@dataclass(frozen=True)
class Proposition:
    """One grounded binary fact, e.g. onion-on-counter(4,2)."""

    predicate: str
    args: tuple

    def __post_init__(self) -> None:
        sig = PREDICATE_SIGNATURES.get(self.predicate)
        if sig is None:
            raise ValueError(f"unknown predicate {self.predicate!r}")
        if len(self.args) != len(sig) or any(
            not isinstance(a, t) or isinstance(a, bool)
            for a, t in zip(self.args, sig)
        ):
            raise ValueError(
                f"bad arguments {self.args!r} for predicate {self.predicate!r}"
            )
        if self.predicate == "holding":
            agent, item = self.args
            if agent not in (1, 2) or item not in _ITEM_NAMES:
                raise ValueError(f"bad holding arguments {self.args!r}")

    @property
    def shared(self) -> bool:
        return self.predicate in SHARED_PREDICATES

    def canonical(self) -> str:
        return f"{self.predicate}({','.join(str(a) for a in self.args)})"

    def __str__(self) -> str:  # pragma: no cover - convenience
        return self.canonical()


def prop(predicate: str, *args) -> Proposition:
    return Proposition(predicate, tuple(args))


def sort_props(props) -> tuple[Proposition, ...]:
    """Canonical deterministic ordering for any proposition collection."""
    return tuple(sorted(props, key=Proposition.canonical))


def shared_only(props: frozenset) -> frozenset:
    return frozenset(p for p in props if p.shared)


def ground_state(state: WorldState) -> frozenset:
    """The set of all propositions true in a world state.

    Per counter exactly one of {onion,dish,soup}-on-counter / counter-empty;
    per pot one pot-contains(p,n) plus the phase fluent if cooking or ready;
    one holding(i,item) per cook; one soups-delivered(k).
    """
    props: set[Proposition] = set()
    for cell in state.layout.counter_cells:
        item = state.counters.get(cell)
        if item is None:
            props.add(prop("counter-empty", cell[0], cell[1]))
        else:
            props.add(prop(f"{item.value}-on-counter", cell[0], cell[1]))
    for idx, pot in enumerate(state.pots):
        props.add(prop("pot-contains", idx, pot.onion_count))
        if pot.phase is PotPhase.COOKING:
            props.add(prop("soup-cooking", idx))
        elif pot.phase is PotPhase.READY:
            props.add(prop("soup-ready", idx))
    for player in state.players:
        props.add(prop("holding", player.agent_id, player.held.value))
    props.add(prop("soups-delivered", state.soups_delivered))
    return frozenset(props)


@dataclass(frozen=True)
class SymbolicAction:
    """One cook's executed step as a grounded planning action."""

    agent: int
    t: int
    subtask: str
    pre: frozenset
    add: frozenset
    delete: frozenset

    def shared_pre(self) -> frozenset:
        return shared_only(self.pre)

    def shared_add(self) -> frozenset:
        return shared_only(self.add)

    def shared_delete(self) -> frozenset:
        return shared_only(self.delete)


def resolve_subtask(state: WorldState, action: PrimitiveAction, agent: int) -> str:
    """The subtask this primitive action resolves to in this state."""
    if action in gw.MOVE_DIRECTION:
        return MOVE
    if action is PrimitiveAction.STAY:
        return NOOP
    subtask, *_ = gw._resolve_interact(state, agent)
    return subtask


def _grounded_sets(
    state: WorldState, agent: int, subtask: str
) -> tuple[frozenset, frozenset, frozenset]:
    """Minimal pre/add/del proposition sets for a subtask taken in `state`."""
    if subtask in (MOVE, NOOP):
        empty = frozenset()
        return empty, empty, empty

    me = state.player(agent)
    cx, cy = me.facing_cell()
    holding = lambda item: prop("holding", agent, item)  # noqa: E731

    if subtask == PICKUP_ONION_DISPENSER:
        return (
            frozenset({holding("nothing")}),
            frozenset({holding("onion")}),
            frozenset({holding("nothing")}),
        )
    if subtask == PICKUP_DISH_DISPENSER:
        return (
            frozenset({holding("nothing")}),
            frozenset({holding("dish")}),
            frozenset({holding("nothing")}),
        )
    if subtask in (PICKUP_ONION_COUNTER, PICKUP_DISH_COUNTER, PICKUP_SOUP_COUNTER):
        item = subtask.split("-")[1]
        return (
            frozenset({holding("nothing"), prop(f"{item}-on-counter", cx, cy)}),
            frozenset({holding(item), prop("counter-empty", cx, cy)}),
            frozenset({holding("nothing"), prop(f"{item}-on-counter", cx, cy)}),
        )
    if subtask in (PLACE_ONION_COUNTER, PLACE_DISH_COUNTER, PLACE_SOUP_COUNTER):
        item = subtask.split("-")[1]
        return (
            frozenset({holding(item), prop("counter-empty", cx, cy)}),
            frozenset({holding("nothing"), prop(f"{item}-on-counter", cx, cy)}),
            frozenset({holding(item), prop("counter-empty", cx, cy)}),
        )
    if subtask == PLACE_ONION_POT:
        idx = state.pot_index_at((cx, cy))
        assert idx is not None
        n = state.pots[idx].onion_count
        add = {holding("nothing"), prop("pot-contains", idx, n + 1)}
        if n + 1 == state.config.onions_per_soup:
            # The pot starts cooking now; readiness arrives cook_time ticks
            # later but belongs to this action, which is what set it in
            # motion. This is the one add proposition not yet true in the
            # successor state.
            add.add(prop("soup-cooking", idx))
            add.add(prop("soup-ready", idx))
        return (
            frozenset({holding("onion"), prop("pot-contains", idx, n)}),
            frozenset(add),
            frozenset({holding("onion"), prop("pot-contains", idx, n)}),
        )
    if subtask == GET_SOUP_POT:
        idx = state.pot_index_at((cx, cy))
        assert idx is not None
        n = state.pots[idx].onion_count
        return (
            frozenset({holding("dish"), prop("soup-ready", idx)}),
            frozenset({holding("soup"), prop("pot-contains", idx, 0)}),
            frozenset(
                {holding("dish"), prop("soup-ready", idx), prop("pot-contains", idx, n)}
            ),
        )
    if subtask == SERVE_SOUP:
        k = state.soups_delivered
        return (
            frozenset({holding("soup")}),
            frozenset({holding("nothing"), prop("soups-delivered", k + 1)}),
            frozenset({holding("soup"), prop("soups-delivered", k)}),
        )
    raise ValueError(f"unknown subtask {subtask!r}")


def extract_symbolic_action(
    state: WorldState,
    action: PrimitiveAction,
    agent: int,
    next_state: Optional[WorldState] = None,
) -> SymbolicAction:
    """Ground one transition into a planning action.

    When `next_state` is given it is checked against the simulator's own
    successor; a mismatch raises InconsistentTransition. Movement and no-op
    steps yield empty proposition sets.
    """
    if next_state is not None:
        computed, _, _ = gw.step(state, gw.single_action(agent, action))
        if computed != next_state:
            raise InconsistentTransition(
                f"state at t={state.t + 1} does not follow from agent {agent} "
                f"taking {action.value} at t={state.t}"
            )
    subtask = resolve_subtask(state, action, agent)
    pre, add, delete = _grounded_sets(state, agent, subtask)
    return SymbolicAction(
        agent=agent, t=state.t, subtask=subtask, pre=pre, add=add, delete=delete
    )


# Predicate-level pre/add/del templates per subtask. These drive the static
# derivation of which fluents can link two cooks' actions, and the schema
# dump. place-onion-pot lists soup-cooking and soup-ready because its final
# placement starts the cook and owns the eventual readiness.
SUBTASK_TEMPLATES: dict[str, dict[str, frozenset]] = {
    PICKUP_ONION_DISPENSER: {
        "pre": frozenset({"holding"}),
        "add": frozenset({"holding"}),
        "del": frozenset({"holding"}),
    },
    PICKUP_ONION_COUNTER: {
        "pre": frozenset({"holding", "onion-on-counter"}),
        "add": frozenset({"holding", "counter-empty"}),
        "del": frozenset({"holding", "onion-on-counter"}),
    },
    PICKUP_DISH_DISPENSER: {
        "pre": frozenset({"holding"}),
        "add": frozenset({"holding"}),
        "del": frozenset({"holding"}),
    },
    PICKUP_DISH_COUNTER: {
        "pre": frozenset({"holding", "dish-on-counter"}),
        "add": frozenset({"holding", "counter-empty"}),
        "del": frozenset({"holding", "dish-on-counter"}),
    },
    PICKUP_SOUP_COUNTER: {
        "pre": frozenset({"holding", "soup-on-counter"}),
        "add": frozenset({"holding", "counter-empty"}),
        "del": frozenset({"holding", "soup-on-counter"}),
    },
    PLACE_ONION_POT: {
        "pre": frozenset({"holding", "pot-contains"}),
        "add": frozenset({"holding", "pot-contains", "soup-cooking", "soup-ready"}),
        "del": frozenset({"holding", "pot-contains"}),
    },
    PLACE_ONION_COUNTER: {
        "pre": frozenset({"holding", "counter-empty"}),
        "add": frozenset({"holding", "onion-on-counter"}),
        "del": frozenset({"holding", "counter-empty"}),
    },
    PLACE_DISH_COUNTER: {
        "pre": frozenset({"holding", "counter-empty"}),
        "add": frozenset({"holding", "dish-on-counter"}),
        "del": frozenset({"holding", "counter-empty"}),
    },
    PLACE_SOUP_COUNTER: {
        "pre": frozenset({"holding", "counter-empty"}),
        "add": frozenset({"holding", "soup-on-counter"}),
        "del": frozenset({"holding", "counter-empty"}),
    },
    GET_SOUP_POT: {
        "pre": frozenset({"holding", "soup-ready"}),
        "add": frozenset({"holding", "pot-contains"}),
        "del": frozenset({"holding", "soup-ready", "pot-contains"}),
    },
    SERVE_SOUP: {
        "pre": frozenset({"holding"}),
        "add": frozenset({"holding", "soups-delivered"}),
        "del": frozenset({"holding", "soups-delivered"}),
    },
    MOVE: {"pre": frozenset(), "add": frozenset(), "del": frozenset()},
    NOOP: {"pre": frozenset(), "add": frozenset(), "del": frozenset()},
}


def vocabulary_dump() -> dict:
    """JSON-ready description of the predicate vocabulary and templates."""
    return {
        "predicates": {
            "shared": sorted(SHARED_PREDICATES),
            "private": sorted(PRIVATE_PREDICATES),
            "signatures": {
                name: [t.__name__ for t in sig]
                for name, sig in sorted(PREDICATE_SIGNATURES.items())
            },
        },
        "subtasks": {
            name: {
                "pre": sorted(tmpl["pre"]),
                "add": sorted(tmpl["add"]),
                "del": sorted(tmpl["del"]),
            }
            for name, tmpl in sorted(SUBTASK_TEMPLATES.items())
        },
    }
