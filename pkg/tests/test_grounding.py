"""Grounding: state propositions and per-step planning actions."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import MINI_LAYOUT, advance, turns
from interdep import (
    EpisodeConfig,
    InconsistentTransition,
    PrimitiveAction,
    extract_symbolic_action,
    ground_state,
    initial_state,
    is_terminal,
    load_layout,
    single_action,
    step,
)
from interdep.gridworld import (
    GET_SOUP_POT,
    MOVE,
    NOOP,
    PICKUP_ONION_COUNTER,
    PICKUP_ONION_DISPENSER,
    PLACE_ONION_COUNTER,
    PLACE_ONION_POT,
    SERVE_SOUP,
    ALL_SUBTASKS,
)
from interdep.grounding import (
    PREDICATE_SIGNATURES,
    PRIVATE_PREDICATES,
    SHARED_PREDICATES,
    SUBTASK_TEMPLATES,
    Proposition,
    prop,
    resolve_subtask,
    sort_props,
    vocabulary_dump,
)

A = PrimitiveAction
ONE_ONION = [A.LEFT, A.INTERACT, A.RIGHT, A.UP, A.INTERACT]


@pytest.fixture
def mini_state(mini_layout):
    return initial_state(mini_layout, EpisodeConfig(cook_time=3))


def test_proposition_validation():
    with pytest.raises(ValueError):
        prop("no-such-predicate", 1)
    with pytest.raises(ValueError):
        prop("soup-ready")  # arity 1
    with pytest.raises(ValueError):
        prop("counter-empty", 1.5, 2)
    with pytest.raises(ValueError):
        prop("counter-empty", True, 2)  # bools are not cell coordinates
    with pytest.raises(ValueError):
        prop("holding", 3, "onion")
    with pytest.raises(ValueError):
        prop("holding", 1, "stone")


def test_canonical_form_and_sorting():
    a = prop("onion-on-counter", 4, 2)
    assert a.canonical() == "onion-on-counter(4,2)"
    props = [prop("soup-ready", 1), prop("counter-empty", 1, 2), a]
    assert [p.canonical() for p in sort_props(props)] == sorted(
        p.canonical() for p in props
    )


def test_shared_versus_private():
    assert prop("onion-on-counter", 1, 2).shared
    assert not prop("holding", 1, "onion").shared
    assert not prop("soups-delivered", 0).shared
    assert SHARED_PREDICATES.isdisjoint(PRIVATE_PREDICATES)
    assert set(PREDICATE_SIGNATURES) == SHARED_PREDICATES | PRIVATE_PREDICATES


def test_ground_initial_state(mini_state):
    props = ground_state(mini_state)
    assert prop("counter-empty", 1, 2) in props
    assert prop("pot-contains", 0, 0) in props
    assert prop("holding", 1, "nothing") in props
    assert prop("holding", 2, "nothing") in props
    assert prop("soups-delivered", 0) in props
    assert not any(p.predicate in ("soup-cooking", "soup-ready") for p in props)


def test_exactly_one_fluent_per_counter(mini_state):
    state, _ = advance(
        mini_state, turns([A.LEFT, A.INTERACT, A.DOWN, A.INTERACT])
    )
    # onion now parked on the counter below agent 1's spawn
    props = ground_state(state)
    on_counter = [
        p
        for p in props
        if p.predicate.endswith("-on-counter") or p.predicate == "counter-empty"
    ]
    cells = [p.args for p in on_counter]
    assert sorted(cells) == sorted(
        (c[0], c[1]) for c in state.layout.counter_cells
    )
    assert prop("onion-on-counter", 1, 2) in props


def test_move_and_noop_have_empty_sets(mini_state):
    sym = extract_symbolic_action(mini_state, A.RIGHT, 1)
    assert sym.subtask == MOVE
    assert sym.pre == sym.add == sym.delete == frozenset()
    sym = extract_symbolic_action(mini_state, A.STAY, 1)
    assert sym.subtask == NOOP
    assert sym.pre == sym.add == sym.delete == frozenset()


def test_failed_interact_is_noop(mini_state):
    # facing open floor, interact resolves to no subtask at all
    state, _ = advance(mini_state, [(1, A.RIGHT)])
    sym = extract_symbolic_action(state, A.INTERACT, 1)
    assert sym.subtask == NOOP


def test_pickup_onion_dispenser_sets(mini_state):
    state, _ = advance(mini_state, [(1, A.LEFT)])
    sym = extract_symbolic_action(state, A.INTERACT, 1)
    assert sym.subtask == PICKUP_ONION_DISPENSER
    assert sym.pre == frozenset({prop("holding", 1, "nothing")})
    assert sym.add == frozenset({prop("holding", 1, "onion")})
    assert sym.delete == frozenset({prop("holding", 1, "nothing")})


def test_place_onion_pot_sets(mini_state):
    state, _ = advance(mini_state, turns(ONE_ONION)[:-2])  # about to place
    sym = extract_symbolic_action(state, A.INTERACT, 1)
    assert sym.subtask == PLACE_ONION_POT
    assert sym.pre == frozenset(
        {prop("holding", 1, "onion"), prop("pot-contains", 0, 0)}
    )
    assert sym.add == frozenset(
        {prop("holding", 1, "nothing"), prop("pot-contains", 0, 1)}
    )
    assert sym.delete == sym.pre


def test_third_onion_owns_readiness(mini_state):
    state, _ = advance(mini_state, turns(ONE_ONION * 3)[:-2])
    sym = extract_symbolic_action(state, A.INTERACT, 1)
    assert sym.subtask == PLACE_ONION_POT
    # the cook-starting placement also claims the future readiness
    assert prop("soup-cooking", 0) in sym.add
    assert prop("soup-ready", 0) in sym.add
    assert prop("pot-contains", 0, 3) in sym.add
    nxt, _, _ = step(state, single_action(1, A.INTERACT))
    nxt_props = ground_state(nxt)
    assert prop("soup-cooking", 0) in nxt_props
    assert prop("soup-ready", 0) not in nxt_props  # arrives cook_time later


def test_get_soup_and_serve_sets(mini_state):
    state, _ = advance(mini_state, turns(ONE_ONION * 3))
    script = [
        (1, A.LEFT), (2, A.RIGHT),          # pot ticks to ready underway
        (1, A.STAY), (2, A.INTERACT),        # agent 2 takes a dish
        (1, A.STAY), (2, A.LEFT),
        (1, A.STAY), (2, A.UP),
    ]
    state, _ = advance(state, script)
    sym = extract_symbolic_action(state, A.INTERACT, 2)
    assert sym.subtask == GET_SOUP_POT
    assert sym.pre == frozenset(
        {prop("holding", 2, "dish"), prop("soup-ready", 0)}
    )
    assert sym.add == frozenset(
        {prop("holding", 2, "soup"), prop("pot-contains", 0, 0)}
    )
    assert sym.delete == frozenset(
        {
            prop("holding", 2, "dish"),
            prop("soup-ready", 0),
            prop("pot-contains", 0, 3),
        }
    )
    state, _ = advance(state, [(2, A.INTERACT), (1, A.STAY), (2, A.DOWN), (1, A.STAY)])
    sym = extract_symbolic_action(state, A.RIGHT, 2)
    assert sym.subtask == MOVE
    state, _ = advance(state, [(2, A.RIGHT), (1, A.STAY)])
    sym = extract_symbolic_action(state, A.INTERACT, 2)
    assert sym.subtask == SERVE_SOUP
    assert sym.pre == frozenset({prop("holding", 2, "soup")})
    assert sym.add == frozenset(
        {prop("holding", 2, "nothing"), prop("soups-delivered", 1)}
    )
    assert sym.delete == frozenset(
        {prop("holding", 2, "soup"), prop("soups-delivered", 0)}
    )


def test_counter_place_and_pickup_sets(mini_state):
    state, _ = advance(mini_state, turns([A.LEFT, A.INTERACT, A.DOWN]))
    sym = extract_symbolic_action(state, A.INTERACT, 1)
    assert sym.subtask == PLACE_ONION_COUNTER
    assert sym.pre == frozenset(
        {prop("holding", 1, "onion"), prop("counter-empty", 1, 2)}
    )
    assert sym.add == frozenset(
        {prop("holding", 1, "nothing"), prop("onion-on-counter", 1, 2)}
    )
    state, _ = advance(state, [(1, A.INTERACT), (2, A.STAY)])
    sym = extract_symbolic_action(state, A.INTERACT, 1)
    assert sym.subtask == PICKUP_ONION_COUNTER
    assert sym.pre == frozenset(
        {prop("holding", 1, "nothing"), prop("onion-on-counter", 1, 2)}
    )
    assert sym.add == frozenset(
        {prop("holding", 1, "onion"), prop("counter-empty", 1, 2)}
    )


def test_next_state_verification(mini_state):
    good, _, _ = step(mini_state, single_action(1, A.RIGHT))
    sym = extract_symbolic_action(mini_state, A.RIGHT, 1, next_state=good)
    assert sym.subtask == MOVE
    with pytest.raises(InconsistentTransition):
        extract_symbolic_action(mini_state, A.LEFT, 1, next_state=good)


def test_resolve_subtask_matches_extraction(mini_state):
    state, _ = advance(mini_state, [(1, A.LEFT)])
    assert resolve_subtask(state, A.INTERACT, 1) == PICKUP_ONION_DISPENSER
    assert resolve_subtask(state, A.UP, 1) == MOVE
    assert resolve_subtask(state, A.STAY, 1) == NOOP


def test_templates_cover_every_subtask():
    assert set(SUBTASK_TEMPLATES) == set(ALL_SUBTASKS)
    vocab = SHARED_PREDICATES | PRIVATE_PREDICATES
    for name, tpl in SUBTASK_TEMPLATES.items():
        for key in ("pre", "add", "del"):
            assert set(tpl[key]) <= vocab, f"{name}.{key} outside the vocabulary"


def test_vocabulary_dump_shape():
    dump = vocabulary_dump()
    assert set(dump["predicates"]["shared"]) == SHARED_PREDICATES
    assert set(dump["predicates"]["private"]) == PRIVATE_PREDICATES
    assert set(dump["subtasks"]) == set(ALL_SUBTASKS)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(1, 100))
def test_strips_contract_on_random_walks(seed, n):
    """pre/del hold before, del gone after, add true after (one exception).

    The only add proposition allowed to be false in the successor state is
    soup-ready on the cook-starting pot placement, whose effect lands
    cook_time ticks later.
    """
    rng = random.Random(seed)
    layout = load_layout(MINI_LAYOUT)
    state = initial_state(layout, EpisodeConfig(cook_time=3, horizon=300))
    acts = [a for a in PrimitiveAction]
    for i in range(n):
        if is_terminal(state):
            break
        agent = 1 + (i % 2)
        act = rng.choice(acts) if rng.random() < 0.5 else A.INTERACT
        before = ground_state(state)
        sym = extract_symbolic_action(state, act, agent)
        state, _, _ = step(state, single_action(agent, act))
        after = ground_state(state)

        assert sym.pre <= before
        assert sym.delete <= before
        assert not (sym.delete & after)
        assert not (sym.add & sym.delete)
        assert not (sym.add & sym.pre)
        late = sym.add - after
        if late:
            assert sym.subtask == PLACE_ONION_POT
            assert all(p.predicate == "soup-ready" for p in late)
