"""Schema derivation, action classification and pair extraction."""

import dataclasses

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import MINI_LAYOUT, external_trace
from interdep import (
    EmptySchema,
    EpisodeConfig,
    InteractionSchema,
    PrimitiveAction,
    ReplayMismatch,
    SchemaMismatch,
    analyze_trace,
    build_interaction_schema,
    classify_action,
    extract_symbolic_action,
    initial_state,
    load_layout,
    single_action,
    step,
)
from interdep.gridworld import (
    PICKUP_ONION_COUNTER,
    PLACE_ONION_COUNTER,
    PLACE_ONION_POT,
)
from interdep.interdependence import ACCEPT, TRIGGER
from oracle_utils import (
    assert_ledger_arithmetic,
    brute_force_match,
    ledger_pair_keys,
    ledger_self_accept_keys,
    random_external_trace,
    replay_symbolic,
)

A = PrimitiveAction

LINKABLE = {
    "onion-on-counter",
    "dish-on-counter",
    "soup-on-counter",
    "counter-empty",
    "pot-contains",
    "soup-ready",
}


def mini_trace(actions, **cfg):
    config = EpisodeConfig(cook_time=3, **cfg)
    return external_trace(MINI_LAYOUT, config, actions)


# schema ------------------------------------------------------------------


def test_schema_fluents_default():
    schema = build_interaction_schema()
    assert schema.trigger_fluents == frozenset(LINKABLE)
    assert schema.accept_fluents == frozenset(LINKABLE)
    assert schema.include_counter_empty


def test_schema_without_counter_empty():
    schema = build_interaction_schema(include_counter_empty=False)
    assert schema.trigger_fluents == frozenset(LINKABLE - {"counter-empty"})
    assert schema.accept_fluents == schema.trigger_fluents


def test_schema_excludes_private_and_unconsumed():
    schema = build_interaction_schema()
    assert "holding" not in schema.trigger_fluents
    assert "soups-delivered" not in schema.trigger_fluents
    # soup-cooking is added by the cook-starting placement but no subtask
    # ever requires it, so it cannot link two actions
    assert "soup-cooking" not in schema.trigger_fluents


def test_empty_schema_rejected():
    with pytest.raises(EmptySchema):
        build_interaction_schema(subtask_templates={})


def test_alien_schema_rejected(passer_receiver_trace):
    bad = InteractionSchema(
        trigger_fluents=frozenset({"teleport"}),
        accept_fluents=frozenset({"teleport"}),
    )
    with pytest.raises(SchemaMismatch):
        analyze_trace(passer_receiver_trace, bad)


# classification ----------------------------------------------------------


@pytest.fixture
def mini_state(mini_layout):
    return initial_state(mini_layout, EpisodeConfig(cook_time=3))


def classify_here(state, action, agent, schema=None):
    sym = extract_symbolic_action(state, action, agent)
    return classify_action(sym, schema or build_interaction_schema())


def test_move_and_pickup_dispenser_are_independent(mini_state):
    cls = classify_here(mini_state, A.RIGHT, 1)
    assert cls.independent and cls.klass == "Independent"
    state, _, _ = step(mini_state, single_action(1, A.LEFT))
    cls = classify_here(state, A.INTERACT, 1)
    # only private holding fluents change: no way to link the partner
    assert cls.independent


def test_place_counter_roles(mini_state):
    state, _, _ = step(mini_state, single_action(1, A.LEFT))
    state, _, _ = step(state, single_action(1, A.INTERACT))
    state, _, _ = step(state, single_action(1, A.DOWN))
    cls = classify_here(state, A.INTERACT, 1)
    # adds onion-on-counter (trigger) and consumes counter-empty (accept)
    assert cls.is_trigger and cls.is_accept
    assert cls.roles == frozenset({TRIGGER, ACCEPT})
    assert cls.klass == "Coordination"
    no_ce = build_interaction_schema(include_counter_empty=False)
    cls = classify_here(state, A.INTERACT, 1, no_ce)
    assert cls.is_trigger and not cls.is_accept


def test_place_pot_is_dual_role(mini_state):
    state = mini_state
    for act in [A.LEFT, A.INTERACT, A.RIGHT, A.UP]:
        state, _, _ = step(state, single_action(1, act))
    cls = classify_here(state, A.INTERACT, 1)
    # consumes pot-contains(0,0) and adds pot-contains(0,1)
    assert cls.is_trigger and cls.is_accept


def test_noop_is_independent(mini_state):
    cls = classify_here(mini_state, A.STAY, 1)
    assert cls.independent


# pair extraction ---------------------------------------------------------

PASS_SCRIPT = [
    (1, A.LEFT),      # t0 face the onion dispenser
    (2, A.LEFT),      # t1 move to (2,1)
    (1, A.INTERACT),  # t2 take an onion
    (2, A.DOWN),      # t3 move to (2,2)
    (1, A.DOWN),      # t4 face the counter
    (2, A.LEFT),      # t5 face the counter
    (1, A.INTERACT),  # t6 place the onion
    (2, A.INTERACT),  # t7 partner picks it up
]


def test_cross_agent_pass_yields_one_pair():
    ledger = analyze_trace(mini_trace(PASS_SCRIPT))
    assert len(ledger.pairs) == 1
    pair = ledger.pairs[0]
    assert pair.prop.canonical() == "onion-on-counter(1,2)"
    assert (pair.giver.agent, pair.giver.t) == (1, 6)
    assert (pair.receiver.agent, pair.receiver.t) == (2, 7)
    assert pair.giver.subtask == PLACE_ONION_COUNTER
    assert pair.receiver.subtask == PICKUP_ONION_COUNTER
    assert ledger.self_accepts == ()
    assert_ledger_arithmetic(ledger)


def test_environment_provenance_yields_nothing():
    # placing into the untouched pot consumes only environment-given fluents
    script = [
        (1, A.LEFT), (2, A.STAY),
        (1, A.INTERACT), (2, A.STAY),
        (1, A.RIGHT), (2, A.STAY),
        (1, A.UP), (2, A.STAY),
        (1, A.INTERACT), (2, A.STAY),
    ]
    ledger = analyze_trace(mini_trace(script))
    assert ledger.pairs == () and ledger.self_accepts == ()
    placed = [c for c in ledger.classifications if c.action.subtask == PLACE_ONION_POT]
    assert len(placed) == 1 and placed[0].is_trigger and placed[0].is_accept
    # its add was never consumed by the partner
    assert [r.t for r in ledger.unaccepted_triggers[1]] == [8]


SELF_ACCEPT_SCRIPT = [
    (1, A.LEFT), (2, A.STAY),
    (1, A.INTERACT), (2, A.STAY),     # t2 take onion
    (1, A.DOWN), (2, A.STAY),         # t4 face counter
    (1, A.INTERACT), (2, A.STAY),     # t6 place
    (1, A.INTERACT), (2, A.STAY),     # t8 take it back: self-acceptance
]


def test_self_acceptance_not_a_pair():
    ledger = analyze_trace(mini_trace(SELF_ACCEPT_SCRIPT))
    assert ledger.pairs == ()
    assert ledger_self_accept_keys(ledger) == [(1, 6, 8, "onion-on-counter(1,2)")]
    # the unconsumed place remains an unaccepted trigger
    assert 6 in [r.t for r in ledger.unaccepted_triggers[1]]
    assert_ledger_arithmetic(ledger)


def test_repeated_place_pairs_with_latest_giver():
    script = PASS_SCRIPT[:6] + [
        (1, A.INTERACT), (2, A.STAY),     # t6 place
        (1, A.INTERACT), (2, A.STAY),     # t8 take back (delete severs t6 link)
        (1, A.INTERACT), (2, A.INTERACT), # t10 place again; t11 partner takes
    ]
    ledger = analyze_trace(mini_trace(script))
    onion_pairs = [p for p in ledger.pairs if p.prop.predicate == "onion-on-counter"]
    assert len(onion_pairs) == 1
    assert onion_pairs[0].giver.t == 10  # not the deleted t6 placement
    assert onion_pairs[0].receiver.t == 11
    # t10's counter-empty came from agent 1's own take-back at t8
    assert (1, 8, 10, "counter-empty(1,2)") in ledger_self_accept_keys(ledger)


def test_counter_empty_links_in_reverse():
    # after a pass, the pickup's counter-empty feeds the next place
    script = PASS_SCRIPT + [
        (1, A.LEFT), (2, A.STAY),       # t8 back toward the dispenser
        (1, A.INTERACT), (2, A.STAY),   # t10 take another onion
        (1, A.DOWN), (2, A.STAY),       # t12 face the counter
        (1, A.INTERACT), (2, A.STAY),   # t14 place: consumes partner's clear
    ]
    ledger = analyze_trace(mini_trace(script))
    ce = [p for p in ledger.pairs if p.prop.predicate == "counter-empty"]
    assert len(ce) == 1
    assert (ce[0].giver.agent, ce[0].giver.t) == (2, 7)
    assert (ce[0].receiver.agent, ce[0].receiver.t) == (1, 14)
    no_ce = build_interaction_schema(include_counter_empty=False)
    ledger_off = analyze_trace(mini_trace(script), no_ce)
    assert all(p.prop.predicate != "counter-empty" for p in ledger_off.pairs)
    assert len(ledger_off.pairs) == 1  # the onion pass survives


def test_pot_coproduction_pairs():
    script = [
        (1, A.LEFT), (2, A.STAY),
        (1, A.INTERACT), (2, A.STAY),
        (1, A.RIGHT), (2, A.STAY),
        (1, A.UP), (2, A.STAY),
        (1, A.INTERACT), (2, A.STAY),      # t8 onion 1 into the pot
        (1, A.LEFT), (2, A.LEFT),          # t10/t11 swap lanes
        (1, A.INTERACT), (2, A.DOWN),      # t12 onion 2 taken; t13 a2 to (2,2)
        (1, A.DOWN), (2, A.LEFT),          # t15 a2 faces counter
        (1, A.INTERACT), (2, A.INTERACT),  # t16 pass; t17 pickup
        (1, A.STAY), (2, A.UP),            # t19 a2 to (2,1)
        (1, A.STAY), (2, A.UP),            # t21 a2 faces pot
        (1, A.STAY), (2, A.INTERACT),      # t23 onion 2 into the pot
    ]
    ledger = analyze_trace(mini_trace(script))
    pot_pairs = [p for p in ledger.pairs if p.prop.predicate == "pot-contains"]
    assert len(pot_pairs) == 1
    assert pot_pairs[0].prop.canonical() == "pot-contains(0,1)"
    assert (pot_pairs[0].giver.agent, pot_pairs[0].giver.t) == (1, 8)
    assert (pot_pairs[0].receiver.agent, pot_pairs[0].receiver.t) == (2, 23)
    assert_ledger_arithmetic(ledger)


# replay guards -----------------------------------------------------------


def test_replay_rejects_time_gap():
    steps = [(1, A.STAY), (2, A.STAY)]
    trace = mini_trace(steps)
    broken = dataclasses.replace(
        trace, steps=((0, 1, A.STAY), (2, 2, A.STAY))
    )
    with pytest.raises(ReplayMismatch):
        analyze_trace(broken)


def test_replay_rejects_turn_order_violation():
    trace = mini_trace([(1, A.STAY), (2, A.STAY)])
    broken = dataclasses.replace(
        trace, steps=((0, 1, A.STAY), (1, 1, A.STAY))
    )
    with pytest.raises(ReplayMismatch):
        analyze_trace(broken)


def test_replay_rejects_steps_past_terminal():
    # horizon 2: the third step runs past the end of the episode
    trace = mini_trace(
        [(1, A.STAY), (2, A.STAY), (1, A.STAY)], horizon=2
    )
    with pytest.raises(ReplayMismatch):
        analyze_trace(trace)


# oracle agreement --------------------------------------------------------


def assert_matches_oracle(trace, schema=None):
    schema = schema or build_interaction_schema()
    ledger = analyze_trace(trace, schema)
    actions, _ = replay_symbolic(trace)
    pairs, self_accepts = brute_force_match(actions, schema.accept_fluents)
    assert ledger_pair_keys(ledger) == pairs
    assert ledger_self_accept_keys(ledger) == self_accepts
    assert_ledger_arithmetic(ledger)
    return ledger


def test_known_traces_match_oracle(passer_receiver_trace, solo_idle_trace):
    assert_matches_oracle(passer_receiver_trace)
    assert_matches_oracle(solo_idle_trace)
    no_ce = build_interaction_schema(include_counter_empty=False)
    assert_matches_oracle(passer_receiver_trace, no_ce)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 100_000))
def test_fuzzed_traces_match_oracle(seed):
    trace = random_external_trace(
        MINI_LAYOUT, EpisodeConfig(cook_time=3, horizon=150), seed, 150
    )
    assert_matches_oracle(trace)
    no_ce = build_interaction_schema(include_counter_empty=False)
    assert_matches_oracle(trace, no_ce)
